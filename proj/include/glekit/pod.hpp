#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "glekit/types.hpp"

namespace glekit {

// Kernel snapshots K(t; mu_i) on one shared grid, one row per parameter
// point. Points must be pairwise distinct.
struct SnapshotSet {
  TimeGrid grid;
  double t_offset = 0.0;
  std::vector<ParameterPoint> points;
  Eigen::MatrixXd kernels;  // n_points x n_t
  std::vector<std::string> axis_names;  // optional, one per coordinate

  std::size_t n_points() const { return points.size(); }
  std::size_t param_dim() const {
    return points.empty() ? 0 : points.front().dim();
  }
  CorrelationSeries kernel(std::size_t i) const;

  void validate() const;
};

SnapshotSet make_snapshot_set(const std::vector<ParameterPoint>& points,
                              const std::vector<CorrelationSeries>& kernels);

// Orthonormal reduced basis of the mean-subtracted snapshot fluctuations
// under the trapezoid inner product (f, g) = int f g dt.
struct PodBasis {
  TimeGrid grid;
  double t_offset = 0.0;
  Eigen::VectorXd mean;          // n_t
  Eigen::MatrixXd bases;         // n_t x rank, columns phi_k
  Eigen::VectorXd eigenvalues;   // all snapshot-correlation eigenvalues, desc
  Eigen::MatrixXd training_modes;  // rank x n_points, alpha_k(mu_i)
  std::size_t rank = 0;
  double rel_error = 0.0;  // truncation error at the chosen rank

  void validate() const;
};

// Smallest R with sqrt(sum_{k>R} lambda / sum lambda) <= zeta. Eigenvalues
// below 1e-12 * lambda_1 are treated as zero.
std::size_t select_rank(const Eigen::VectorXd& eigenvalues, double zeta);

PodBasis build_pod_basis(const SnapshotSet& snapshots, double zeta_pod);

// Quadrature projection of a kernel onto the basis: alpha_k = (K - mean, phi_k).
Eigen::VectorXd project(const PodBasis& basis, const CorrelationSeries& kernel);

// mean + sum_k alpha_k phi_k on the basis grid.
CorrelationSeries reconstruct(const PodBasis& basis,
                              const Eigen::VectorXd& modes);

}  // namespace glekit
