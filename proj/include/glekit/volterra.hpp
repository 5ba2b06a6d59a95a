#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "glekit/types.hpp"

namespace glekit {

// Geometric regularization ladder beta_j = start * ratio^j, j = 0..count-1,
// strictly decreasing.
struct BetaGrid {
  double start = 1.0;
  double ratio = 0.5;
  std::size_t count = 41;

  std::vector<double> values() const;
  void validate() const;
};

enum class ExtractionPolicy { direct, tikhonov, automatic };

// Discretized first-kind Volterra system for the memory kernel,
//   sum_{j<=i} (dt/2) (C(t_{i-j}) + C(t_{i-j+1})) K_j = -W(t_{i+1}),
// with K_j the kernel at the half-grid node t_{j+1/2}. The lower-triangular
// Toeplitz matrix is stored through its first column only.
struct VolterraSystem {
  double dt = 0.0;
  std::vector<double> column;  // column[k] = (dt/2) (C_k + C_{k+1})
  std::vector<double> rhs;     // rhs[i] = -W(t_{i+1})

  std::size_t size() const { return column.size(); }

  // Forward substitution C x = b. Throws on a singular diagonal.
  std::vector<double> solve_lower(const std::vector<double>& b) const;
  // Back substitution C^T x = b.
  std::vector<double> solve_upper(const std::vector<double>& b) const;
  // Dense materialization, for the regularized path and for tests.
  Eigen::MatrixXd dense() const;
};

VolterraSystem assemble_volterra_system(const CorrelationSeries& c,
                                        const CorrelationSeries& w);

// 1-norm condition estimate of the Toeplitz factor (Hager-Higham power
// iteration on C^{-1} using triangular solves). Returns +inf when singular.
double condition_estimate(const VolterraSystem& system);

struct QuasiOptimalityResult {
  double beta = 0.0;
  Eigen::VectorXd solution;
  std::size_t index = 0;  // position of the chosen beta in the ladder
};

// Quasi-optimality criterion: evaluate the solver over the decreasing
// ladder, pick the consecutive pair with the smallest solution difference
// (ties toward smaller beta) and return that pair's smaller-beta member.
// Solver failures (exceptions, non-finite results) are skipped; if fewer
// than two ladder entries survive, a numeric error is raised.
QuasiOptimalityResult quasi_optimality_select(
    const std::function<Eigen::VectorXd(double)>& solve_at,
    const std::vector<double>& betas);

struct ExtractionConfig {
  ExtractionPolicy policy = ExtractionPolicy::automatic;
  double cond_threshold = 1e8;
  BetaGrid betas;
};

// Recovers the memory kernel from the VACF and FVCF. DIRECT solves the
// triangular system exactly; TIKHONOV solves the normal equations
// (C^T C + beta I) K = -C^T W with beta chosen by quasi-optimality; AUTO
// picks DIRECT below the condition threshold, TIKHONOV above.
CorrelationSeries extract_kernel(const CorrelationSeries& c,
                                 const CorrelationSeries& w,
                                 const ExtractionConfig& config = {});

}  // namespace glekit
