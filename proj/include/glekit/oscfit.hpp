#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "glekit/types.hpp"

namespace glekit {

// One damped-oscillator term K_l(t) = exp(-a t / 2) (b cos(q t) + c sin(q t)).
struct OscillatorTerm {
  double a = 1.0;  // decay rate, > 0
  double b = 0.0;  // cosine amplitude, >= 0
  double c = 0.0;  // sine amplitude, |c| <= a b / (2 q)
  double q = 1.0;  // angular frequency, > 0
};

// Finite expansion of a memory kernel in damped-oscillator terms. The
// amplitude constraints keep every term realizable as a two-variable
// Markovian block with a fluctuation-dissipation-consistent noise factor.
struct OscillatorExpansion {
  std::vector<OscillatorTerm> terms;

  std::size_t n_terms() const { return terms.size(); }
  double k0() const;  // K(0) = sum of b_l
  void validate() const;
};

double eval_expansion_at(const OscillatorExpansion& exp, double t);
CorrelationSeries eval_expansion(const OscillatorExpansion& exp,
                                 const TimeGrid& grid, double t_offset = 0.0);

// Extended Markovian dynamics for one CG degree of freedom: the momentum P
// couples to 2 auxiliary variables per term,
//   dP/dt = -A_ps S,
//   dS/dt = -A_sp P / M - A_ss S + B_s xi(t),
// with A_ps = -A_sp^T and B_s B_s^T = kbt (A_ss + A_ss^T).
struct ExtendedSystem {
  double mass = 1.0;
  double kbt = 1.0;
  Eigen::VectorXd a_sp;  // length 2N, column coupling S <- P
  Eigen::MatrixXd a_ss;  // 2N x 2N, block diagonal in 2x2 blocks
  Eigen::MatrixXd b_s;   // 2N x 2N noise factor

  std::size_t n_terms() const {
    return static_cast<std::size_t>(a_sp.size()) / 2;
  }
  std::size_t dim() const { return static_cast<std::size_t>(a_sp.size()) + 1; }

  // Drift of the scaled state z = (P / sqrt(M), S), for which the stationary
  // covariance is kbt * I. Row/col 0 is the momentum slot.
  Eigen::MatrixXd drift_scaled() const;

  void validate() const;
};

ExtendedSystem assemble_extended_system(const OscillatorExpansion& exp,
                                        double mass, double kbt);

// Kernel reproduced from the assembled matrices,
// K(t) = A_ps expm(-t A_ss) A_sp, evaluated blockwise.
CorrelationSeries matrix_kernel(const ExtendedSystem& sys, const TimeGrid& grid,
                                double t_offset = 0.0);

struct FitConfig {
  int n_starts = 8;
  int max_iterations = 400;
  // Fit fails (numeric error) if every start lands above this relative L2
  // residual.
  double residual_ceiling = 1.0;
  std::uint64_t seed = 0;
  // Optional warm start: its terms seed the first start, padded with
  // near-zero-amplitude terms when the requested order is larger.
  const OscillatorExpansion* warm_start = nullptr;
};

struct FitResult {
  OscillatorExpansion expansion;
  double rel_residual = 0.0;  // ||K_fit - K|| / ||K||
};

FitResult fit_expansion(const CorrelationSeries& kernel, std::size_t n_terms,
                        const FitConfig& config = {});

}  // namespace glekit
