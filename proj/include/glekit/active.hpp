#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "glekit/transfer.hpp"
#include "glekit/types.hpp"

namespace glekit {

// Discrete candidate set over the parameter domain.
struct CandidatePool {
  std::vector<ParameterPoint> points;

  std::size_t size() const { return points.size(); }
  void validate() const;
  // Index of an exactly matching point; throws if absent.
  std::size_t index_of(const ParameterPoint& p) const;
};

CandidatePool uniform_grid_pool(const std::vector<double>& lower,
                                const std::vector<double>& upper,
                                const std::vector<std::size_t>& per_axis);

// Maps a parameter point to its kernel. Realizations: closed-form synthetic
// families for tests, and a file-backed store that raises DataRequestError
// for missing points so an external pipeline can produce them.
using KernelOracle = std::function<CorrelationSeries(const ParameterPoint&)>;

// Normalized acquisition field sigma_bar(mu) = sum_k sigma_k(mu) /
// sum_k ||u_k||_inf, with the mode means u_k taken over the whole pool.
struct UncertaintyField {
  std::vector<double> sigma_bar;
  bool rank_zero = false;  // basis had no modes; the field is identically 0
};

UncertaintyField uncertainty_field(const RomGprSurrogate& surrogate,
                                   const CandidatePool& pool);

// Argmax of the field over pool points not yet sampled; ties break toward
// the lowest pool index.
std::size_t next_sample(const UncertaintyField& field,
                        const std::vector<bool>& sampled);

struct ActiveConfig {
  double zeta_al = 0.01;   // convergence threshold on the field
  double zeta_pod = 0.01;  // POD truncation tolerance per retrain
  std::size_t budget = 100;  // total sample cap, initial design included
  GprConfig gpr;

  void validate() const;
};

struct ActiveStep {
  ParameterPoint point;
  double sigma_bar = 0.0;  // field value that selected the point
};

struct ActiveRun {
  std::vector<ParameterPoint> sampled;  // initial design first, then queries
  std::vector<std::size_t> sampled_indices;
  RomGprSurrogate surrogate;            // trained on every sampled point
  std::vector<ActiveStep> history;      // one entry per sample beyond init
  double final_max_sigma = 0.0;         // over the whole pool
  bool converged = false;
};

// Uncertainty-guided sampling: retrain POD + mode GPs from scratch on every
// acquisition, stop when the field maximum over the pool drops below
// zeta_al or the budget is exhausted.
ActiveRun run_active_learning(const KernelOracle& oracle,
                              const CandidatePool& pool,
                              const std::vector<ParameterPoint>& initial,
                              const ActiveConfig& config);

}  // namespace glekit
