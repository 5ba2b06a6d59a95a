#include "glekit/active.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace glekit {

void CandidatePool::validate() const {
  if (points.size() < 2)
    throw ValidationError("candidate pool needs at least two points");
  const std::size_t d = points.front().dim();
  for (const auto& p : points) {
    p.validate();
    if (p.dim() != d)
      throw ValidationError("pool points have mixed dimensions");
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j])
        throw ValidationError("pool points must be pairwise distinct");
}

std::size_t CandidatePool::index_of(const ParameterPoint& p) const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i] == p) return i;
  throw ValidationError("point is not a member of the candidate pool");
}

CandidatePool uniform_grid_pool(const std::vector<double>& lower,
                                const std::vector<double>& upper,
                                const std::vector<std::size_t>& per_axis) {
  if (lower.size() != upper.size() || lower.size() != per_axis.size())
    throw ValidationError("pool bounds and counts disagree in dimension");
  if (lower.empty()) throw ValidationError("pool needs at least one axis");
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (!(lower[k] < upper[k]))
      throw ValidationError("pool bounds must satisfy lower < upper");
    if (per_axis[k] == 0)
      throw ValidationError("pool needs at least one point per axis");
  }

  std::size_t total = 1;
  for (std::size_t n : per_axis) total *= n;
  CandidatePool pool;
  pool.points.reserve(total);
  // Row-major enumeration: the last axis varies fastest. Single-point axes
  // collapse to the interval midpoint.
  for (std::size_t flat = 0; flat < total; ++flat) {
    ParameterPoint p;
    p.coords.resize(lower.size());
    std::size_t rest = flat;
    for (std::size_t k = lower.size(); k-- > 0;) {
      const std::size_t i = rest % per_axis[k];
      rest /= per_axis[k];
      p.coords[k] =
          per_axis[k] == 1
              ? 0.5 * (lower[k] + upper[k])
              : lower[k] + (upper[k] - lower[k]) * static_cast<double>(i) /
                               static_cast<double>(per_axis[k] - 1);
    }
    pool.points.push_back(std::move(p));
  }
  return pool;
}

UncertaintyField uncertainty_field(const RomGprSurrogate& surrogate,
                                   const CandidatePool& pool) {
  pool.validate();
  if (pool.points.front().dim() != surrogate.param_dim)
    throw ValidationError("pool dimension does not match the surrogate");

  UncertaintyField field;
  field.sigma_bar.assign(pool.size(), 0.0);
  const std::size_t rank = surrogate.basis.rank;
  if (rank == 0) {
    field.rank_zero = true;
    return field;
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(pool.size()),
                    static_cast<Eigen::Index>(surrogate.param_dim));
  for (std::size_t i = 0; i < pool.size(); ++i)
    for (std::size_t k = 0; k < surrogate.param_dim; ++k)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          pool.points[i].coords[k];

  double normalizer = 0.0;
  Eigen::MatrixXd stds(static_cast<Eigen::Index>(pool.size()),
                       static_cast<Eigen::Index>(rank));
  for (std::size_t k = 0; k < rank; ++k) {
    const GprPrediction p = surrogate.mode_models[k].predict(x);
    stds.col(static_cast<Eigen::Index>(k)) = p.std;
    normalizer += p.mean.cwiseAbs().maxCoeff();
  }
  if (!(normalizer > 0.0))
    throw NumericError(
        "uncertainty field is degenerate: every mode mean vanishes on the pool");

  for (std::size_t i = 0; i < pool.size(); ++i)
    field.sigma_bar[i] =
        stds.row(static_cast<Eigen::Index>(i)).sum() / normalizer;
  return field;
}

std::size_t next_sample(const UncertaintyField& field,
                        const std::vector<bool>& sampled) {
  if (field.sigma_bar.size() != sampled.size())
    throw ValidationError("field and sampled mask disagree in length");
  std::size_t best = field.sigma_bar.size();
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < field.sigma_bar.size(); ++i) {
    if (sampled[i]) continue;
    if (field.sigma_bar[i] > best_value) {
      best_value = field.sigma_bar[i];
      best = i;
    }
  }
  if (best == field.sigma_bar.size())
    throw ValidationError("every pool point has already been sampled");
  return best;
}

void ActiveConfig::validate() const {
  if (!(zeta_al > 0.0)) throw ValidationError("zeta_al must be positive");
  if (!(zeta_pod >= 0.0 && zeta_pod < 1.0))
    throw ValidationError("zeta_pod must lie in [0, 1)");
  if (budget < 2) throw ValidationError("budget must allow at least 2 samples");
  gpr.validate();
}

ActiveRun run_active_learning(const KernelOracle& oracle,
                              const CandidatePool& pool,
                              const std::vector<ParameterPoint>& initial,
                              const ActiveConfig& config) {
  pool.validate();
  config.validate();
  if (initial.size() < 2)
    throw ValidationError("active learning needs at least two initial points");
  if (initial.size() > config.budget)
    throw ValidationError("initial design already exceeds the budget");

  ActiveRun run;
  std::vector<bool> sampled(pool.size(), false);
  std::vector<CorrelationSeries> kernels;

  for (const auto& p : initial) {
    const std::size_t idx = pool.index_of(p);
    if (sampled[idx])
      throw ValidationError("initial design repeats a pool point");
    sampled[idx] = true;
    run.sampled_indices.push_back(idx);
    run.sampled.push_back(pool.points[idx]);
    kernels.push_back(oracle(pool.points[idx]));
  }

  while (true) {
    const SnapshotSet snapshots = make_snapshot_set(run.sampled, kernels);
    run.surrogate = train_rom_gpr(snapshots, config.zeta_pod, config.gpr);
    const UncertaintyField field = uncertainty_field(run.surrogate, pool);
    run.final_max_sigma =
        *std::max_element(field.sigma_bar.begin(), field.sigma_bar.end());

    if (run.final_max_sigma <= config.zeta_al) {
      run.converged = true;
      break;
    }
    if (run.sampled.size() >= config.budget) {
      run.converged = false;
      break;
    }

    const std::size_t idx = next_sample(field, sampled);
    sampled[idx] = true;
    run.sampled_indices.push_back(idx);
    run.sampled.push_back(pool.points[idx]);
    run.history.push_back({pool.points[idx], field.sigma_bar[idx]});
    kernels.push_back(oracle(pool.points[idx]));
  }
  return run;
}

}  // namespace glekit
