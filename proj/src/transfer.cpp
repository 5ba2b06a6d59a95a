#include "glekit/transfer.hpp"

#include <cmath>
#include <string>

namespace glekit {

DirectSurrogate train_direct(const SnapshotSet& snapshots,
                             const GprConfig& config, std::size_t time_stride) {
  snapshots.validate();
  config.validate();
  if (time_stride == 0) throw ValidationError("time stride must be >= 1");

  const std::size_t n_t = snapshots.grid.n_t;
  const std::size_t d = snapshots.param_dim();
  std::vector<std::size_t> t_index;
  for (std::size_t j = 0; j < n_t; j += time_stride) t_index.push_back(j);

  const std::size_t rows = snapshots.n_points() * t_index.size();
  if (rows > kDirectTrainingBudget)
    throw ValidationError(
        "direct GPR training set has " + std::to_string(rows) +
        " rows, above the " + std::to_string(kDirectTrainingBudget) +
        " budget; increase the time stride or train a ROM-GPR surrogate");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(1 + d));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < snapshots.n_points(); ++i) {
    for (std::size_t j : t_index) {
      x(row, 0) = snapshots.t_offset + snapshots.grid.time(j);
      for (std::size_t k = 0; k < d; ++k)
        x(row, static_cast<Eigen::Index>(1 + k)) =
            snapshots.points[i].coords[k];
      y(row) = snapshots.kernels(static_cast<Eigen::Index>(i),
                                 static_cast<Eigen::Index>(j));
      ++row;
    }
  }

  DirectSurrogate s;
  s.model = GprModel::train(x, y, config);
  s.grid = snapshots.grid;
  s.t_offset = snapshots.t_offset;
  s.param_dim = d;
  s.time_stride = time_stride;
  s.training = snapshots;
  return s;
}

RomGprSurrogate train_rom_gpr(const SnapshotSet& snapshots, double zeta_pod,
                              const GprConfig& config) {
  snapshots.validate();
  config.validate();

  RomGprSurrogate s;
  s.basis = build_pod_basis(snapshots, zeta_pod);
  s.param_dim = snapshots.param_dim();
  s.training = snapshots;

  const std::size_t n_points = snapshots.n_points();
  Eigen::MatrixXd mu(static_cast<Eigen::Index>(n_points),
                     static_cast<Eigen::Index>(s.param_dim));
  for (std::size_t i = 0; i < n_points; ++i)
    for (std::size_t k = 0; k < s.param_dim; ++k)
      mu(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          snapshots.points[i].coords[k];

  s.mode_models.reserve(s.basis.rank);
  for (std::size_t k = 0; k < s.basis.rank; ++k) {
    const Eigen::VectorXd alpha =
        s.basis.training_modes.row(static_cast<Eigen::Index>(k)).transpose();
    s.mode_models.push_back(GprModel::train(mu, alpha, config));
  }
  return s;
}

KernelPrediction predict_kernel(const DirectSurrogate& surrogate,
                                const ParameterPoint& mu) {
  mu.validate();
  if (mu.dim() != surrogate.param_dim)
    throw ValidationError("query point dimension does not match the model");

  const std::size_t n_t = surrogate.grid.n_t;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n_t),
                    static_cast<Eigen::Index>(1 + surrogate.param_dim));
  for (std::size_t j = 0; j < n_t; ++j) {
    x(static_cast<Eigen::Index>(j), 0) =
        surrogate.t_offset + surrogate.grid.time(j);
    for (std::size_t k = 0; k < surrogate.param_dim; ++k)
      x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(1 + k)) =
          mu.coords[k];
  }
  const GprPrediction p = surrogate.model.predict(x);

  KernelPrediction out;
  std::vector<double> values(p.mean.data(), p.mean.data() + p.mean.size());
  out.kernel = make_series(surrogate.grid, SeriesKind::kernel,
                           std::move(values), surrogate.t_offset);
  out.pointwise_std = p.std;
  return out;
}

KernelPrediction predict_kernel(const RomGprSurrogate& surrogate,
                                const ParameterPoint& mu) {
  mu.validate();
  if (mu.dim() != surrogate.param_dim)
    throw ValidationError("query point dimension does not match the model");

  const std::size_t rank = surrogate.basis.rank;
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(surrogate.param_dim));
  for (std::size_t k = 0; k < surrogate.param_dim; ++k)
    x(0, static_cast<Eigen::Index>(k)) = mu.coords[k];

  KernelPrediction out;
  out.mode_means.resize(static_cast<Eigen::Index>(rank));
  out.mode_stds.resize(static_cast<Eigen::Index>(rank));
  for (std::size_t k = 0; k < rank; ++k) {
    const GprPrediction p =
        surrogate.mode_models[k].predict(x);
    out.mode_means(static_cast<Eigen::Index>(k)) = p.mean(0);
    out.mode_stds(static_cast<Eigen::Index>(k)) = p.std(0);
  }
  out.kernel = reconstruct(surrogate.basis, out.mode_means);

  // Pointwise uncertainty from independent mode posteriors:
  // var(t) = sum_k std_k^2 phi_k(t)^2.
  const auto n_t = static_cast<Eigen::Index>(surrogate.basis.grid.n_t);
  out.pointwise_std.setZero(n_t);
  for (std::size_t k = 0; k < rank; ++k) {
    const double sd = out.mode_stds(static_cast<Eigen::Index>(k));
    out.pointwise_std +=
        (sd * sd) *
        surrogate.basis.bases.col(static_cast<Eigen::Index>(k)).cwiseAbs2();
  }
  out.pointwise_std = out.pointwise_std.cwiseSqrt();
  return out;
}

double relative_error(const CorrelationSeries& prediction,
                      const CorrelationSeries& truth) {
  prediction.validate();
  truth.validate();
  if (!(prediction.grid == truth.grid) ||
      prediction.t_offset != truth.t_offset)
    throw ValidationError("relative error needs a shared grid");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double diff = prediction.values[i] - truth.values[i];
    num += diff * diff;
    den += truth.values[i] * truth.values[i];
  }
  if (!(den > 0.0))
    throw ValidationError("relative error against an identically zero truth");
  return std::sqrt(num / den);
}

}  // namespace glekit
