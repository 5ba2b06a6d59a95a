#include "glekit/pod.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace glekit {

namespace {

constexpr double kEigenvalueClamp = 1e-12;  // relative to the largest

Eigen::VectorXd quadrature_vector(const TimeGrid& grid) {
  const auto w = trapezoid_weights(grid);
  Eigen::VectorXd out(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = w[i];
  return out;
}

}  // namespace

CorrelationSeries SnapshotSet::kernel(std::size_t i) const {
  if (i >= n_points()) throw ValidationError("snapshot index out of range");
  std::vector<double> values(grid.n_t);
  for (std::size_t j = 0; j < grid.n_t; ++j)
    values[j] = kernels(static_cast<Eigen::Index>(i),
                        static_cast<Eigen::Index>(j));
  return make_series(grid, SeriesKind::kernel, std::move(values), t_offset);
}

void SnapshotSet::validate() const {
  grid.validate();
  if (points.empty()) throw ValidationError("snapshot set is empty");
  const std::size_t d = points.front().dim();
  for (const auto& p : points) {
    p.validate();
    if (p.dim() != d)
      throw ValidationError("parameter points have mixed dimensions");
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j])
        throw ValidationError("snapshot parameter points must be distinct");
  if (kernels.rows() != static_cast<Eigen::Index>(points.size()) ||
      kernels.cols() != static_cast<Eigen::Index>(grid.n_t))
    throw ValidationError("snapshot matrix does not match points and grid");
  if (!kernels.allFinite())
    throw ValidationError("snapshot matrix contains non-finite values");
  if (!axis_names.empty() && axis_names.size() != d)
    throw ValidationError("need one axis name per parameter coordinate");
}

SnapshotSet make_snapshot_set(const std::vector<ParameterPoint>& points,
                              const std::vector<CorrelationSeries>& kernels) {
  if (points.size() != kernels.size())
    throw ValidationError("need one kernel per parameter point");
  if (points.empty()) throw ValidationError("snapshot set is empty");
  SnapshotSet out;
  out.grid = kernels.front().grid;
  out.t_offset = kernels.front().t_offset;
  out.points = points;
  out.kernels.resize(static_cast<Eigen::Index>(points.size()),
                     static_cast<Eigen::Index>(out.grid.n_t));
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    kernels[i].validate();
    if (!(kernels[i].grid == out.grid) || kernels[i].t_offset != out.t_offset)
      throw ValidationError("snapshots must share one time grid");
    for (std::size_t j = 0; j < out.grid.n_t; ++j)
      out.kernels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          kernels[i].values[j];
  }
  out.validate();
  return out;
}

void PodBasis::validate() const {
  grid.validate();
  if (mean.size() != static_cast<Eigen::Index>(grid.n_t))
    throw ValidationError("basis mean does not match the grid");
  if (bases.rows() != mean.size() ||
      bases.cols() != static_cast<Eigen::Index>(rank))
    throw ValidationError("basis matrix does not match grid and rank");
  if (training_modes.rows() != static_cast<Eigen::Index>(rank))
    throw ValidationError("training modes do not match the rank");
  if (!(rel_error >= 0.0))
    throw ValidationError("basis truncation error must be >= 0");
}

std::size_t select_rank(const Eigen::VectorXd& eigenvalues, double zeta) {
  if (!(zeta >= 0.0 && zeta < 1.0))
    throw ValidationError("zeta_pod must lie in [0, 1)");
  for (Eigen::Index i = 1; i < eigenvalues.size(); ++i)
    if (eigenvalues(i) > eigenvalues(i - 1) * (1.0 + 1e-12))
      throw ValidationError("eigenvalues must be sorted in decreasing order");
  if (eigenvalues.size() == 0 || !(eigenvalues.maxCoeff() > 0.0)) return 0;

  Eigen::VectorXd clamped = eigenvalues.cwiseMax(0.0);
  const double floor = kEigenvalueClamp * clamped(0);
  for (Eigen::Index i = 0; i < clamped.size(); ++i)
    if (clamped(i) < floor) clamped(i) = 0.0;

  // Suffix sums keep the tail exact: a running subtraction leaves rounding
  // dust once every positive eigenvalue is consumed, which a tight zeta
  // (relative ~1e-8) would mistake for retained energy.
  Eigen::VectorXd tail(clamped.size() + 1);
  tail(clamped.size()) = 0.0;
  for (Eigen::Index i = clamped.size() - 1; i >= 0; --i)
    tail(i) = tail(i + 1) + clamped(i);
  const double total = tail(0);
  for (Eigen::Index r = 0; r < clamped.size(); ++r)
    if (std::sqrt(tail(r) / total) <= zeta) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(clamped.size());
}

PodBasis build_pod_basis(const SnapshotSet& snapshots, double zeta_pod) {
  snapshots.validate();
  if (!(zeta_pod >= 0.0 && zeta_pod < 1.0))
    throw ValidationError("zeta_pod must lie in [0, 1)");
  const std::size_t n_points = snapshots.n_points();
  if (n_points < 2)
    throw ValidationError("POD needs at least two snapshots");

  const auto n_t = static_cast<Eigen::Index>(snapshots.grid.n_t);
  const Eigen::VectorXd mean = snapshots.kernels.colwise().mean();
  Eigen::MatrixXd fluct = snapshots.kernels;
  fluct.rowwise() -= mean.transpose();

  // Snapshot correlation under the trapezoid inner product.
  const Eigen::VectorXd w = quadrature_vector(snapshots.grid);
  const Eigen::MatrixXd gram =
      fluct * w.asDiagonal() * fluct.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success)
    throw NumericError("snapshot correlation eigendecomposition failed");

  // Ascending from Eigen; flip to descending and clamp the numerical zeros.
  const auto n = es.eigenvalues().size();
  Eigen::VectorXd lambda(n);
  Eigen::MatrixXd vectors(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lambda(i) = es.eigenvalues()(n - 1 - i);
    vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  const double lead = std::max(lambda.maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < n; ++i)
    if (lambda(i) < kEigenvalueClamp * lead) lambda(i) = 0.0;

  // Never carry a clamped-to-zero direction into the basis: its singular
  // vector is pure round-off and the 1/sqrt(lambda) scaling would blow up.
  std::size_t positive = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (lambda(i) > 0.0) ++positive;
  const std::size_t rank = std::min(select_rank(lambda, zeta_pod), positive);

  PodBasis basis;
  basis.grid = snapshots.grid;
  basis.t_offset = snapshots.t_offset;
  basis.mean = mean;
  basis.eigenvalues = lambda;
  basis.rank = rank;
  basis.bases.resize(n_t, static_cast<Eigen::Index>(rank));
  basis.training_modes.resize(static_cast<Eigen::Index>(rank),
                              static_cast<Eigen::Index>(n_points));

  for (std::size_t k = 0; k < rank; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    const double root = std::sqrt(lambda(col));
    Eigen::VectorXd phi = fluct.transpose() * vectors.col(col) / root;
    // Deterministic sign: the largest-magnitude entry comes out positive.
    Eigen::Index arg = 0;
    phi.cwiseAbs().maxCoeff(&arg);
    const double sign = phi(arg) < 0.0 ? -1.0 : 1.0;
    basis.bases.col(col) = sign * phi;
    basis.training_modes.row(col) =
        sign * root * vectors.col(col).transpose();
  }

  const double total = lambda.sum();
  if (total > 0.0) {
    double tail = 0.0;
    for (Eigen::Index i = static_cast<Eigen::Index>(rank); i < n; ++i)
      tail += lambda(i);
    basis.rel_error = std::sqrt(std::max(tail, 0.0) / total);
  } else {
    basis.rel_error = 0.0;
  }
  return basis;
}

Eigen::VectorXd project(const PodBasis& basis, const CorrelationSeries& kernel) {
  basis.validate();
  kernel.validate();
  if (!(kernel.grid == basis.grid) || kernel.t_offset != basis.t_offset)
    throw ValidationError("kernel grid does not match the basis grid");
  Eigen::VectorXd fluct(basis.mean.size());
  for (std::size_t i = 0; i < kernel.size(); ++i)
    fluct(static_cast<Eigen::Index>(i)) = kernel.values[i];
  fluct -= basis.mean;
  const Eigen::VectorXd w = quadrature_vector(basis.grid);
  return basis.bases.transpose() * (w.asDiagonal() * fluct);
}

CorrelationSeries reconstruct(const PodBasis& basis,
                              const Eigen::VectorXd& modes) {
  basis.validate();
  if (modes.size() != static_cast<Eigen::Index>(basis.rank))
    throw ValidationError("mode vector length does not match the basis rank");
  Eigen::VectorXd values = basis.mean;
  if (basis.rank > 0) values += basis.bases * modes;
  std::vector<double> out(values.data(), values.data() + values.size());
  return make_series(basis.grid, SeriesKind::kernel, std::move(out),
                     basis.t_offset);
}

}  // namespace glekit
