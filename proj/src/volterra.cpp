#include "glekit/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

namespace glekit {

namespace {

// Dense SVD is the actual solver on the regularized path; keep it to sizes
// where that stays a few seconds of work.
constexpr std::size_t kMaxDenseSize = 4001;

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace

std::vector<double> BetaGrid::values() const {
  validate();
  std::vector<double> out(count);
  double beta = start;
  for (std::size_t j = 0; j < count; ++j) {
    out[j] = beta;
    beta *= ratio;
  }
  return out;
}

void BetaGrid::validate() const {
  if (!(start > 0.0) || !std::isfinite(start))
    throw ValidationError("beta ladder start must be positive");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ValidationError("beta ladder ratio must lie in (0, 1)");
  if (count < 3)
    throw ValidationError("beta ladder needs at least three entries");
}

std::vector<double> VolterraSystem::solve_lower(
    const std::vector<double>& b) const {
  const std::size_t n = column.size();
  if (b.size() != n)
    throw ValidationError("right-hand side length does not match the system");
  if (column.empty() || column[0] == 0.0)
    throw NumericError("Volterra system is singular: zero diagonal");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b[i];
    for (std::size_t j = 0; j < i; ++j) acc -= column[i - j] * x[j];
    x[i] = acc / column[0];
  }
  if (!all_finite(x))
    throw NumericError("Volterra forward substitution overflowed");
  return x;
}

std::vector<double> VolterraSystem::solve_upper(
    const std::vector<double>& b) const {
  const std::size_t n = column.size();
  if (b.size() != n)
    throw ValidationError("right-hand side length does not match the system");
  if (column.empty() || column[0] == 0.0)
    throw NumericError("Volterra system is singular: zero diagonal");
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= column[j - ii] * x[j];
    x[ii] = acc / column[0];
  }
  if (!all_finite(x))
    throw NumericError("Volterra back substitution overflowed");
  return x;
}

Eigen::MatrixXd VolterraSystem::dense() const {
  const auto n = static_cast<Eigen::Index>(column.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      m(i, j) = column[static_cast<std::size_t>(i - j)];
  return m;
}

VolterraSystem assemble_volterra_system(const CorrelationSeries& c,
                                        const CorrelationSeries& w) {
  c.validate();
  w.validate();
  if (c.kind != SeriesKind::vacf)
    throw ValidationError("Volterra assembly expects a VACF as first input");
  if (w.kind != SeriesKind::fvcf)
    throw ValidationError("Volterra assembly expects an FVCF as second input");
  if (!(c.grid == w.grid) || c.t_offset != w.t_offset)
    throw ValidationError("VACF and FVCF must share one grid");
  if (c.grid.n_t < 3)
    throw ValidationError("kernel extraction needs at least three samples");

  const std::size_t n = c.grid.n_t - 1;
  VolterraSystem sys;
  sys.dt = c.grid.dt;
  sys.column.resize(n);
  sys.rhs.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    sys.column[k] = 0.5 * c.grid.dt * (c.values[k] + c.values[k + 1]);
  for (std::size_t i = 0; i < n; ++i) sys.rhs[i] = -w.values[i + 1];
  return sys;
}

double condition_estimate(const VolterraSystem& system) {
  const std::size_t n = system.size();
  if (n == 0) throw ValidationError("condition estimate of an empty system");
  if (system.column[0] == 0.0)
    return std::numeric_limits<double>::infinity();

  double norm_c = 0.0;
  for (double v : system.column) norm_c += std::abs(v);

  auto norm1 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  };
  auto norm_inf_argmax = [](const std::vector<double>& v) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i]) > best) {
        best = std::abs(v[i]);
        arg = i;
      }
    return std::pair<double, std::size_t>{best, arg};
  };

  double est = 0.0;
  try {
    // Hager's power iteration for ||C^{-1}||_1.
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    for (int iter = 0; iter < 5; ++iter) {
      const std::vector<double> y = system.solve_lower(x);
      est = std::max(est, norm1(y));
      std::vector<double> xi(n);
      for (std::size_t i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
      const std::vector<double> z = system.solve_upper(xi);
      const auto [z_inf, arg] = norm_inf_argmax(z);
      double ztx = 0.0;
      for (std::size_t i = 0; i < n; ++i) ztx += z[i] * x[i];
      if (z_inf <= ztx) break;
      std::fill(x.begin(), x.end(), 0.0);
      x[arg] = 1.0;
    }
    // Higham's alternating safeguard vector.
    std::vector<double> alt(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ramp =
          1.0 + static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n - 1, 1));
      alt[i] = (i % 2 == 0 ? 1.0 : -1.0) * ramp;
    }
    const std::vector<double> y_alt = system.solve_lower(alt);
    est = std::max(est, 2.0 * norm1(y_alt) / (3.0 * static_cast<double>(n)));
  } catch (const NumericError&) {
    return std::numeric_limits<double>::infinity();
  }
  return est * norm_c;
}

QuasiOptimalityResult quasi_optimality_select(
    const std::function<Eigen::VectorXd(double)>& solve_at,
    const std::vector<double>& betas) {
  if (betas.size() < 3)
    throw ValidationError("quasi-optimality needs at least three betas");
  for (std::size_t j = 1; j < betas.size(); ++j)
    if (!(betas[j] < betas[j - 1]) || !(betas[j] > 0.0))
      throw ValidationError("beta ladder must be positive and decreasing");

  std::vector<std::size_t> ok_index;
  std::vector<Eigen::VectorXd> solutions;
  for (std::size_t j = 0; j < betas.size(); ++j) {
    try {
      Eigen::VectorXd x = solve_at(betas[j]);
      if (!x.allFinite()) continue;
      ok_index.push_back(j);
      solutions.push_back(std::move(x));
    } catch (const Error&) {
      continue;
    }
  }
  if (solutions.size() < 2)
    throw NumericError(
        "regularization failed: fewer than two betas produced solutions");

  // Smallest consecutive difference wins; ties resolve toward smaller beta,
  // and the returned solution is the smaller-beta member of the pair.
  std::size_t best_pair = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < solutions.size(); ++j) {
    const double d = (solutions[j + 1] - solutions[j]).norm();
    if (d <= best_d) {
      best_d = d;
      best_pair = j;
    }
  }
  QuasiOptimalityResult result;
  result.index = ok_index[best_pair + 1];
  result.beta = betas[result.index];
  result.solution = solutions[best_pair + 1];
  return result;
}

CorrelationSeries extract_kernel(const CorrelationSeries& c,
                                 const CorrelationSeries& w,
                                 const ExtractionConfig& config) {
  const VolterraSystem sys = assemble_volterra_system(c, w);
  const std::size_t n = sys.size();

  ExtractionPolicy policy = config.policy;
  if (policy == ExtractionPolicy::automatic) {
    if (!(config.cond_threshold > 0.0))
      throw ValidationError("condition threshold must be positive");
    policy = condition_estimate(sys) < config.cond_threshold
                 ? ExtractionPolicy::direct
                 : ExtractionPolicy::tikhonov;
  }

  std::vector<double> kernel_values;
  if (policy == ExtractionPolicy::direct) {
    kernel_values = sys.solve_lower(sys.rhs);
  } else {
    if (n > kMaxDenseSize)
      throw ValidationError(
          "regularized extraction is limited to " +
          std::to_string(kMaxDenseSize) + " kernel samples; got " +
          std::to_string(n));
    const Eigen::MatrixXd dense = sys.dense();
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      rhs(static_cast<Eigen::Index>(i)) = sys.rhs[i];

    Eigen::BDCSVD<Eigen::MatrixXd> svd(
        dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd utb = svd.matrixU().transpose() * rhs;
    const Eigen::VectorXd& sigma = svd.singularValues();

    auto solve_at = [&](double beta) {
      Eigen::VectorXd filtered(sigma.size());
      for (Eigen::Index i = 0; i < sigma.size(); ++i)
        filtered(i) = sigma(i) / (sigma(i) * sigma(i) + beta) * utb(i);
      return Eigen::VectorXd(svd.matrixV() * filtered);
    };
    const auto chosen = quasi_optimality_select(solve_at, config.betas.values());
    kernel_values.assign(chosen.solution.data(),
                         chosen.solution.data() + chosen.solution.size());
  }

  TimeGrid grid{c.grid.dt, n};
  return make_series(grid, SeriesKind::kernel, std::move(kernel_values),
                     0.5 * c.grid.dt);
}

}  // namespace glekit
