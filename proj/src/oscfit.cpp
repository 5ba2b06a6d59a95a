#include "glekit/oscfit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>
#include <unsupported/Eigen/NonLinearOptimization>

#include "glekit/rng.hpp"

namespace glekit {

namespace {

constexpr double kMinRate = 1e-6;  // lower bounds for a and q in the fit

double term_value(const OscillatorTerm& term, double t) {
  return std::exp(-0.5 * term.a * t) *
         (term.b * std::cos(term.q * t) + term.c * std::sin(term.q * t));
}

}  // namespace

double OscillatorExpansion::k0() const {
  double sum = 0.0;
  for (const auto& term : terms) sum += term.b;
  return sum;
}

void OscillatorExpansion::validate() const {
  for (const auto& term : terms) {
    if (!std::isfinite(term.a) || !std::isfinite(term.b) ||
        !std::isfinite(term.c) || !std::isfinite(term.q))
      throw ValidationError("oscillator term has a non-finite parameter");
    if (!(term.a > 0.0))
      throw ValidationError("oscillator decay rate a must be > 0");
    if (!(term.q > 0.0))
      throw ValidationError("oscillator frequency q must be > 0");
    if (term.b < 0.0)
      throw ValidationError("oscillator cosine amplitude b must be >= 0");
    const double bound = term.a * term.b / (2.0 * term.q);
    if (std::abs(term.c) > bound * (1.0 + 1e-12) + 1e-300)
      throw ValidationError(
          "oscillator sine amplitude violates |c| <= a b / (2 q)");
  }
}

double eval_expansion_at(const OscillatorExpansion& exp, double t) {
  double sum = 0.0;
  for (const auto& term : exp.terms) sum += term_value(term, t);
  return sum;
}

CorrelationSeries eval_expansion(const OscillatorExpansion& exp,
                                 const TimeGrid& grid, double t_offset) {
  exp.validate();
  grid.validate();
  std::vector<double> values(grid.n_t);
  for (std::size_t i = 0; i < grid.n_t; ++i)
    values[i] = eval_expansion_at(exp, t_offset + grid.time(i));
  return make_series(grid, SeriesKind::kernel, std::move(values), t_offset);
}

void ExtendedSystem::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw ValidationError("extended system mass must be positive");
  if (!(kbt >= 0.0) || !std::isfinite(kbt))
    throw ValidationError("extended system kbt must be >= 0");
  if (a_sp.size() % 2 != 0)
    throw ValidationError("A_sp must hold two rows per oscillator term");
  const auto n = a_sp.size();
  if (a_ss.rows() != n || a_ss.cols() != n || b_s.rows() != n ||
      b_s.cols() != n)
    throw ValidationError("extended system blocks have mismatched shapes");
}

Eigen::MatrixXd ExtendedSystem::drift_scaled() const {
  const auto n = a_sp.size();
  const double root_m = std::sqrt(mass);
  Eigen::MatrixXd drift = Eigen::MatrixXd::Zero(n + 1, n + 1);
  drift.block(1, 1, n, n) = a_ss;
  drift.col(0).tail(n) = a_sp / root_m;
  drift.row(0).tail(n) = -a_sp.transpose() / root_m;
  return drift;
}

ExtendedSystem assemble_extended_system(const OscillatorExpansion& exp,
                                        double mass, double kbt) {
  exp.validate();
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw ValidationError("mass must be positive");
  if (!(kbt >= 0.0) || !std::isfinite(kbt))
    throw ValidationError("kbt must be >= 0");

  const auto n_terms = exp.terms.size();
  ExtendedSystem sys;
  sys.mass = mass;
  sys.kbt = kbt;
  sys.a_sp = Eigen::VectorXd::Zero(2 * n_terms);
  sys.a_ss = Eigen::MatrixXd::Zero(2 * n_terms, 2 * n_terms);
  sys.b_s = Eigen::MatrixXd::Zero(2 * n_terms, 2 * n_terms);

  for (std::size_t l = 0; l < n_terms; ++l) {
    const auto& term = exp.terms[l];
    // Split b into u^2 + v^2 = b with (a/2)(u^2 - v^2) = -q c, which makes
    // the block kernel come out as exp(-a t / 2)(b cos qt + c sin qt).
    const double shift = term.q * term.c / term.a;
    const double u2 = std::max(0.5 * term.b - shift, 0.0);
    const double v2 = std::max(0.5 * term.b + shift, 0.0);
    const double beta =
        0.5 * std::sqrt(4.0 * term.q * term.q + term.a * term.a);
    const auto i = static_cast<Eigen::Index>(2 * l);
    sys.a_sp(i) = -std::sqrt(u2);
    sys.a_sp(i + 1) = -std::sqrt(v2);
    sys.a_ss(i, i) = term.a;
    sys.a_ss(i, i + 1) = beta;
    sys.a_ss(i + 1, i) = -beta;
    // Fluctuation-dissipation: B_s B_s^T = kbt (A_ss + A_ss^T), and the
    // symmetric part of each block is diag(2a, 0).
    sys.b_s(i, i) = std::sqrt(2.0 * kbt * term.a);
  }
  return sys;
}

CorrelationSeries matrix_kernel(const ExtendedSystem& sys, const TimeGrid& grid,
                                double t_offset) {
  sys.validate();
  grid.validate();
  const auto n_terms = sys.n_terms();
  std::vector<double> values(grid.n_t, 0.0);
  for (std::size_t l = 0; l < n_terms; ++l) {
    const auto i = static_cast<Eigen::Index>(2 * l);
    const Eigen::Matrix2d block = sys.a_ss.block<2, 2>(i, i);
    const Eigen::Vector2d s = sys.a_sp.segment<2>(i);
    for (std::size_t k = 0; k < grid.n_t; ++k) {
      const double t = t_offset + grid.time(k);
      const Eigen::Matrix2d propagated = (-t * block).exp();
      values[k] += s.dot(propagated * s);
    }
  }
  return make_series(grid, SeriesKind::kernel, std::move(values), t_offset);
}

namespace {

// Unconstrained parameterization of one term: a = kMinRate + e^u, b = e^v,
// q = kMinRate + e^w, c = (a b / (2 q)) tanh(s). The amplitude constraint
// holds by construction for any real (u, v, w, s).
struct TermParams {
  double u, v, w, s;
};

OscillatorTerm decode_term(const TermParams& p) {
  OscillatorTerm term;
  term.a = kMinRate + std::exp(p.u);
  term.b = std::exp(p.v);
  term.q = kMinRate + std::exp(p.w);
  term.c = term.a * term.b / (2.0 * term.q) * std::tanh(p.s);
  return term;
}

TermParams encode_term(const OscillatorTerm& term) {
  TermParams p;
  p.u = std::log(std::max(term.a - kMinRate, 1e-12));
  p.v = std::log(std::max(term.b, 1e-12));
  p.w = std::log(std::max(term.q - kMinRate, 1e-12));
  const double bound = term.a * term.b / (2.0 * term.q);
  double ratio = bound > 0.0 ? term.c / bound : 0.0;
  ratio = std::clamp(ratio, -1.0 + 1e-9, 1.0 - 1e-9);
  p.s = std::atanh(ratio);
  return p;
}

struct ExpansionResidual {
  using Scalar = double;
  enum {
    InputsAtCompileTime = Eigen::Dynamic,
    ValuesAtCompileTime = Eigen::Dynamic
  };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const std::vector<double>& times;
  const std::vector<double>& target;
  int n_terms;

  int inputs() const { return 4 * n_terms; }
  int values() const { return static_cast<int>(times.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double t = times[i];
      double model = 0.0;
      for (int l = 0; l < n_terms; ++l) {
        const TermParams p{x(4 * l), x(4 * l + 1), x(4 * l + 2), x(4 * l + 3)};
        model += term_value(decode_term(p), t);
      }
      fvec(static_cast<Eigen::Index>(i)) = model - target[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& fjac) const {
    for (int l = 0; l < n_terms; ++l) {
      const TermParams p{x(4 * l), x(4 * l + 1), x(4 * l + 2), x(4 * l + 3)};
      const OscillatorTerm term = decode_term(p);
      const double tanh_s = std::tanh(p.s);
      const double sech2_s = 1.0 - tanh_s * tanh_s;
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const double damp = std::exp(-0.5 * term.a * t);
        const double cos_qt = std::cos(term.q * t);
        const double sin_qt = std::sin(term.q * t);
        const double value =
            damp * (term.b * cos_qt + term.c * sin_qt);
        const double dc_da = term.b / (2.0 * term.q) * tanh_s;
        const double dc_db = term.a / (2.0 * term.q) * tanh_s;
        const double dc_dq =
            -term.a * term.b / (2.0 * term.q * term.q) * tanh_s;
        const double dc_ds = term.a * term.b / (2.0 * term.q) * sech2_s;
        const double dk_da = -0.5 * t * value + damp * sin_qt * dc_da;
        const double dk_db = damp * (cos_qt + sin_qt * dc_db);
        const double dk_dq =
            damp * t * (-term.b * sin_qt + term.c * cos_qt) +
            damp * sin_qt * dc_dq;
        const double dk_ds = damp * sin_qt * dc_ds;
        const auto row = static_cast<Eigen::Index>(i);
        fjac(row, 4 * l) = dk_da * (term.a - kMinRate);
        fjac(row, 4 * l + 1) = dk_db * term.b;
        fjac(row, 4 * l + 2) = dk_dq * (term.q - kMinRate);
        fjac(row, 4 * l + 3) = dk_ds;
      }
    }
    return 0;
  }
};

// Least-squares amplitudes (b_l, c_l) for fixed rates and frequencies,
// projected back into the feasible region. Gives every start a strong,
// cheap initialization.
void refit_amplitudes(const std::vector<double>& times,
                      const std::vector<double>& target,
                      std::vector<OscillatorTerm>& terms) {
  const auto n = static_cast<Eigen::Index>(times.size());
  const auto m = static_cast<Eigen::Index>(terms.size());
  Eigen::MatrixXd design(n, 2 * m);
  for (Eigen::Index l = 0; l < m; ++l) {
    const auto& term = terms[static_cast<std::size_t>(l)];
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = times[static_cast<std::size_t>(i)];
      const double damp = std::exp(-0.5 * term.a * t);
      design(i, 2 * l) = damp * std::cos(term.q * t);
      design(i, 2 * l + 1) = damp * std::sin(term.q * t);
    }
  }
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i)
    rhs(i) = target[static_cast<std::size_t>(i)];
  const Eigen::VectorXd amps =
      design.colPivHouseholderQr().solve(rhs);
  for (Eigen::Index l = 0; l < m; ++l) {
    auto& term = terms[static_cast<std::size_t>(l)];
    term.b = std::max(std::abs(amps(2 * l)), 1e-8);
    const double bound = term.a * term.b / (2.0 * term.q);
    term.c = std::clamp(amps(2 * l + 1), -0.95 * bound, 0.95 * bound);
  }
}

// Coarse spectral scan used to seed frequencies: magnitude of the windowed
// Fourier transform of the kernel on a fixed frequency grid.
std::vector<double> seed_frequencies(const std::vector<double>& times,
                                     const std::vector<double>& values,
                                     std::size_t n_wanted, double dt) {
  const std::size_t n_scan = 512;
  const double omega_max = 0.8 * std::numbers::pi / dt;
  std::vector<double> magnitude(n_scan);
  for (std::size_t m = 0; m < n_scan; ++m) {
    const double omega =
        omega_max * static_cast<double>(m) / static_cast<double>(n_scan - 1);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < times.size(); ++i)
      acc += values[i] * std::exp(std::complex<double>(0.0, -omega * times[i]));
    magnitude[m] = std::abs(acc);
  }
  std::vector<std::size_t> peaks;
  for (std::size_t m = 0; m < n_scan; ++m) {
    const bool left_ok = m == 0 || magnitude[m] >= magnitude[m - 1];
    const bool right_ok = m + 1 == n_scan || magnitude[m] > magnitude[m + 1];
    if (left_ok && right_ok) peaks.push_back(m);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](std::size_t a, std::size_t b) {
                     return magnitude[a] > magnitude[b];
                   });
  std::vector<double> freqs;
  for (std::size_t idx : peaks) {
    if (freqs.size() == n_wanted) break;
    const double omega =
        omega_max * static_cast<double>(idx) / static_cast<double>(n_scan - 1);
    freqs.push_back(std::max(omega, kMinRate));
  }
  // Pad with a geometric spread when the scan found too few distinct peaks.
  double pad = freqs.empty() ? 1.0 : freqs.front() + 1.0;
  while (freqs.size() < n_wanted) {
    freqs.push_back(pad);
    pad *= 1.7;
  }
  std::sort(freqs.begin(), freqs.end());
  return freqs;
}

double relative_residual(const ExpansionResidual& residual,
                         const Eigen::VectorXd& x, double target_norm) {
  Eigen::VectorXd fvec(residual.values());
  residual(x, fvec);
  return fvec.norm() / target_norm;
}

}  // namespace

FitResult fit_expansion(const CorrelationSeries& kernel, std::size_t n_terms,
                        const FitConfig& config) {
  kernel.validate();
  if (n_terms < 1 || n_terms > 16)
    throw ValidationError("fit requires between 1 and 16 oscillator terms");
  if (kernel.size() < 8 * n_terms)
    throw ValidationError("fit needs at least 8 samples per oscillator term");
  if (config.n_starts < 1)
    throw ValidationError("fit requires at least one start");

  std::vector<double> times(kernel.size());
  for (std::size_t i = 0; i < kernel.size(); ++i) times[i] = kernel.time(i);
  const std::vector<double>& target = kernel.values;

  double target_norm = 0.0;
  for (double v : target) target_norm += v * v;
  target_norm = std::sqrt(target_norm);
  if (!(target_norm > 0.0))
    throw ValidationError("cannot fit an identically zero kernel");

  // A decay-rate scale from the first moment of |K|: tau = int t|K| / int |K|.
  const auto weights = trapezoid_weights(kernel.grid);
  double mass0 = 0.0;
  double mass1 = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    mass0 += weights[i] * std::abs(target[i]);
    mass1 += weights[i] * times[i] * std::abs(target[i]);
  }
  const double tau = mass0 > 0.0 ? std::max(mass1 / mass0, 1e-6) : 1.0;
  const double a_scale = std::clamp(2.0 / tau, 1e-3, 1e3);

  const std::vector<double> base_freqs =
      seed_frequencies(times, target, n_terms, kernel.grid.dt);

  const ExpansionResidual residual{times, target, static_cast<int>(n_terms)};

  double best_res = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;

  for (int start = 0; start < config.n_starts; ++start) {
    std::vector<OscillatorTerm> seed_terms(n_terms);
    if (start == 0 && config.warm_start != nullptr) {
      const auto& warm = config.warm_start->terms;
      for (std::size_t l = 0; l < n_terms; ++l) {
        if (l < warm.size()) {
          seed_terms[l] = warm[l];
        } else {
          seed_terms[l] = {a_scale, 1e-8, 0.0, base_freqs[l]};
        }
      }
    } else {
      CounterRng rng(config.seed, static_cast<std::uint64_t>(start));
      for (std::size_t l = 0; l < n_terms; ++l) {
        seed_terms[l].q = base_freqs[l];
        seed_terms[l].a = a_scale;
        seed_terms[l].c = 0.0;
        seed_terms[l].b = 1.0;
        if (start > 0) {
          seed_terms[l].a *= std::exp(0.5 * rng.normal());
          seed_terms[l].q *= std::exp(0.3 * rng.normal());
          seed_terms[l].q = std::max(seed_terms[l].q, kMinRate * 2.0);
        }
      }
      refit_amplitudes(times, target, seed_terms);
    }

    Eigen::VectorXd x(4 * n_terms);
    for (std::size_t l = 0; l < n_terms; ++l) {
      const TermParams p = encode_term(seed_terms[l]);
      x(static_cast<Eigen::Index>(4 * l)) = p.u;
      x(static_cast<Eigen::Index>(4 * l + 1)) = p.v;
      x(static_cast<Eigen::Index>(4 * l + 2)) = p.w;
      x(static_cast<Eigen::Index>(4 * l + 3)) = p.s;
    }

    ExpansionResidual functor = residual;
    Eigen::LevenbergMarquardt<ExpansionResidual> lm(functor);
    lm.parameters.maxfev = std::max(200, config.max_iterations) * 4;
    lm.parameters.xtol = 1e-14;
    lm.parameters.ftol = 1e-14;
    lm.minimize(x);

    if (!x.allFinite()) continue;
    const double res = relative_residual(residual, x, target_norm);
    if (std::isfinite(res) && res < best_res) {
      best_res = res;
      best_x = x;
    }
  }

  if (!std::isfinite(best_res))
    throw NumericError("oscillator fit diverged on every start");
  if (best_res > config.residual_ceiling)
    throw NumericError("oscillator fit residual " + std::to_string(best_res) +
                       " exceeds the configured ceiling");

  FitResult result;
  result.rel_residual = best_res;
  result.expansion.terms.resize(n_terms);
  for (std::size_t l = 0; l < n_terms; ++l) {
    const TermParams p{best_x(static_cast<Eigen::Index>(4 * l)),
                       best_x(static_cast<Eigen::Index>(4 * l + 1)),
                       best_x(static_cast<Eigen::Index>(4 * l + 2)),
                       best_x(static_cast<Eigen::Index>(4 * l + 3))};
    result.expansion.terms[l] = decode_term(p);
  }
  std::stable_sort(result.expansion.terms.begin(),
                   result.expansion.terms.end(),
                   [](const OscillatorTerm& lhs, const OscillatorTerm& rhs) {
                     return lhs.q < rhs.q;
                   });
  result.expansion.validate();
  return result;
}

}  // namespace glekit
