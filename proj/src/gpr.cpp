#include "glekit/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "detail/lbfgs.hpp"
#include "glekit/rng.hpp"

namespace glekit {

namespace {

constexpr double kJitterCeiling = 1e-6;

void check_xy(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() == 0 || x.cols() == 0)
    throw ValidationError("GPR needs a non-empty training set");
  if (x.rows() != y.size())
    throw ValidationError("GPR inputs and outputs disagree in length");
  if (!x.allFinite() || !y.allFinite())
    throw ValidationError("GPR training data contains non-finite values");
}

void check_hp(const Eigen::MatrixXd& x, const GprHyperparameters& hp) {
  if (!(hp.theta_f > 0.0))
    throw ValidationError("theta_f must be positive");
  if (hp.theta_l.size() != x.cols())
    throw ValidationError("need one inverse length scale per input axis");
  if ((hp.theta_l.array() <= 0.0).any())
    throw ValidationError("inverse length scales must be positive");
  if (!(hp.sigma2 >= 0.0))
    throw ValidationError("noise variance must be >= 0");
}

// Squared per-axis differences D_k(i, j) = (x_ik - x_jk)^2.
std::vector<Eigen::MatrixXd> axis_square_diffs(const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> d;
  d.reserve(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const Eigen::VectorXd col = x.col(k);
    Eigen::MatrixXd diff = col.replicate(1, x.rows());
    diff -= col.transpose().replicate(x.rows(), 1);
    d.push_back(diff.cwiseProduct(diff));
  }
  return d;
}

Eigen::MatrixXd covariance_from_diffs(const std::vector<Eigen::MatrixXd>& d,
                                      double theta_f,
                                      const Eigen::VectorXd& theta_l) {
  Eigen::MatrixXd expo = Eigen::MatrixXd::Zero(d[0].rows(), d[0].cols());
  for (std::size_t k = 0; k < d.size(); ++k)
    expo -= 0.5 * theta_l(static_cast<Eigen::Index>(k)) *
            theta_l(static_cast<Eigen::Index>(k)) * d[k];
  return theta_f * theta_f * expo.array().exp().matrix();
}

// Cholesky with escalating jitter from the floor up to the ceiling.
// Returns the jitter that succeeded.
double robust_llt(const Eigen::MatrixXd& c, double floor,
                  Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(c);
  if (llt.info() == Eigen::Success) return 0.0;
  const auto n = c.rows();
  for (double jitter = floor; jitter <= kJitterCeiling * 1.0000001;
       jitter *= 10.0) {
    llt.compute(c + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return jitter;
  }
  throw NumericError(
      "covariance factorization failed even at the jitter ceiling");
}

}  // namespace

void GprConfig::validate() const {
  if (restarts < 1) throw ValidationError("GPR needs at least one restart");
  if (max_iters < 1) throw ValidationError("max_iters must be positive");
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (!(log_box > 0.0)) throw ValidationError("log box must be positive");
  if (!(sigma2_floor > 0.0))
    throw ValidationError("sigma2 floor must be positive");
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                           double theta_f, const Eigen::VectorXd& theta_l) {
  if (xa.cols() != xb.cols())
    throw ValidationError("covariance inputs disagree in dimension");
  if (theta_l.size() != xa.cols())
    throw ValidationError("need one inverse length scale per input axis");
  Eigen::MatrixXd expo = Eigen::MatrixXd::Zero(xa.rows(), xb.rows());
  for (Eigen::Index k = 0; k < xa.cols(); ++k) {
    Eigen::MatrixXd diff = xa.col(k).replicate(1, xb.rows());
    diff -= xb.col(k).transpose().replicate(xa.rows(), 1);
    expo -= 0.5 * theta_l(k) * theta_l(k) * diff.cwiseProduct(diff);
  }
  return theta_f * theta_f * expo.array().exp().matrix();
}

double nlml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
            const GprHyperparameters& hp) {
  // Share one code path with the gradient form; the O(n^3) solve dominates
  // either way at the sizes this library trains.
  Eigen::VectorXd grad;
  return nlml_with_gradient(x, y, hp, grad);
}

double nlml_with_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const GprHyperparameters& hp, Eigen::VectorXd& grad) {
  check_xy(x, y);
  check_hp(x, hp);
  const auto n = x.rows();
  const auto d = x.cols();

  const std::vector<Eigen::MatrixXd> diffs = axis_square_diffs(x);
  const Eigen::MatrixXd sigma =
      covariance_from_diffs(diffs, hp.theta_f, hp.theta_l);
  const Eigen::MatrixXd c =
      sigma + hp.sigma2 * Eigen::MatrixXd::Identity(n, n);

  Eigen::LLT<Eigen::MatrixXd> llt;
  robust_llt(c, 1e-10, llt);

  const Eigen::VectorXd alpha = llt.solve(y);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    log_det += std::log(llt.matrixLLT()(i, i));
  const double value = 0.5 * y.dot(alpha) + log_det +
                       0.5 * static_cast<double>(n) *
                           std::log(2.0 * std::numbers::pi);

  // A = C^{-1} - alpha alpha^T enters every directional derivative
  // d NLML = 1/2 tr(A dC).
  const Eigen::MatrixXd w =
      llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd a = w - alpha * alpha.transpose();

  grad.resize(d + 2);
  grad(0) = a.cwiseProduct(sigma).sum();  // d/dlog theta_f: dC = 2 Sigma
  for (Eigen::Index k = 0; k < d; ++k)
    grad(1 + k) = -0.5 * hp.theta_l(k) * hp.theta_l(k) *
                  a.cwiseProduct(sigma.cwiseProduct(diffs[static_cast<std::size_t>(k)])).sum();
  grad(d + 1) = 0.5 * hp.sigma2 * a.trace();
  return value;
}

GprHyperparameters GprModel::raw_hyperparameters() const {
  GprHyperparameters raw;
  raw.theta_f = hp_.theta_f * y_scale_;
  raw.sigma2 = hp_.sigma2 * y_scale_ * y_scale_;
  raw.theta_l = hp_.theta_l.cwiseQuotient(x_scale_);
  return raw;
}

void GprModel::factorize() {
  const std::vector<Eigen::MatrixXd> diffs = axis_square_diffs(xs_);
  const Eigen::MatrixXd sigma =
      covariance_from_diffs(diffs, hp_.theta_f, hp_.theta_l);
  const Eigen::MatrixXd c =
      sigma + hp_.sigma2 * Eigen::MatrixXd::Identity(xs_.rows(), xs_.rows());
  jitter_ = robust_llt(c, 1e-10, llt_);
  alpha_ = llt_.solve(ys_);
}

namespace {

struct Standardization {
  Eigen::VectorXd x_mean, x_scale;
  double y_mean, y_scale;
};

Standardization standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            Eigen::MatrixXd& xs, Eigen::VectorXd& ys) {
  Standardization s;
  s.x_mean = x.colwise().mean();
  s.x_scale.resize(x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double var =
        (x.col(k).array() - s.x_mean(k)).square().sum() /
        static_cast<double>(x.rows());
    s.x_scale(k) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  s.y_mean = y.mean();
  const double y_var =
      (y.array() - s.y_mean).square().sum() / static_cast<double>(y.size());
  s.y_scale = y_var > 0.0 ? std::sqrt(y_var) : 1.0;

  xs = x;
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    xs.col(k) = (x.col(k).array() - s.x_mean(k)) / s.x_scale(k);
  ys = (y.array() - s.y_mean) / s.y_scale;
  return s;
}

}  // namespace

GprModel GprModel::from_hyperparameters(const Eigen::MatrixXd& x,
                                        const Eigen::VectorXd& y,
                                        const GprHyperparameters& raw) {
  check_xy(x, y);
  check_hp(x, raw);
  GprModel m;
  m.x_ = x;
  m.y_ = y;
  const Standardization s = standardize(x, y, m.xs_, m.ys_);
  m.x_mean_ = s.x_mean;
  m.x_scale_ = s.x_scale;
  m.y_mean_ = s.y_mean;
  m.y_scale_ = s.y_scale;
  m.hp_.theta_f = raw.theta_f / s.y_scale;
  m.hp_.sigma2 = std::max(raw.sigma2 / (s.y_scale * s.y_scale), 1e-10);
  m.hp_.theta_l = raw.theta_l.cwiseProduct(s.x_scale);
  m.factorize();
  m.nlml_ = nlml(m.xs_, m.ys_, m.hp_);
  return m;
}

GprModel GprModel::restore(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& x_mean,
                           const Eigen::VectorXd& x_scale, double y_mean,
                           double y_scale,
                           const GprHyperparameters& standardized) {
  check_xy(x, y);
  GprModel m;
  m.x_ = x;
  m.y_ = y;
  m.x_mean_ = x_mean;
  m.x_scale_ = x_scale;
  m.y_mean_ = y_mean;
  m.y_scale_ = y_scale;
  m.xs_ = x;
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    m.xs_.col(k) = (x.col(k).array() - x_mean(k)) / x_scale(k);
  m.ys_ = (y.array() - y_mean) / y_scale;
  m.hp_ = standardized;
  check_hp(m.xs_, m.hp_);
  m.factorize();
  m.nlml_ = nlml(m.xs_, m.ys_, m.hp_);
  return m;
}

GprModel GprModel::train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const GprConfig& config) {
  check_xy(x, y);
  config.validate();
  const auto d = x.cols();

  GprModel m;
  m.x_ = x;
  m.y_ = y;
  const Standardization s = standardize(x, y, m.xs_, m.ys_);
  m.x_mean_ = s.x_mean;
  m.x_scale_ = s.x_scale;
  m.y_mean_ = s.y_mean;
  m.y_scale_ = s.y_scale;

  const Eigen::Index n_params = d + 2;
  Eigen::VectorXd lower(n_params), upper(n_params);
  lower.head(d + 1).setConstant(-config.log_box);
  upper.head(d + 1).setConstant(config.log_box);
  lower(d + 1) = std::log(config.sigma2_floor);
  upper(d + 1) = config.log_box;

  // Per-axis resolution cap. A length scale shorter than the smallest gap
  // between distinct standardized coordinates cannot be identified from the
  // data: neighbouring rows decorrelate and the NLML develops spurious
  // 'island' optima that reproduce the training rows but revert to the mean
  // everywhere else. Capping the inverse length scale at pi / gap keeps the
  // optimizer inside the identifiable regime; on densely sampled axes the
  // cap is far above any reasonable optimum and never binds.
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::VectorXd col = m.xs_.col(c);
    std::sort(col.data(), col.data() + col.size());
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < col.size(); ++i) {
      const double diff = col(i) - col(i - 1);
      if (diff > 0.0) gap = std::min(gap, diff);
    }
    if (std::isfinite(gap))
      upper(1 + c) =
          std::min(upper(1 + c), std::log(std::numbers::pi / gap));
  }

  auto unpack = [&](const Eigen::VectorXd& p) {
    GprHyperparameters hp;
    hp.theta_f = std::exp(p(0));
    hp.theta_l = p.segment(1, d).array().exp();
    hp.sigma2 = std::exp(p(d + 1));
    return hp;
  };
  auto objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd& grad) {
    try {
      return nlml_with_gradient(m.xs_, m.ys_, unpack(p), grad);
    } catch (const NumericError&) {
      grad.setZero(p.size());
      return std::numeric_limits<double>::infinity();
    }
  };

  // Restart 0 starts from the unit-scale heuristic and restart 1 from a
  // deliberately smooth one (long length scales); the smooth start gives the
  // optimizer a reliable path into coupled optima on smooth responses, where
  // a unit start can harden individual length scales too early. Remaining
  // restarts stratify each initialization range into bands with a
  // deterministic uniform offset inside the band.
  const int deterministic = std::min(config.restarts, 2);
  const int extra = config.restarts - deterministic;

  double best_f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p;
  for (int restart = 0; restart < config.restarts; ++restart) {
    Eigen::VectorXd p0(n_params);
    if (restart == 0) {
      p0.setZero();
      p0(d + 1) = -6.0;
    } else if (restart == 1) {
      p0.setZero();
      p0.segment(1, d).setConstant(-2.0);
      p0(d + 1) = -6.0;
    } else {
      for (Eigen::Index c = 0; c < n_params; ++c) {
        std::pair<double, double> range = config.init_log_theta_l;
        if (c == 0) range = config.init_log_theta_f;
        if (c == d + 1) range = config.init_log_sigma2;
        CounterRng rng(config.seed,
                       static_cast<std::uint64_t>(restart) * 1009u +
                           static_cast<std::uint64_t>(c));
        const double u =
            (static_cast<double>(restart - deterministic) + rng.uniform()) /
            static_cast<double>(std::max(extra, 1));
        p0(c) = range.first + (range.second - range.first) * u;
      }
    }
    p0 = p0.cwiseMax(lower).cwiseMin(upper);

    detail::LbfgsOptions opts;
    opts.max_iters = config.max_iters;
    opts.f_tol = config.tol;
    const detail::LbfgsResult run =
        detail::lbfgs_minimize(objective, p0, lower, upper, opts);
    if (std::isfinite(run.f) && run.f < best_f) {
      best_f = run.f;
      best_p = run.x;
    }
  }

  if (!std::isfinite(best_f))
    throw NumericError(
        "GPR training failed: no restart produced a finite likelihood");

  m.hp_ = unpack(best_p);
  m.nlml_ = best_f;
  m.factorize();
  return m;
}

GprPrediction GprModel::predict(const Eigen::MatrixXd& x_star) const {
  if (x_star.cols() != x_.cols())
    throw ValidationError("prediction inputs disagree in dimension");
  if (!x_star.allFinite())
    throw ValidationError("prediction inputs contain non-finite values");

  Eigen::MatrixXd xs_star = x_star;
  for (Eigen::Index k = 0; k < x_star.cols(); ++k)
    xs_star.col(k) = (x_star.col(k).array() - x_mean_(k)) / x_scale_(k);

  const Eigen::MatrixXd k_star =
      covariance(xs_star, xs_, hp_.theta_f, hp_.theta_l);

  GprPrediction out;
  out.mean = (k_star * alpha_).array() * y_scale_ + y_mean_;

  const Eigen::MatrixXd v = llt_.matrixL().solve(k_star.transpose());
  out.std.resize(x_star.rows());
  for (Eigen::Index i = 0; i < x_star.rows(); ++i) {
    const double var =
        std::max(hp_.theta_f * hp_.theta_f - v.col(i).squaredNorm(), 0.0);
    out.std(i) = std::sqrt(var) * y_scale_;
  }
  return out;
}

}  // namespace glekit
