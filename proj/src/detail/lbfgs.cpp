#include "detail/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace glekit::detail {

namespace {

Eigen::VectorXd clamp_box(Eigen::VectorXd x, const Eigen::VectorXd& lower,
                          const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Gradient with box-active components zeroed, so termination tests ignore
// directions that push against an active bound.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& g,
                                   const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper) {
  Eigen::VectorXd pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) <= lower(i) && g(i) > 0.0) pg(i) = 0.0;
    if (x(i) >= upper(i) && g(i) < 0.0) pg(i) = 0.0;
  }
  return pg;
}

}  // namespace

LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
    Eigen::VectorXd x0, const Eigen::VectorXd& lower,
    const Eigen::VectorXd& upper, const LbfgsOptions& options) {
  const auto n = x0.size();
  LbfgsResult result;
  result.x = clamp_box(std::move(x0), lower, upper);

  Eigen::VectorXd g(n);
  double f = fg(result.x, g);
  if (!std::isfinite(f)) {
    result.f = std::numeric_limits<double>::infinity();
    return result;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const Eigen::VectorXd pg = projected_gradient(result.x, g, lower, upper);
    if (pg.lpNorm<Eigen::Infinity>() <=
        options.g_tol * std::max(1.0, std::abs(f))) {
      result.converged = true;
      break;
    }

    // Two-loop recursion on the projected gradient.
    Eigen::VectorXd d = -pg;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const auto& s = s_hist.back();
      const auto& y = y_hist.back();
      d *= s.dot(y) / y.squaredNorm();
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    if (d.dot(pg) >= 0.0) d = -pg;  // not a descent direction: restart

    // Projected backtracking Armijo search.
    double step = 1.0;
    const double slope = g.dot(d);
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    Eigen::VectorXd g_new(n);
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = clamp_box(result.x + step * d, lower, upper);
      f_new = fg(x_new, g_new);
      const double decrease = 1e-4 * step * slope;
      if (std::isfinite(f_new) && f_new <= f + decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = x_new - result.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double improvement = f - f_new;
    result.x = std::move(x_new);
    f = f_new;
    g = g_new;
    result.iterations = iter + 1;
    if (improvement <= options.f_tol * std::max(1.0, std::abs(f))) {
      result.converged = true;
      break;
    }
  }

  result.f = f;
  return result;
}

}  // namespace glekit::detail
