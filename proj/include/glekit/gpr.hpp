#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "glekit/types.hpp"

namespace glekit {

// Hyperparameters of the ARD squared-exponential covariance
//   k(x, x') = theta_f^2 exp(-1/2 sum_k theta_{l,k}^2 (x_k - x'_k)^2),
// where theta_{l,k} are inverse length scales.
struct GprHyperparameters {
  double theta_f = 1.0;
  Eigen::VectorXd theta_l;
  double sigma2 = 1e-6;  // observation noise variance
};

struct GprConfig {
  int restarts = 8;
  int max_iters = 200;
  double tol = 1e-8;  // relative NLML convergence of the optimizer
  std::uint64_t seed = 0;
  // Box for log theta_f and log theta_l during training; log sigma2 is
  // bounded below by the jitter floor instead.
  double log_box = 10.0;
  double sigma2_floor = 1e-10;  // standardized units
  // Stratified initialization ranges for the log-hyperparameters.
  std::pair<double, double> init_log_theta_f{-1.0, 1.0};
  std::pair<double, double> init_log_theta_l{-2.0, 2.0};
  std::pair<double, double> init_log_sigma2{-14.0, -2.0};

  void validate() const;
};

Eigen::MatrixXd covariance(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                           double theta_f, const Eigen::VectorXd& theta_l);

// Negative log marginal likelihood of zero-mean data under the SE kernel,
// plus its gradient with respect to (log theta_f, log theta_l, log sigma2).
// Inputs are used as given; train() applies these to standardized data.
double nlml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
            const GprHyperparameters& hp);
double nlml_with_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const GprHyperparameters& hp, Eigen::VectorXd& grad);

struct GprPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // posterior standard deviation (no noise added)
};

// Gaussian process regressor with mandatory input/output standardization.
// Hyperparameters at the public boundary are always in raw data units;
// standardized equivalents live inside the model.
class GprModel {
 public:
  // An empty model; only meaningful once assigned from train(),
  // from_hyperparameters() or restore().
  GprModel() = default;

  static GprModel train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const GprConfig& config = {});
  // Builds a model from fixed raw-unit hyperparameters without optimizing.
  static GprModel from_hyperparameters(const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& y,
                                       const GprHyperparameters& raw);

  GprPrediction predict(const Eigen::MatrixXd& x_star) const;

  std::size_t input_dim() const { return static_cast<std::size_t>(x_mean_.size()); }
  std::size_t n_training() const { return static_cast<std::size_t>(x_.rows()); }
  const Eigen::MatrixXd& training_inputs() const { return x_; }
  const Eigen::VectorXd& training_outputs() const { return y_; }

  GprHyperparameters raw_hyperparameters() const;
  const GprHyperparameters& standardized_hyperparameters() const { return hp_; }
  double trained_nlml() const { return nlml_; }
  double jitter() const { return jitter_; }

  const Eigen::VectorXd& x_mean() const { return x_mean_; }
  const Eigen::VectorXd& x_scale() const { return x_scale_; }
  double y_mean() const { return y_mean_; }
  double y_scale() const { return y_scale_; }

  // Reassembles a model from serialized pieces; factorization is rebuilt.
  static GprModel restore(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& x_mean,
                          const Eigen::VectorXd& x_scale, double y_mean,
                          double y_scale, const GprHyperparameters& standardized);

 private:
  void factorize();

  Eigen::MatrixXd x_;   // raw training inputs, one row per sample
  Eigen::VectorXd y_;   // raw training outputs
  Eigen::MatrixXd xs_;  // standardized inputs
  Eigen::VectorXd ys_;  // standardized outputs
  Eigen::VectorXd x_mean_, x_scale_;
  double y_mean_ = 0.0, y_scale_ = 1.0;
  GprHyperparameters hp_;  // standardized units
  double nlml_ = 0.0;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

}  // namespace glekit
