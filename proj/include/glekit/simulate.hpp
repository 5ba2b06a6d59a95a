#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "glekit/correlation.hpp"
#include "glekit/oscfit.hpp"
#include "glekit/types.hpp"

namespace glekit {

enum class Scheme { implicit_vv, exact_ou };

struct SimConfig {
  double dt = 0.0;  // 0 picks the stability default (1/20) / max(a_l, q_l)
  std::size_t n_steps = 0;
  std::size_t record_every = 1;
  std::size_t n_particles = 1;
  std::size_t dim = 1;
  Scheme scheme = Scheme::implicit_vv;
  std::uint64_t seed = 0;

  void validate() const;
};

double default_time_step(const ExtendedSystem& sys,
                         const OscillatorExpansion& exp);

// Scaled states z = (P / sqrt(M), S) of independent particles, one block of
// length 2N + 1 per (particle, axis). The RNG state is the (seed, step)
// pair: every particle draws from its own counter-based stream.
struct EnsembleState {
  std::size_t n_particles = 0;
  std::size_t dim = 1;
  std::size_t block = 1;  // 2N + 1
  std::uint64_t master_seed = 0;
  std::uint32_t step_index = 0;
  double time = 0.0;
  Eigen::MatrixXd z;  // block x (n_particles * dim), column-major blocks

  Eigen::Index column(std::size_t particle, std::size_t axis) const {
    return static_cast<Eigen::Index>(particle * dim + axis);
  }
  double momentum(const ExtendedSystem& sys, std::size_t particle,
                  std::size_t axis) const;
  void set_momentum(const ExtendedSystem& sys, std::size_t particle,
                    std::size_t axis, double p);
};

// Stationary (Gibbs) initialization: every scaled component ~ N(0, kbt).
EnsembleState init_ensemble(const ExtendedSystem& sys, std::size_t n_particles,
                            std::size_t dim, std::uint64_t seed);

// Trapezoidal (Cayley) discretization of the linear SDE,
//   (I + dt/2 A) z' = (I - dt/2 A) z + B (eta1 + eta2) sqrt(dt/2),
// drift-implicit and noise-symmetric. It preserves the Gibbs covariance
// kbt I exactly for every stable dt and has O(dt^2) weak error.
class ImplicitVvStepper {
 public:
  ImplicitVvStepper(const ExtendedSystem& sys, double dt);
  void step(EnsembleState& state) const;
  const Eigen::MatrixXd& propagator() const { return propagator_; }

 private:
  Eigen::MatrixXd propagator_;
  Eigen::MatrixXd noise_map_;  // (I + dt/2 A)^{-1} B sqrt(dt/2), active cols
  std::vector<Eigen::Index> noise_channels_;
  double dt_;
};

// Reference integrator: exact one-step distribution of the OU process via
// the matrix exponential and the discrete Lyapunov increment.
class ExactOuStepper {
 public:
  ExactOuStepper(const ExtendedSystem& sys, double dt);
  void step(EnsembleState& state) const;
  const Eigen::MatrixXd& propagator() const { return propagator_; }

 private:
  Eigen::MatrixXd propagator_;  // expm(-dt A)
  Eigen::MatrixXd noise_factor_;
  double dt_;
};

// One-shot forms of the two schemes.
void step_implicit_vv(const ExtendedSystem& sys, EnsembleState& state,
                      double dt);
void step_exact_ou(const ExtendedSystem& sys, EnsembleState& state, double dt);

// Evolves an equilibrium ensemble and records momenta plus positions
// (midpoint-integrated velocity) every record_every steps, frame 0 included.
CgTrajectory simulate_ensemble(const ExtendedSystem& sys,
                               const SimConfig& config);

// Closed-form equilibrium VACF of the extended system,
// C(t) = dim (kbt / M) [expm(-t A_hat)]_{00}, and its time derivative.
CorrelationSeries analytic_vacf(const ExtendedSystem& sys, const TimeGrid& grid,
                                std::size_t dim = 1);
CorrelationSeries analytic_fvcf(const ExtendedSystem& sys, const TimeGrid& grid,
                                std::size_t dim = 1);

}  // namespace glekit
