#include "glekit/simulate.hpp"

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "glekit/rng.hpp"

namespace glekit {

namespace {

// Noise draw purposes keep initialization and propagation streams disjoint.
constexpr std::uint32_t kPurposeInit = 0;
constexpr std::uint32_t kPurposeStep = 1;

std::uint64_t particle_key(std::uint64_t master_seed, std::size_t particle) {
  return philox::stream_key(master_seed, particle);
}

}  // namespace

void SimConfig::validate() const {
  if (dt < 0.0 || !std::isfinite(dt))
    throw ValidationError("simulation time step must be finite and >= 0");
  if (n_steps == 0) throw ValidationError("simulation needs at least one step");
  if (record_every == 0)
    throw ValidationError("record_every must be at least 1");
  if (n_steps % record_every != 0)
    throw ValidationError("record_every must divide the step count");
  if (dim == 0 || dim > 3)
    throw ValidationError("simulation dimension must be 1, 2 or 3");
}

double default_time_step(const ExtendedSystem& sys,
                         const OscillatorExpansion& exp) {
  (void)sys;
  double rate = 0.0;
  for (const auto& term : exp.terms)
    rate = std::max({rate, term.a, term.q});
  if (rate <= 0.0) return 0.05;
  return 0.05 / rate;
}

double EnsembleState::momentum(const ExtendedSystem& sys, std::size_t particle,
                               std::size_t axis) const {
  return z(0, column(particle, axis)) * std::sqrt(sys.mass);
}

void EnsembleState::set_momentum(const ExtendedSystem& sys,
                                 std::size_t particle, std::size_t axis,
                                 double p) {
  z(0, column(particle, axis)) = p / std::sqrt(sys.mass);
}

EnsembleState init_ensemble(const ExtendedSystem& sys, std::size_t n_particles,
                            std::size_t dim, std::uint64_t seed) {
  sys.validate();
  if (dim == 0 || dim > 3)
    throw ValidationError("ensemble dimension must be 1, 2 or 3");

  EnsembleState state;
  state.n_particles = n_particles;
  state.dim = dim;
  state.block = sys.dim();
  state.master_seed = seed;
  state.z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(state.block),
                                  static_cast<Eigen::Index>(n_particles * dim));

  const double scale = std::sqrt(sys.kbt);
  for (std::size_t p = 0; p < n_particles; ++p) {
    const std::uint64_t key = particle_key(seed, p);
    for (std::size_t a = 0; a < dim; ++a) {
      const auto col = state.column(p, a);
      for (std::size_t i = 0; i < state.block; i += 2) {
        const auto channel =
            static_cast<std::uint32_t>(a * state.block + i / 2);
        const NormalPair draw = normal_pair(key, 0, channel, kPurposeInit);
        state.z(static_cast<Eigen::Index>(i), col) = scale * draw.first;
        if (i + 1 < state.block)
          state.z(static_cast<Eigen::Index>(i + 1), col) = scale * draw.second;
      }
    }
  }
  return state;
}

ImplicitVvStepper::ImplicitVvStepper(const ExtendedSystem& sys, double dt)
    : dt_(dt) {
  sys.validate();
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ValidationError("time step must be positive");
  const Eigen::MatrixXd drift = sys.drift_scaled();
  const auto n = drift.rows();
  const Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(n, n) + 0.5 * dt * drift;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
  propagator_ = lu.solve(Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * drift);

  // Scaled noise B_hat = diag(0, B_s) / sqrt of nothing: in z coordinates the
  // noise enters only the auxiliary rows, one active column per term.
  Eigen::MatrixXd b_hat = Eigen::MatrixXd::Zero(n, n);
  b_hat.block(1, 1, n - 1, n - 1) = sys.b_s;
  for (Eigen::Index j = 0; j < n; ++j)
    if (b_hat.col(j).cwiseAbs().maxCoeff() > 0.0) noise_channels_.push_back(j);
  Eigen::MatrixXd active(n, static_cast<Eigen::Index>(noise_channels_.size()));
  for (std::size_t k = 0; k < noise_channels_.size(); ++k)
    active.col(static_cast<Eigen::Index>(k)) = b_hat.col(noise_channels_[k]);
  noise_map_ = lu.solve(active) * std::sqrt(0.5 * dt);
}

void ImplicitVvStepper::step(EnsembleState& state) const {
  const auto n_channels = static_cast<std::size_t>(noise_map_.cols());
  Eigen::VectorXd eta(static_cast<Eigen::Index>(n_channels));
  const std::uint32_t step = state.step_index + 1;
  for (std::size_t p = 0; p < state.n_particles; ++p) {
    const std::uint64_t key = particle_key(state.master_seed, p);
    for (std::size_t a = 0; a < state.dim; ++a) {
      for (std::size_t k = 0; k < n_channels; ++k) {
        const auto channel = static_cast<std::uint32_t>(a * n_channels + k);
        const NormalPair draw = normal_pair(key, step, channel, kPurposeStep);
        eta(static_cast<Eigen::Index>(k)) = draw.first + draw.second;
      }
      const auto col = state.column(p, a);
      state.z.col(col) = propagator_ * state.z.col(col) + noise_map_ * eta;
    }
  }
  state.step_index = step;
  state.time += dt_;
}

ExactOuStepper::ExactOuStepper(const ExtendedSystem& sys, double dt)
    : dt_(dt) {
  sys.validate();
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ValidationError("time step must be positive");
  const Eigen::MatrixXd drift = sys.drift_scaled();
  propagator_ = (-dt * drift).exp();

  // One-step noise covariance kbt (I - E E^T); factor through a symmetric
  // eigendecomposition so slightly indefinite roundoff can be clamped.
  const auto n = drift.rows();
  const Eigen::MatrixXd cov =
      sys.kbt * (Eigen::MatrixXd::Identity(n, n) -
                 propagator_ * propagator_.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double tol = 1e-10 * std::max(1.0, sys.kbt);
  if (es.eigenvalues().minCoeff() < -tol)
    throw NumericError("one-step noise covariance is not positive semidefinite");
  Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  noise_factor_ = es.eigenvectors() * roots.asDiagonal();
}

void ExactOuStepper::step(EnsembleState& state) const {
  const auto block = static_cast<std::size_t>(noise_factor_.cols());
  Eigen::VectorXd eta(static_cast<Eigen::Index>(block));
  const std::uint32_t step = state.step_index + 1;
  for (std::size_t p = 0; p < state.n_particles; ++p) {
    const std::uint64_t key = particle_key(state.master_seed, p);
    for (std::size_t a = 0; a < state.dim; ++a) {
      for (std::size_t i = 0; i < block; i += 2) {
        const auto channel = static_cast<std::uint32_t>(a * block + i / 2);
        const NormalPair draw = normal_pair(key, step, channel, kPurposeStep);
        eta(static_cast<Eigen::Index>(i)) = draw.first;
        if (i + 1 < block) eta(static_cast<Eigen::Index>(i + 1)) = draw.second;
      }
      const auto col = state.column(p, a);
      state.z.col(col) = propagator_ * state.z.col(col) + noise_factor_ * eta;
    }
  }
  state.step_index = step;
  state.time += dt_;
}

void step_implicit_vv(const ExtendedSystem& sys, EnsembleState& state,
                      double dt) {
  ImplicitVvStepper(sys, dt).step(state);
}

void step_exact_ou(const ExtendedSystem& sys, EnsembleState& state, double dt) {
  ExactOuStepper(sys, dt).step(state);
}

CgTrajectory simulate_ensemble(const ExtendedSystem& sys,
                               const SimConfig& config) {
  sys.validate();
  config.validate();
  const double dt = config.dt;
  if (!(dt > 0.0))
    throw ValidationError("simulate_ensemble needs an explicit positive dt");

  EnsembleState state =
      init_ensemble(sys, config.n_particles, config.dim, config.seed);

  CgTrajectory traj;
  traj.n_particles = config.n_particles;
  traj.dim = config.dim;
  traj.mass = sys.mass;
  traj.dt_record = dt * static_cast<double>(config.record_every);
  traj.n_frames = config.n_steps / config.record_every + 1;
  traj.positions.assign(traj.n_frames * traj.n_particles * traj.dim, 0.0);
  traj.momenta.assign(traj.positions.size(), 0.0);

  const double root_m = std::sqrt(sys.mass);
  std::vector<double> position(config.n_particles * config.dim, 0.0);
  std::vector<double> prev_velocity(position.size());

  auto velocity_of = [&](std::size_t p, std::size_t a) {
    return state.z(0, state.column(p, a)) * root_m / sys.mass;
  };
  auto record_frame = [&](std::size_t frame) {
    for (std::size_t p = 0; p < config.n_particles; ++p)
      for (std::size_t a = 0; a < config.dim; ++a) {
        const std::size_t idx = traj.index(frame, p, a);
        traj.positions[idx] = position[p * config.dim + a];
        traj.momenta[idx] = state.z(0, state.column(p, a)) * root_m;
      }
  };

  record_frame(0);
  for (std::size_t p = 0; p < config.n_particles; ++p)
    for (std::size_t a = 0; a < config.dim; ++a)
      prev_velocity[p * config.dim + a] = velocity_of(p, a);

  std::optional<ImplicitVvStepper> vv_stepper;
  std::optional<ExactOuStepper> ou_stepper;
  if (config.scheme == Scheme::exact_ou)
    ou_stepper.emplace(sys, dt);
  else
    vv_stepper.emplace(sys, dt);

  for (std::size_t step = 1; step <= config.n_steps; ++step) {
    if (ou_stepper)
      ou_stepper->step(state);
    else
      vv_stepper->step(state);
    // Midpoint integration of V accumulates the positions.
    for (std::size_t p = 0; p < config.n_particles; ++p)
      for (std::size_t a = 0; a < config.dim; ++a) {
        const std::size_t i = p * config.dim + a;
        const double v = velocity_of(p, a);
        position[i] += 0.5 * dt * (prev_velocity[i] + v);
        prev_velocity[i] = v;
      }
    if (step % config.record_every == 0)
      record_frame(step / config.record_every);
  }
  return traj;
}

namespace {

CorrelationSeries analytic_correlation(const ExtendedSystem& sys,
                                       const TimeGrid& grid, std::size_t dim,
                                       bool derivative) {
  sys.validate();
  grid.validate();
  if (!(sys.kbt > 0.0))
    throw ValidationError("analytic correlation requires kbt > 0");
  if (dim == 0 || dim > 3)
    throw ValidationError("dimension must be 1, 2 or 3");

  const Eigen::MatrixXd drift = sys.drift_scaled();
  const double amp = static_cast<double>(dim) * sys.kbt / sys.mass;
  std::vector<double> values(grid.n_t);
  for (std::size_t i = 0; i < grid.n_t; ++i) {
    const Eigen::MatrixXd propagated = (-grid.time(i) * drift).exp();
    if (derivative)
      values[i] = -amp * (drift * propagated)(0, 0);
    else
      values[i] = amp * propagated(0, 0);
  }
  return make_series(grid,
                     derivative ? SeriesKind::fvcf : SeriesKind::vacf,
                     std::move(values));
}

}  // namespace

CorrelationSeries analytic_vacf(const ExtendedSystem& sys, const TimeGrid& grid,
                                std::size_t dim) {
  return analytic_correlation(sys, grid, dim, false);
}

CorrelationSeries analytic_fvcf(const ExtendedSystem& sys, const TimeGrid& grid,
                                std::size_t dim) {
  return analytic_correlation(sys, grid, dim, true);
}

}  // namespace glekit
