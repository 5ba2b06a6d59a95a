#pragma once

#include <cstddef>
#include <vector>

#include "glekit/types.hpp"
#include "glekit/volterra.hpp"

namespace glekit {

// Positions and momenta of an ensemble of identical CG particles sampled on
// a uniform time grid. Layout is [frame][particle][axis], contiguous.
struct CgTrajectory {
  std::size_t n_particles = 0;
  std::size_t n_frames = 0;
  std::size_t dim = 1;
  double mass = 1.0;
  double dt_record = 0.0;
  std::vector<double> positions;
  std::vector<double> momenta;

  std::size_t index(std::size_t frame, std::size_t particle,
                    std::size_t axis) const {
    return (frame * n_particles + particle) * dim + axis;
  }
  double position(std::size_t f, std::size_t p, std::size_t a) const {
    return positions[index(f, p, a)];
  }
  double momentum(std::size_t f, std::size_t p, std::size_t a) const {
    return momenta[index(f, p, a)];
  }
  double velocity(std::size_t f, std::size_t p, std::size_t a) const {
    return momentum(f, p, a) / mass;
  }

  void validate() const;
};

// Maps an atomistic trajectory onto CG particles: each cluster contributes
// its center of mass and total momentum. Clusters must partition the atoms
// and produce one shared CG mass.
CgTrajectory coarse_grain(const CgTrajectory& atoms,
                          const std::vector<std::vector<std::size_t>>& clusters,
                          const std::vector<double>& atom_masses);

// Velocity autocorrelation averaged over particles and time origins with
// Cartesian components summed: C(t_k) with C(0) = dim * kbt / M at
// equilibrium. max_lag must be < n_frames.
CorrelationSeries vacf(const CgTrajectory& traj, std::size_t max_lag);

// Mean squared displacement over all origins, components summed.
CorrelationSeries msd(const CgTrajectory& traj, std::size_t max_lag);

// Running Green-Kubo integral D(t) = (1/dim) int_0^t C(s) ds (trapezoid).
CorrelationSeries diffusion_coefficient(const CorrelationSeries& c,
                                        std::size_t dim);

// Derivative of a sampled signal posed as a first-kind Volterra problem
// (cumulative quadrature matrix), solved with Tikhonov regularization and
// the quasi-optimality choice of beta over the supplied ladder.
CorrelationSeries regularized_derivative(const CorrelationSeries& f,
                                         const BetaGrid& betas = {});

// Force-velocity correlation W = dC/dt from the VACF.
CorrelationSeries fvcf(const CorrelationSeries& c, const BetaGrid& betas = {});

}  // namespace glekit
