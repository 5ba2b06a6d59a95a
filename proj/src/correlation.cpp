#include "glekit/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include <Eigen/SVD>

#include "detail/fft.hpp"

namespace glekit {

namespace {

constexpr std::size_t kMaxDerivativeSize = 4001;

void check_lag(const CgTrajectory& traj, std::size_t max_lag) {
  if (traj.n_frames < 2)
    throw ValidationError("trajectory needs at least two frames");
  if (max_lag + 1 > traj.n_frames)
    throw ValidationError("max_lag must be smaller than the frame count");
  if (max_lag < 1) throw ValidationError("max_lag must be at least 1");
}

// Per-(particle, axis) raw autocorrelation sums accumulated in the spectral
// domain: one forward transform per series, one inverse at the end. The
// result equals the direct all-origin sums exactly (up to roundoff).
std::vector<double> accumulated_correlation(
    const CgTrajectory& traj, std::size_t max_lag,
    const std::function<double(std::size_t, std::size_t, std::size_t)>& value) {
  const std::size_t n = traj.n_frames;
  const std::size_t padded = detail::next_pow2(n + max_lag + 1);
  std::vector<std::complex<double>> spectrum(padded,
                                             std::complex<double>(0.0, 0.0));
  std::vector<double> buffer(n);
  for (std::size_t p = 0; p < traj.n_particles; ++p) {
    for (std::size_t a = 0; a < traj.dim; ++a) {
      for (std::size_t f = 0; f < n; ++f) buffer[f] = value(f, p, a);
      detail::accumulate_power_spectrum(buffer.data(), n, spectrum);
    }
  }
  return detail::correlation_sums(std::move(spectrum), max_lag + 1);
}

}  // namespace

void CgTrajectory::validate() const {
  if (n_particles == 0) throw ValidationError("trajectory has no particles");
  if (dim == 0 || dim > 3)
    throw ValidationError("trajectory dimension must be 1, 2 or 3");
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw ValidationError("trajectory mass must be positive");
  if (!(dt_record > 0.0) || !std::isfinite(dt_record))
    throw ValidationError("trajectory recording step must be positive");
  const std::size_t expected = n_frames * n_particles * dim;
  if (positions.size() != expected || momenta.size() != expected)
    throw ValidationError("trajectory arrays do not match the declared shape");
}

CgTrajectory coarse_grain(const CgTrajectory& atoms,
                          const std::vector<std::vector<std::size_t>>& clusters,
                          const std::vector<double>& atom_masses) {
  atoms.validate();
  if (atom_masses.size() != atoms.n_particles)
    throw ValidationError("need one mass per atom");
  for (double m : atom_masses)
    if (!(m > 0.0) || !std::isfinite(m))
      throw ValidationError("atom masses must be positive");
  if (clusters.empty()) throw ValidationError("grouping has no clusters");

  std::vector<int> seen(atoms.n_particles, 0);
  for (const auto& cluster : clusters) {
    if (cluster.empty())
      throw ValidationError("grouping contains an empty cluster");
    for (std::size_t atom : cluster) {
      if (atom >= atoms.n_particles)
        throw ValidationError("grouping references an unknown atom");
      if (seen[atom]++)
        throw ValidationError("grouping assigns an atom twice");
    }
  }
  if (std::accumulate(seen.begin(), seen.end(), std::size_t{0}) !=
      atoms.n_particles)
    throw ValidationError("grouping must cover every atom exactly once");

  std::vector<double> cluster_mass(clusters.size(), 0.0);
  for (std::size_t k = 0; k < clusters.size(); ++k)
    for (std::size_t atom : clusters[k]) cluster_mass[k] += atom_masses[atom];
  for (double m : cluster_mass)
    if (std::abs(m - cluster_mass[0]) > 1e-12 * cluster_mass[0])
      throw ValidationError(
          "clusters must have equal total mass to form one CG species");

  CgTrajectory out;
  out.n_particles = clusters.size();
  out.n_frames = atoms.n_frames;
  out.dim = atoms.dim;
  out.mass = cluster_mass[0];
  out.dt_record = atoms.dt_record;
  out.positions.resize(out.n_frames * out.n_particles * out.dim);
  out.momenta.resize(out.positions.size());

  for (std::size_t f = 0; f < atoms.n_frames; ++f) {
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      for (std::size_t a = 0; a < atoms.dim; ++a) {
        double com = 0.0;
        double mom = 0.0;
        for (std::size_t atom : clusters[k]) {
          com += atom_masses[atom] * atoms.position(f, atom, a);
          mom += atoms.momentum(f, atom, a);
        }
        out.positions[out.index(f, k, a)] = com / cluster_mass[k];
        out.momenta[out.index(f, k, a)] = mom;
      }
    }
  }
  return out;
}

CorrelationSeries vacf(const CgTrajectory& traj, std::size_t max_lag) {
  traj.validate();
  check_lag(traj, max_lag);

  const std::vector<double> sums = accumulated_correlation(
      traj, max_lag, [&](std::size_t f, std::size_t p, std::size_t a) {
        return traj.velocity(f, p, a);
      });

  std::vector<double> values(max_lag + 1);
  const auto n_particles = static_cast<double>(traj.n_particles);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    const auto n_origins = static_cast<double>(traj.n_frames - k);
    values[k] = sums[k] / (n_particles * n_origins);
  }
  if (!(values[0] > 0.0))
    throw NumericError("VACF has no kinetic energy at lag zero");
  return make_series(TimeGrid{traj.dt_record, max_lag + 1}, SeriesKind::vacf,
                     std::move(values));
}

CorrelationSeries msd(const CgTrajectory& traj, std::size_t max_lag) {
  traj.validate();
  check_lag(traj, max_lag);

  const std::size_t n = traj.n_frames;
  // MSD(k) = S1(k) - 2 AC(k) summed over particles and axes, where S1 holds
  // the squared-magnitude terms (prefix sums) and AC the cross terms (FFT).
  const std::vector<double> ac = accumulated_correlation(
      traj, max_lag, [&](std::size_t f, std::size_t p, std::size_t a) {
        return traj.position(f, p, a);
      });

  std::vector<double> s1(max_lag + 1, 0.0);
  std::vector<double> sq(n);
  for (std::size_t p = 0; p < traj.n_particles; ++p) {
    for (std::size_t a = 0; a < traj.dim; ++a) {
      for (std::size_t f = 0; f < n; ++f) {
        const double r = traj.position(f, p, a);
        sq[f] = r * r;
      }
      std::vector<double> prefix(n + 1, 0.0);
      for (std::size_t f = 0; f < n; ++f) prefix[f + 1] = prefix[f] + sq[f];
      for (std::size_t k = 0; k <= max_lag; ++k) {
        // sum_{i<n-k} (sq[i] + sq[i+k])
        s1[k] += (prefix[n - k] - prefix[0]) + (prefix[n] - prefix[k]);
      }
    }
  }

  std::vector<double> values(max_lag + 1);
  const auto n_particles = static_cast<double>(traj.n_particles);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    const auto n_origins = static_cast<double>(n - k);
    values[k] = (s1[k] - 2.0 * ac[k]) / (n_particles * n_origins);
  }
  values[0] = 0.0;
  return make_series(TimeGrid{traj.dt_record, max_lag + 1}, SeriesKind::msd,
                     std::move(values));
}

CorrelationSeries diffusion_coefficient(const CorrelationSeries& c,
                                        std::size_t dim) {
  c.validate();
  if (c.kind != SeriesKind::vacf)
    throw ValidationError("diffusion coefficient integrates a VACF");
  if (dim == 0 || dim > 3)
    throw ValidationError("dimension must be 1, 2 or 3");

  std::vector<double> values(c.size());
  values[0] = 0.0;
  const double scale = 1.0 / static_cast<double>(dim);
  for (std::size_t i = 1; i < c.size(); ++i)
    values[i] = values[i - 1] +
                scale * 0.5 * c.grid.dt * (c.values[i - 1] + c.values[i]);
  return make_series(c.grid, SeriesKind::diffusion, std::move(values),
                     c.t_offset);
}

CorrelationSeries regularized_derivative(const CorrelationSeries& f,
                                         const BetaGrid& betas) {
  f.validate();
  betas.validate();
  const std::size_t n = f.size();
  if (n < 3) throw ValidationError("derivative needs at least three samples");
  if (n > kMaxDerivativeSize)
    throw ValidationError("regularized derivative is limited to " +
                          std::to_string(kMaxDerivativeSize) + " samples");

  // First-kind Volterra statement of differentiation: the cumulative
  // trapezoid of u matches f - f(0) at every later node.
  const double dt = f.grid.dt;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n - 1),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i - 1);
    a(row, 0) = 0.5 * dt;
    for (std::size_t j = 1; j < i; ++j)
      a(row, static_cast<Eigen::Index>(j)) = dt;
    a(row, static_cast<Eigen::Index>(i)) = 0.5 * dt;
  }
  Eigen::VectorXd g(static_cast<Eigen::Index>(n - 1));
  for (std::size_t i = 1; i < n; ++i)
    g(static_cast<Eigen::Index>(i - 1)) = f.values[i] - f.values[0];

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd utg = svd.matrixU().transpose() * g;
  const Eigen::VectorXd& sigma = svd.singularValues();
  auto solve_at = [&](double beta) {
    Eigen::VectorXd filtered(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
      filtered(i) = sigma(i) / (sigma(i) * sigma(i) + beta) * utg(i);
    return Eigen::VectorXd(svd.matrixV() * filtered);
  };

  const auto chosen = quasi_optimality_select(solve_at, betas.values());
  std::vector<double> values(chosen.solution.data(),
                             chosen.solution.data() + chosen.solution.size());
  const SeriesKind kind =
      f.kind == SeriesKind::vacf ? SeriesKind::fvcf : f.kind;
  return make_series(f.grid, kind, std::move(values), f.t_offset);
}

CorrelationSeries fvcf(const CorrelationSeries& c, const BetaGrid& betas) {
  if (c.kind != SeriesKind::vacf)
    throw ValidationError("fvcf differentiates a VACF");
  return regularized_derivative(c, betas);
}

}  // namespace glekit
