#include "glekit.h"

#include <cstring>
#include <exception>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "glekit/active.hpp"
#include "glekit/correlation.hpp"
#include "glekit/gpr.hpp"
#include "glekit/io.hpp"
#include "glekit/oscfit.hpp"
#include "glekit/pod.hpp"
#include "glekit/simulate.hpp"
#include "glekit/synthetic.hpp"
#include "glekit/transfer.hpp"
#include "glekit/types.hpp"
#include "glekit/volterra.hpp"

struct glek_series {
  glekit::CorrelationSeries series;
};

struct glek_trajectory {
  glekit::CgTrajectory traj;
};

struct glek_expansion {
  glekit::OscillatorExpansion exp;
};

struct glek_system {
  glekit::ExtendedSystem sys;
  glekit::OscillatorExpansion exp;
};

// Snapshot sets are accumulated as parallel vectors and assembled (and fully
// validated) the moment a consumer needs the matrix form.
struct glek_snapshots {
  std::size_t param_dim = 0;
  std::vector<glekit::ParameterPoint> points;
  std::vector<glekit::CorrelationSeries> kernels;
  std::vector<std::string> axis_names;

  glekit::SnapshotSet build() const {
    glekit::SnapshotSet set = glekit::make_snapshot_set(points, kernels);
    set.axis_names = axis_names;
    return set;
  }
};

struct glek_surrogate {
  glekit::AnySurrogate value;
};

struct glek_active_report {
  std::vector<glekit::ParameterPoint> sampled;
  std::vector<glekit::ActiveStep> history;
  bool converged = false;
  double final_max_sigma = 0.0;
};

namespace {

thread_local std::string t_last_error;
thread_local std::vector<double> t_last_request;

template <typename Fn>
glek_status guarded(Fn&& fn) {
  try {
    t_last_request.clear();
    fn();
    return GLEK_OK;
  } catch (const glekit::DataRequestError& e) {
    t_last_error = e.what();
    t_last_request = e.point();
    return GLEK_ERR_DATA_REQUEST;
  } catch (const glekit::Error& e) {
    t_last_error = e.what();
    return static_cast<glek_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return GLEK_ERR_NUMERIC;
  } catch (...) {
    t_last_error = "unidentified failure";
    return GLEK_ERR_NUMERIC;
  }
}

void require(bool ok, const char* message) {
  if (!ok) throw glekit::ValidationError(message);
}

glekit::SeriesKind to_kind(glek_series_kind kind) {
  switch (kind) {
    case GLEK_SERIES_VACF:
      return glekit::SeriesKind::vacf;
    case GLEK_SERIES_FVCF:
      return glekit::SeriesKind::fvcf;
    case GLEK_SERIES_KERNEL:
      return glekit::SeriesKind::kernel;
    case GLEK_SERIES_MSD:
      return glekit::SeriesKind::msd;
    case GLEK_SERIES_DIFFUSION:
      return glekit::SeriesKind::diffusion;
  }
  throw glekit::ValidationError("unknown series kind");
}

glek_series_kind from_kind(glekit::SeriesKind kind) {
  switch (kind) {
    case glekit::SeriesKind::vacf:
      return GLEK_SERIES_VACF;
    case glekit::SeriesKind::fvcf:
      return GLEK_SERIES_FVCF;
    case glekit::SeriesKind::kernel:
      return GLEK_SERIES_KERNEL;
    case glekit::SeriesKind::msd:
      return GLEK_SERIES_MSD;
    case glekit::SeriesKind::diffusion:
      return GLEK_SERIES_DIFFUSION;
  }
  return GLEK_SERIES_KERNEL;
}

glekit::BetaGrid to_beta_grid(const glek_beta_grid* betas) {
  glekit::BetaGrid grid;
  if (betas != nullptr && betas->count > 0) {
    grid.start = betas->start;
    grid.ratio = betas->ratio;
    grid.count = betas->count;
  }
  return grid;
}

glekit::GprConfig to_gpr_config(const glek_gpr_config* cfg) {
  glekit::GprConfig out;
  if (cfg != nullptr) {
    out.restarts = cfg->restarts;
    out.max_iters = cfg->max_iters;
    out.tol = cfg->tol;
    out.seed = cfg->seed;
  }
  return out;
}

glekit::ParameterPoint to_point(const double* mu, std::size_t dim) {
  require(mu != nullptr, "parameter point is null");
  glekit::ParameterPoint p;
  p.coords.assign(mu, mu + dim);
  p.validate();
  return p;
}

std::vector<glekit::ParameterPoint> to_points(const double* flat,
                                              std::size_t n, std::size_t dim) {
  require(flat != nullptr || n == 0, "point array is null");
  std::vector<glekit::ParameterPoint> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    points.push_back(to_point(flat + i * dim, dim));
  return points;
}

glek_series* wrap(glekit::CorrelationSeries series) {
  return new glek_series{std::move(series)};
}

void copy_string(const std::string& value, char* buf, std::size_t buf_len) {
  require(buf != nullptr, "output buffer is null");
  require(buf_len > value.size(), "output buffer is too small");
  std::memcpy(buf, value.c_str(), value.size() + 1);
}

glekit::KernelOracle wrap_oracle(glek_oracle_fn oracle, void* user) {
  require(oracle != nullptr, "oracle callback is null");
  return [oracle, user](const glekit::ParameterPoint& mu) {
    glek_series* out = nullptr;
    const glek_status st =
        oracle(user, mu.coords.data(), mu.coords.size(), &out);
    if (st == GLEK_OK) {
      if (out == nullptr)
        throw glekit::NumericError("kernel oracle returned no series for " +
                                   glekit::point_tag(mu));
      glekit::CorrelationSeries kernel = std::move(out->series);
      delete out;
      return kernel;
    }
    delete out;
    const std::string tag = glekit::point_tag(mu);
    if (st == GLEK_ERR_DATA_REQUEST)
      throw glekit::DataRequestError(
          mu.coords, "kernel oracle has no data for point " + tag);
    if (st == GLEK_ERR_VALIDATION)
      throw glekit::ValidationError("kernel oracle rejected point " + tag);
    throw glekit::NumericError("kernel oracle failed at point " + tag);
  };
}

void run_active(const glekit::KernelOracle& oracle, const double* pool,
                std::size_t n_pool, std::size_t dim, const double* initial,
                std::size_t n_initial, double zeta_al, double zeta_pod,
                std::size_t budget, const glek_gpr_config* cfg,
                glek_surrogate** out_surrogate,
                glek_active_report** out_report) {
  require(out_surrogate != nullptr, "surrogate output is null");
  glekit::CandidatePool candidates;
  candidates.points = to_points(pool, n_pool, dim);
  const std::vector<glekit::ParameterPoint> design =
      to_points(initial, n_initial, dim);

  glekit::ActiveConfig config;
  config.zeta_al = zeta_al;
  config.zeta_pod = zeta_pod;
  config.budget = budget == 0 ? 100 : budget;
  config.gpr = to_gpr_config(cfg);

  glekit::ActiveRun run =
      glekit::run_active_learning(oracle, candidates, design, config);

  *out_surrogate = new glek_surrogate{std::move(run.surrogate)};
  if (out_report != nullptr) {
    auto* report = new glek_active_report;
    report->sampled = std::move(run.sampled);
    report->history = std::move(run.history);
    report->converged = run.converged;
    report->final_max_sigma = run.final_max_sigma;
    *out_report = report;
  }
}

}  // namespace

extern "C" {

const char* glek_last_error(void) { return t_last_error.c_str(); }

size_t glek_last_request(double* buf, size_t buf_len) {
  if (buf != nullptr) {
    const size_t n = t_last_request.size() < buf_len ? t_last_request.size()
                                                     : buf_len;
    for (size_t i = 0; i < n; ++i) buf[i] = t_last_request[i];
  }
  return t_last_request.size();
}

void glek_string_free(char* s) { delete[] s; }

/* ------------------------------------------------------------------ */
/* Series                                                              */
/* ------------------------------------------------------------------ */

glek_status glek_series_new(double dt, double t_offset, size_t n,
                            const double* values, glek_series_kind kind,
                            glek_series** out) {
  return guarded([&] {
    require(out != nullptr, "series output is null");
    require(values != nullptr, "series values are null");
    *out = wrap(glekit::make_series(
        glekit::TimeGrid{dt, n}, to_kind(kind),
        std::vector<double>(values, values + n), t_offset));
  });
}

void glek_series_free(glek_series* s) { delete s; }

size_t glek_series_size(const glek_series* s) {
  return s == nullptr ? 0 : s->series.size();
}

double glek_series_dt(const glek_series* s) {
  return s == nullptr ? 0.0 : s->series.grid.dt;
}

double glek_series_t_offset(const glek_series* s) {
  return s == nullptr ? 0.0 : s->series.t_offset;
}

glek_series_kind glek_series_get_kind(const glek_series* s) {
  return s == nullptr ? GLEK_SERIES_KERNEL : from_kind(s->series.kind);
}

const double* glek_series_values(const glek_series* s) {
  return s == nullptr ? nullptr : s->series.values.data();
}

glek_status glek_series_read_csv(const char* path, glek_series_kind kind,
                                 glek_series** out) {
  return guarded([&] {
    require(out != nullptr, "series output is null");
    require(path != nullptr, "path is null");
    *out = wrap(glekit::read_series_csv(path, to_kind(kind)));
  });
}

glek_status glek_series_write_csv(const glek_series* s, const char* path) {
  return guarded([&] {
    require(s != nullptr, "series is null");
    require(path != nullptr, "path is null");
    glekit::write_series_csv(path, s->series);
  });
}

glek_status glek_relative_error(const glek_series* a, const glek_series* b,
                                double* out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr, "series is null");
    require(out != nullptr, "output is null");
    *out = glekit::relative_error(a->series, b->series);
  });
}

/* ------------------------------------------------------------------ */
/* Extraction                                                          */
/* ------------------------------------------------------------------ */

glek_status glek_extract_kernel(const glek_series* vacf,
                                const glek_series* fvcf,
                                glek_extract_mode mode, double cond_threshold,
                                const glek_beta_grid* betas,
                                glek_series** out) {
  return guarded([&] {
    require(vacf != nullptr && fvcf != nullptr, "correlation input is null");
    require(out != nullptr, "kernel output is null");
    glekit::ExtractionConfig config;
    switch (mode) {
      case GLEK_EXTRACT_DIRECT:
        config.policy = glekit::ExtractionPolicy::direct;
        break;
      case GLEK_EXTRACT_TIKHONOV:
        config.policy = glekit::ExtractionPolicy::tikhonov;
        break;
      case GLEK_EXTRACT_AUTO:
        config.policy = glekit::ExtractionPolicy::automatic;
        break;
      default:
        throw glekit::ValidationError("unknown extraction mode");
    }
    if (cond_threshold > 0.0) config.cond_threshold = cond_threshold;
    config.betas = to_beta_grid(betas);
    *out = wrap(glekit::extract_kernel(vacf->series, fvcf->series, config));
  });
}

glek_status glek_condition_estimate(const glek_series* vacf,
                                    const glek_series* fvcf, double* out) {
  return guarded([&] {
    require(vacf != nullptr && fvcf != nullptr, "correlation input is null");
    require(out != nullptr, "output is null");
    const glekit::VolterraSystem system =
        glekit::assemble_volterra_system(vacf->series, fvcf->series);
    *out = glekit::condition_estimate(system);
  });
}

glek_status glek_derivative(const glek_series* f, const glek_beta_grid* betas,
                            glek_series** out) {
  return guarded([&] {
    require(f != nullptr, "series is null");
    require(out != nullptr, "output is null");
    *out = wrap(glekit::regularized_derivative(f->series, to_beta_grid(betas)));
  });
}

/* ------------------------------------------------------------------ */
/* Trajectories                                                        */
/* ------------------------------------------------------------------ */

glek_status glek_trajectory_new(size_t n_particles, size_t n_frames,
                                size_t dim, double mass, double dt_record,
                                const double* positions, const double* momenta,
                                glek_trajectory** out) {
  return guarded([&] {
    require(out != nullptr, "trajectory output is null");
    require(positions != nullptr && momenta != nullptr,
            "trajectory arrays are null");
    glekit::CgTrajectory traj;
    traj.n_particles = n_particles;
    traj.n_frames = n_frames;
    traj.dim = dim;
    traj.mass = mass;
    traj.dt_record = dt_record;
    const size_t total = n_frames * n_particles * dim;
    traj.positions.assign(positions, positions + total);
    traj.momenta.assign(momenta, momenta + total);
    traj.validate();
    *out = new glek_trajectory{std::move(traj)};
  });
}

void glek_trajectory_free(glek_trajectory* t) { delete t; }

size_t glek_trajectory_particles(const glek_trajectory* t) {
  return t == nullptr ? 0 : t->traj.n_particles;
}

size_t glek_trajectory_frames(const glek_trajectory* t) {
  return t == nullptr ? 0 : t->traj.n_frames;
}

size_t glek_trajectory_dim(const glek_trajectory* t) {
  return t == nullptr ? 0 : t->traj.dim;
}

double glek_trajectory_mass(const glek_trajectory* t) {
  return t == nullptr ? 0.0 : t->traj.mass;
}

double glek_trajectory_dt(const glek_trajectory* t) {
  return t == nullptr ? 0.0 : t->traj.dt_record;
}

const double* glek_trajectory_positions(const glek_trajectory* t) {
  return t == nullptr ? nullptr : t->traj.positions.data();
}

const double* glek_trajectory_momenta(const glek_trajectory* t) {
  return t == nullptr ? nullptr : t->traj.momenta.data();
}

glek_status glek_trajectory_write_csv(const glek_trajectory* t,
                                      const char* path) {
  return guarded([&] {
    require(t != nullptr, "trajectory is null");
    require(path != nullptr, "path is null");
    glekit::write_trajectory_csv(path, t->traj);
  });
}

glek_status glek_trajectory_read_csv(const char* path, const char* meta_path,
                                     glek_trajectory** out) {
  return guarded([&] {
    require(out != nullptr, "trajectory output is null");
    require(path != nullptr, "path is null");
    *out = new glek_trajectory{glekit::read_trajectory_csv(
        path, meta_path == nullptr ? std::filesystem::path{}
                                   : std::filesystem::path{meta_path})};
  });
}

glek_status glek_coarse_grain(const glek_trajectory* atoms,
                              const size_t* cluster_atoms,
                              const size_t* cluster_sizes, size_t n_clusters,
                              const double* atom_masses,
                              glek_trajectory** out) {
  return guarded([&] {
    require(atoms != nullptr, "atomistic trajectory is null");
    require(out != nullptr, "trajectory output is null");
    require(cluster_atoms != nullptr && cluster_sizes != nullptr,
            "grouping arrays are null");
    require(atom_masses != nullptr, "atom masses are null");
    std::vector<std::vector<std::size_t>> clusters(n_clusters);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < n_clusters; ++k) {
      clusters[k].assign(cluster_atoms + offset,
                         cluster_atoms + offset + cluster_sizes[k]);
      offset += cluster_sizes[k];
    }
    const std::vector<double> masses(
        atom_masses, atom_masses + atoms->traj.n_particles);
    *out = new glek_trajectory{
        glekit::coarse_grain(atoms->traj, clusters, masses)};
  });
}

glek_status glek_vacf(const glek_trajectory* t, size_t max_lag,
                      glek_series** out) {
  return guarded([&] {
    require(t != nullptr, "trajectory is null");
    require(out != nullptr, "series output is null");
    *out = wrap(glekit::vacf(t->traj, max_lag));
  });
}

glek_status glek_msd(const glek_trajectory* t, size_t max_lag,
                     glek_series** out) {
  return guarded([&] {
    require(t != nullptr, "trajectory is null");
    require(out != nullptr, "series output is null");
    *out = wrap(glekit::msd(t->traj, max_lag));
  });
}

glek_status glek_diffusion_coefficient(const glek_series* vacf, size_t dim,
                                       glek_series** out) {
  return guarded([&] {
    require(vacf != nullptr, "series is null");
    require(out != nullptr, "series output is null");
    *out = wrap(glekit::diffusion_coefficient(vacf->series, dim));
  });
}

/* ------------------------------------------------------------------ */
/* Expansions and systems                                              */
/* ------------------------------------------------------------------ */

glek_status glek_expansion_new(size_t n_terms, const double* abcq,
                               glek_expansion** out) {
  return guarded([&] {
    require(out != nullptr, "expansion output is null");
    require(abcq != nullptr, "coefficient array is null");
    glekit::OscillatorExpansion exp;
    exp.terms.resize(n_terms);
    for (size_t i = 0; i < n_terms; ++i) {
      exp.terms[i].a = abcq[4 * i];
      exp.terms[i].b = abcq[4 * i + 1];
      exp.terms[i].c = abcq[4 * i + 2];
      exp.terms[i].q = abcq[4 * i + 3];
    }
    exp.validate();
    *out = new glek_expansion{std::move(exp)};
  });
}

void glek_expansion_free(glek_expansion* e) { delete e; }

size_t glek_expansion_terms(const glek_expansion* e) {
  return e == nullptr ? 0 : e->exp.n_terms();
}

glek_status glek_expansion_coefficients(const glek_expansion* e,
                                        double* abcq) {
  return guarded([&] {
    require(e != nullptr, "expansion is null");
    require(abcq != nullptr, "coefficient buffer is null");
    for (size_t i = 0; i < e->exp.n_terms(); ++i) {
      abcq[4 * i] = e->exp.terms[i].a;
      abcq[4 * i + 1] = e->exp.terms[i].b;
      abcq[4 * i + 2] = e->exp.terms[i].c;
      abcq[4 * i + 3] = e->exp.terms[i].q;
    }
  });
}

glek_status glek_expansion_eval(const glek_expansion* e, double dt,
                                double t_offset, size_t n, glek_series** out) {
  return guarded([&] {
    require(e != nullptr, "expansion is null");
    require(out != nullptr, "series output is null");
    *out = wrap(
        glekit::eval_expansion(e->exp, glekit::TimeGrid{dt, n}, t_offset));
  });
}

glek_status glek_expansion_write_json(const glek_expansion* e,
                                      double rel_residual, const char* path) {
  return guarded([&] {
    require(e != nullptr, "expansion is null");
    require(path != nullptr, "path is null");
    glekit::write_expansion_json(path, e->exp, rel_residual);
  });
}

glek_status glek_expansion_read_json(const char* path, glek_expansion** out,
                                     double* rel_residual) {
  return guarded([&] {
    require(out != nullptr, "expansion output is null");
    require(path != nullptr, "path is null");
    auto [exp, residual] = glekit::read_expansion_json(path);
    if (rel_residual != nullptr) *rel_residual = residual;
    *out = new glek_expansion{std::move(exp)};
  });
}

glek_status glek_fit_expansion(const glek_series* kernel, size_t n_terms,
                               int n_starts, uint64_t seed,
                               double residual_ceiling, glek_expansion** out,
                               double* rel_residual) {
  return guarded([&] {
    require(kernel != nullptr, "kernel series is null");
    require(out != nullptr, "expansion output is null");
    glekit::FitConfig config;
    if (n_starts > 0) config.n_starts = n_starts;
    if (residual_ceiling > 0.0) config.residual_ceiling = residual_ceiling;
    config.seed = seed;
    glekit::FitResult result =
        glekit::fit_expansion(kernel->series, n_terms, config);
    if (rel_residual != nullptr) *rel_residual = result.rel_residual;
    *out = new glek_expansion{std::move(result.expansion)};
  });
}

glek_status glek_system_new(const glek_expansion* e, double mass, double kbt,
                            glek_system** out) {
  return guarded([&] {
    require(e != nullptr, "expansion is null");
    require(out != nullptr, "system output is null");
    *out = new glek_system{
        glekit::assemble_extended_system(e->exp, mass, kbt), e->exp};
  });
}

void glek_system_free(glek_system* s) { delete s; }

glek_status glek_matrix_kernel(const glek_system* s, double dt,
                               double t_offset, size_t n, glek_series** out) {
  return guarded([&] {
    require(s != nullptr, "system is null");
    require(out != nullptr, "series output is null");
    *out = wrap(
        glekit::matrix_kernel(s->sys, glekit::TimeGrid{dt, n}, t_offset));
  });
}

glek_status glek_analytic_vacf(const glek_system* s, double dt, size_t n,
                               size_t dim, glek_series** out) {
  return guarded([&] {
    require(s != nullptr, "system is null");
    require(out != nullptr, "series output is null");
    *out = wrap(glekit::analytic_vacf(s->sys, glekit::TimeGrid{dt, n}, dim));
  });
}

glek_status glek_analytic_fvcf(const glek_system* s, double dt, size_t n,
                               size_t dim, glek_series** out) {
  return guarded([&] {
    require(s != nullptr, "system is null");
    require(out != nullptr, "series output is null");
    *out = wrap(glekit::analytic_fvcf(s->sys, glekit::TimeGrid{dt, n}, dim));
  });
}

glek_status glek_default_time_step(const glek_expansion* e, double* out) {
  return guarded([&] {
    require(e != nullptr, "expansion is null");
    require(out != nullptr, "output is null");
    const glekit::ExtendedSystem sys =
        glekit::assemble_extended_system(e->exp, 1.0, 1.0);
    *out = glekit::default_time_step(sys, e->exp);
  });
}

glek_status glek_simulate(const glek_system* s, double dt, size_t n_steps,
                          size_t record_every, size_t n_particles, size_t dim,
                          glek_scheme scheme, uint64_t seed,
                          glek_trajectory** out) {
  return guarded([&] {
    require(s != nullptr, "system is null");
    require(out != nullptr, "trajectory output is null");
    glekit::SimConfig config;
    config.dt = dt > 0.0 ? dt : glekit::default_time_step(s->sys, s->exp);
    config.n_steps = n_steps;
    config.record_every = record_every == 0 ? 1 : record_every;
    config.n_particles = n_particles;
    config.dim = dim;
    config.scheme = scheme == GLEK_SCHEME_EXACT_OU ? glekit::Scheme::exact_ou
                                                   : glekit::Scheme::implicit_vv;
    config.seed = seed;
    *out = new glek_trajectory{glekit::simulate_ensemble(s->sys, config)};
  });
}

/* ------------------------------------------------------------------ */
/* Snapshots and surrogates                                            */
/* ------------------------------------------------------------------ */

glek_status glek_snapshots_new(size_t param_dim, glek_snapshots** out) {
  return guarded([&] {
    require(out != nullptr, "snapshot output is null");
    require(param_dim > 0, "parameter dimension must be positive");
    auto* s = new glek_snapshots;
    s->param_dim = param_dim;
    *out = s;
  });
}

glek_status glek_snapshots_add(glek_snapshots* s, const double* mu,
                               const glek_series* kernel) {
  return guarded([&] {
    require(s != nullptr, "snapshot set is null");
    require(kernel != nullptr, "kernel series is null");
    glekit::ParameterPoint point = to_point(mu, s->param_dim);
    kernel->series.validate();
    if (!s->kernels.empty()) {
      require(kernel->series.grid == s->kernels.front().grid &&
                  kernel->series.t_offset == s->kernels.front().t_offset,
              "snapshot kernels must share one grid");
    }
    s->points.push_back(std::move(point));
    s->kernels.push_back(kernel->series);
  });
}

void glek_snapshots_free(glek_snapshots* s) { delete s; }

size_t glek_snapshots_count(const glek_snapshots* s) {
  return s == nullptr ? 0 : s->points.size();
}

glek_status glek_snapshots_read_manifest(const char* path,
                                         glek_snapshots** out) {
  return guarded([&] {
    require(out != nullptr, "snapshot output is null");
    require(path != nullptr, "path is null");
    const glekit::SnapshotSet set = glekit::read_snapshot_manifest(path);
    auto* s = new glek_snapshots;
    s->param_dim = set.param_dim();
    s->points = set.points;
    s->axis_names = set.axis_names;
    s->kernels.reserve(set.n_points());
    for (std::size_t i = 0; i < set.n_points(); ++i)
      s->kernels.push_back(set.kernel(i));
    *out = s;
  });
}

glek_status glek_snapshots_point(const glek_snapshots* s, size_t i,
                                 double* mu) {
  return guarded([&] {
    require(s != nullptr, "snapshot set is null");
    require(mu != nullptr, "output buffer is null");
    require(i < s->points.size(), "snapshot index out of range");
    const auto& coords = s->points[i].coords;
    for (size_t k = 0; k < coords.size(); ++k) mu[k] = coords[k];
  });
}

glek_status glek_snapshots_kernel(const glek_snapshots* s, size_t i,
                                  glek_series** out) {
  return guarded([&] {
    require(s != nullptr, "snapshot set is null");
    require(out != nullptr, "series output is null");
    require(i < s->kernels.size(), "snapshot index out of range");
    *out = wrap(s->kernels[i]);
  });
}

glek_gpr_config glek_gpr_config_default(void) {
  const glekit::GprConfig defaults;
  glek_gpr_config out;
  out.restarts = defaults.restarts;
  out.max_iters = defaults.max_iters;
  out.tol = defaults.tol;
  out.seed = defaults.seed;
  return out;
}

glek_status glek_train_direct(const glek_snapshots* s,
                              const glek_gpr_config* cfg, size_t time_stride,
                              glek_surrogate** out) {
  return guarded([&] {
    require(s != nullptr, "snapshot set is null");
    require(out != nullptr, "surrogate output is null");
    *out = new glek_surrogate{glekit::train_direct(
        s->build(), to_gpr_config(cfg), time_stride == 0 ? 1 : time_stride)};
  });
}

glek_status glek_train_rom_gpr(const glek_snapshots* s, double zeta_pod,
                               const glek_gpr_config* cfg,
                               glek_surrogate** out) {
  return guarded([&] {
    require(s != nullptr, "snapshot set is null");
    require(out != nullptr, "surrogate output is null");
    *out = new glek_surrogate{
        glekit::train_rom_gpr(s->build(), zeta_pod, to_gpr_config(cfg))};
  });
}

void glek_surrogate_free(glek_surrogate* s) { delete s; }

glek_status glek_surrogate_save(const glek_surrogate* s, const char* path) {
  return guarded([&] {
    require(s != nullptr, "surrogate is null");
    require(path != nullptr, "path is null");
    std::visit([&](const auto& value) { glekit::save_surrogate(path, value); },
               s->value);
  });
}

glek_status glek_surrogate_load(const char* path, glek_surrogate** out) {
  return guarded([&] {
    require(out != nullptr, "surrogate output is null");
    require(path != nullptr, "path is null");
    *out = new glek_surrogate{glekit::load_surrogate(path)};
  });
}

const char* glek_surrogate_method(const glek_surrogate* s) {
  if (s == nullptr) return "";
  return std::holds_alternative<glekit::DirectSurrogate>(s->value) ? "gpr"
                                                                   : "rom-gpr";
}

size_t glek_surrogate_param_dim(const glek_surrogate* s) {
  if (s == nullptr) return 0;
  return std::visit([](const auto& value) { return value.param_dim; },
                    s->value);
}

size_t glek_surrogate_rank(const glek_surrogate* s) {
  if (s == nullptr) return 0;
  if (const auto* rom = std::get_if<glekit::RomGprSurrogate>(&s->value))
    return rom->basis.rank;
  return 0;
}

double glek_surrogate_pod_error(const glek_surrogate* s) {
  if (s == nullptr) return 0.0;
  if (const auto* rom = std::get_if<glekit::RomGprSurrogate>(&s->value))
    return rom->basis.rel_error;
  return 0.0;
}

size_t glek_surrogate_training_count(const glek_surrogate* s) {
  if (s == nullptr) return 0;
  return std::visit(
      [](const auto& value) { return value.training.n_points(); }, s->value);
}

glek_status glek_surrogate_training_point(const glek_surrogate* s, size_t i,
                                          double* mu) {
  return guarded([&] {
    require(s != nullptr, "surrogate is null");
    require(mu != nullptr, "output buffer is null");
    std::visit(
        [&](const auto& value) {
          require(i < value.training.n_points(), "training index out of range");
          const auto& coords = value.training.points[i].coords;
          for (size_t k = 0; k < coords.size(); ++k) mu[k] = coords[k];
        },
        s->value);
  });
}

glek_status glek_surrogate_training_kernel(const glek_surrogate* s, size_t i,
                                           glek_series** out) {
  return guarded([&] {
    require(s != nullptr, "surrogate is null");
    require(out != nullptr, "series output is null");
    std::visit(
        [&](const auto& value) {
          require(i < value.training.n_points(), "training index out of range");
          *out = wrap(value.training.kernel(i));
        },
        s->value);
  });
}

glek_status glek_surrogate_predict(const glek_surrogate* s, const double* mu,
                                   glek_series** kernel,
                                   glek_series** pointwise_std,
                                   double* mode_stds) {
  return guarded([&] {
    require(s != nullptr, "surrogate is null");
    const glekit::ParameterPoint point =
        to_point(mu, glek_surrogate_param_dim(s));
    glekit::KernelPrediction prediction = std::visit(
        [&](const auto& value) { return glekit::predict_kernel(value, point); },
        s->value);
    if (pointwise_std != nullptr) {
      glekit::CorrelationSeries std_series;
      std_series.grid = prediction.kernel.grid;
      std_series.t_offset = prediction.kernel.t_offset;
      std_series.kind = glekit::SeriesKind::kernel;
      std_series.values.assign(
          prediction.pointwise_std.data(),
          prediction.pointwise_std.data() + prediction.pointwise_std.size());
      *pointwise_std = wrap(std::move(std_series));
    }
    if (mode_stds != nullptr)
      for (Eigen::Index k = 0; k < prediction.mode_stds.size(); ++k)
        mode_stds[k] = prediction.mode_stds(k);
    if (kernel != nullptr) *kernel = wrap(std::move(prediction.kernel));
  });
}

/* ------------------------------------------------------------------ */
/* Active learning                                                     */
/* ------------------------------------------------------------------ */

glek_status glek_active_learn(const double* pool, size_t n_pool, size_t dim,
                              const double* initial, size_t n_initial,
                              double zeta_al, double zeta_pod, size_t budget,
                              const glek_gpr_config* cfg, glek_oracle_fn oracle,
                              void* user, glek_surrogate** out_surrogate,
                              glek_active_report** out_report) {
  return guarded([&] {
    run_active(wrap_oracle(oracle, user), pool, n_pool, dim, initial,
               n_initial, zeta_al, zeta_pod, budget, cfg, out_surrogate,
               out_report);
  });
}

glek_status glek_active_learn_files(const char* data_dir, const double* pool,
                                    size_t n_pool, size_t dim,
                                    const double* initial, size_t n_initial,
                                    double zeta_al, double zeta_pod,
                                    size_t budget, const glek_gpr_config* cfg,
                                    glek_surrogate** out_surrogate,
                                    glek_active_report** out_report) {
  return guarded([&] {
    require(data_dir != nullptr, "data directory is null");
    run_active(glekit::file_kernel_oracle(data_dir), pool, n_pool, dim,
               initial, n_initial, zeta_al, zeta_pod, budget, cfg,
               out_surrogate, out_report);
  });
}

void glek_active_report_free(glek_active_report* r) { delete r; }

size_t glek_active_report_samples(const glek_active_report* r) {
  return r == nullptr ? 0 : r->sampled.size();
}

glek_status glek_active_report_sample(const glek_active_report* r, size_t i,
                                      double* mu) {
  return guarded([&] {
    require(r != nullptr, "report is null");
    require(mu != nullptr, "output buffer is null");
    require(i < r->sampled.size(), "sample index out of range");
    const auto& coords = r->sampled[i].coords;
    for (size_t k = 0; k < coords.size(); ++k) mu[k] = coords[k];
  });
}

size_t glek_active_report_history_length(const glek_active_report* r) {
  return r == nullptr ? 0 : r->history.size();
}

glek_status glek_active_report_history(const glek_active_report* r, size_t i,
                                       double* mu, double* sigma_bar) {
  return guarded([&] {
    require(r != nullptr, "report is null");
    require(i < r->history.size(), "history index out of range");
    if (mu != nullptr) {
      const auto& coords = r->history[i].point.coords;
      for (size_t k = 0; k < coords.size(); ++k) mu[k] = coords[k];
    }
    if (sigma_bar != nullptr) *sigma_bar = r->history[i].sigma_bar;
  });
}

int glek_active_report_converged(const glek_active_report* r) {
  return r != nullptr && r->converged ? 1 : 0;
}

double glek_active_report_final_sigma(const glek_active_report* r) {
  return r == nullptr ? 0.0 : r->final_max_sigma;
}

glek_status glek_point_tag(const double* mu, size_t dim, char* buf,
                           size_t buf_len) {
  return guarded([&] {
    copy_string(glekit::point_tag(to_point(mu, dim)), buf, buf_len);
  });
}

glek_status glek_kernel_filename(const double* mu, size_t dim, char* buf,
                                 size_t buf_len) {
  return guarded([&] {
    copy_string(glekit::kernel_filename(to_point(mu, dim)), buf, buf_len);
  });
}

glek_status glek_pool_read_json(const char* path, double** points,
                                size_t* n_points, double** initial,
                                size_t* n_initial, size_t* dim) {
  return guarded([&] {
    require(path != nullptr, "path is null");
    require(points != nullptr && n_points != nullptr && dim != nullptr,
            "pool outputs are null");
    require((initial == nullptr) == (n_initial == nullptr),
            "initial outputs must be given together");
    auto [pool, design] = glekit::read_pool_json(path);
    const size_t d = pool.points.front().dim();
    auto* flat = new double[pool.size() * d];
    for (size_t i = 0; i < pool.size(); ++i)
      for (size_t k = 0; k < d; ++k)
        flat[i * d + k] = pool.points[i].coords[k];
    *points = flat;
    *n_points = pool.size();
    *dim = d;
    if (initial != nullptr) {
      if (design.empty()) {
        *initial = nullptr;
        *n_initial = 0;
      } else {
        auto* flat_init = new double[design.size() * d];
        for (size_t i = 0; i < design.size(); ++i)
          for (size_t k = 0; k < d; ++k)
            flat_init[i * d + k] = design[i].coords[k];
        *initial = flat_init;
        *n_initial = design.size();
      }
    }
  });
}

void glek_buffer_free(double* buf) { delete[] buf; }

/* ------------------------------------------------------------------ */
/* Benchmark family                                                    */
/* ------------------------------------------------------------------ */

glek_status glek_benchmark_kernel(const double* mu, double dt, size_t n,
                                  glek_series** out) {
  return guarded([&] {
    require(out != nullptr, "series output is null");
    *out = wrap(glekit::benchmark::kernel(to_point(mu, 2),
                                          glekit::TimeGrid{dt, n}));
  });
}

glek_status glek_benchmark_vacf(const double* mu, double dt, size_t n,
                                glek_series** out) {
  return guarded([&] {
    require(out != nullptr, "series output is null");
    *out = wrap(
        glekit::benchmark::vacf(to_point(mu, 2), glekit::TimeGrid{dt, n}));
  });
}

glek_status glek_benchmark_fvcf(const double* mu, double dt, size_t n,
                                glek_series** out) {
  return guarded([&] {
    require(out != nullptr, "series output is null");
    *out = wrap(
        glekit::benchmark::fvcf(to_point(mu, 2), glekit::TimeGrid{dt, n}));
  });
}

}  // extern "C"
