// glekit command-line front end. All numerical work goes through the public
// C API in glekit.h; this translation unit only parses arguments, shuttles
// files and prints JSON summaries.
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "glekit.h"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Failure carrying the process exit code (2 validation, 3 data request,
// 4 numeric) and the message for the JSON summary.
struct CliError {
  int code;
  std::string message;
};

void check(glek_status status) {
  if (status != GLEK_OK)
    throw CliError{static_cast<int>(status), glek_last_error()};
}

[[noreturn]] void fail(int code, const std::string& message) {
  throw CliError{code, message};
}

// RAII wrapper for the C handles so early exits cannot leak.
template <typename T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  explicit Handle(T* p) : p_(p) {}
  ~Handle() { Free(p_); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& other) noexcept : p_(std::exchange(other.p_, nullptr)) {}
  Handle& operator=(Handle&& other) noexcept {
    std::swap(p_, other.p_);
    return *this;
  }
  T** out() {
    Free(p_);
    p_ = nullptr;
    return &p_;
  }
  T* get() const { return p_; }
  explicit operator bool() const { return p_ != nullptr; }

 private:
  T* p_ = nullptr;
};

using Series = Handle<glek_series, glek_series_free>;
using Trajectory = Handle<glek_trajectory, glek_trajectory_free>;
using Expansion = Handle<glek_expansion, glek_expansion_free>;
using System = Handle<glek_system, glek_system_free>;
using Snapshots = Handle<glek_snapshots, glek_snapshots_free>;
using Surrogate = Handle<glek_surrogate, glek_surrogate_free>;
using Report = Handle<glek_active_report, glek_active_report_free>;

void emit(const json& summary) { std::cout << summary.dump(2) << "\n"; }

void atomic_write_file(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(2, "cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) fail(2, "failed while writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(2, "cannot move " + tmp.string() + " to " + path.string());
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(
                                       item[used])))
        ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(2, "cannot parse '" + item + "' as a number in '" + text + "'");
    }
  }
  if (values.empty()) fail(2, "expected a comma-separated number list");
  return values;
}

glek_beta_grid parse_beta_grid(const std::string& text) {
  const std::vector<double> parts = parse_doubles(text);
  if (parts.size() != 3)
    fail(2, "--beta-grid expects start,ratio,count; got '" + text + "'");
  if (parts[2] < 1.0 || parts[2] != std::floor(parts[2]))
    fail(2, "beta grid count must be a positive integer");
  return glek_beta_grid{parts[0], parts[1], static_cast<size_t>(parts[2])};
}

std::vector<double> series_to_vector(const glek_series* s) {
  const double* data = glek_series_values(s);
  return std::vector<double>(data, data + glek_series_size(s));
}

std::string tag_of(const std::vector<double>& mu) {
  char buf[64];
  check(glek_point_tag(mu.data(), mu.size(), buf, sizeof buf));
  return buf;
}

std::string kernel_file_of(const std::vector<double>& mu) {
  char buf[96];
  check(glek_kernel_filename(mu.data(), mu.size(), buf, sizeof buf));
  return buf;
}

// ------------------------------------------------------------------
// --config handling: a flat JSON document whose keys repeat the invoked
// subcommand's long option names in snake_case. Values given there override
// the command line. "version" (= 1) is mandatory; unknown keys are errors.
// ------------------------------------------------------------------

class ConfigOverrides {
 public:
  ConfigOverrides() = default;

  void load(const std::string& path,
            const std::set<std::string>& allowed_keys) {
    std::ifstream in(path);
    if (!in) fail(2, "cannot open config file " + path);
    try {
      doc_ = json::parse(in);
    } catch (const json::parse_error& e) {
      fail(2, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc_.is_object()) fail(2, "config must be a JSON object");
    if (!doc_.contains("version")) fail(2, "config needs a version field");
    if (!doc_["version"].is_number_integer() || doc_["version"] != 1)
      fail(2, "config version must be 1");
    for (const auto& item : doc_.items())
      if (item.key() != "version" && allowed_keys.count(item.key()) == 0)
        fail(2, "config contains an unknown key: " + item.key());
    loaded_ = true;
  }

  template <typename T>
  void apply(const char* key, T& value) const {
    if (!loaded_ || !doc_.contains(key)) return;
    try {
      value = doc_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(2, std::string("config key '") + key + "' has the wrong type");
    }
  }

  void apply_optional_u64(const char* key,
                          std::optional<std::uint64_t>& value) const {
    if (!loaded_ || !doc_.contains(key)) return;
    if (!doc_.at(key).is_number_unsigned() && !doc_.at(key).is_number_integer())
      fail(2, std::string("config key '") + key + "' must be an integer");
    value = doc_.at(key).get<std::uint64_t>();
  }

 private:
  json doc_;
  bool loaded_ = false;
};

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed) {
  if (!seed.has_value())
    fail(2, "this command is stochastic; --seed (or a config seed) is required");
  return *seed;
}

json series_summary(const glek_series* s) {
  return json{{"samples", glek_series_size(s)},
              {"dt", glek_series_dt(s)},
              {"t_offset", glek_series_t_offset(s)}};
}

// ------------------------------------------------------------------
// extract
// ------------------------------------------------------------------

struct ExtractOptions {
  std::string vacf;
  std::string fvcf;
  std::string output;
  std::string mode = "auto";
  double cond_threshold = 1e8;
  std::string beta_grid = "1,0.5,41";
  std::string config;
};

int cmd_extract(ExtractOptions opt) {
  ConfigOverrides config;
  if (!opt.config.empty()) {
    config.load(opt.config, {"vacf", "fvcf", "output", "mode",
                             "cond_threshold", "beta_grid"});
    config.apply("vacf", opt.vacf);
    config.apply("fvcf", opt.fvcf);
    config.apply("output", opt.output);
    config.apply("mode", opt.mode);
    config.apply("cond_threshold", opt.cond_threshold);
    config.apply("beta_grid", opt.beta_grid);
  }
  if (opt.vacf.empty()) fail(2, "--vacf is required");
  if (opt.output.empty()) fail(2, "--output is required");

  glek_extract_mode mode = GLEK_EXTRACT_AUTO;
  if (opt.mode == "direct")
    mode = GLEK_EXTRACT_DIRECT;
  else if (opt.mode == "tikhonov")
    mode = GLEK_EXTRACT_TIKHONOV;
  else if (opt.mode != "auto")
    fail(2, "--mode must be direct, tikhonov or auto");
  const glek_beta_grid betas = parse_beta_grid(opt.beta_grid);

  Series vacf;
  check(glek_series_read_csv(opt.vacf.c_str(), GLEK_SERIES_VACF, vacf.out()));

  Series fvcf;
  bool fvcf_derived = false;
  if (!opt.fvcf.empty()) {
    check(glek_series_read_csv(opt.fvcf.c_str(), GLEK_SERIES_FVCF,
                               fvcf.out()));
  } else {
    check(glek_derivative(vacf.get(), &betas, fvcf.out()));
    fvcf_derived = true;
  }

  double condition = 0.0;
  check(glek_condition_estimate(vacf.get(), fvcf.get(), &condition));

  Series kernel;
  check(glek_extract_kernel(vacf.get(), fvcf.get(), mode, opt.cond_threshold,
                            &betas, kernel.out()));
  check(glek_series_write_csv(kernel.get(), opt.output.c_str()));

  json summary = {{"version", 1},
                  {"command", "extract"},
                  {"mode", opt.mode},
                  {"fvcf_derived", fvcf_derived},
                  {"condition_estimate", condition},
                  {"kernel", series_summary(kernel.get())},
                  {"k0", glek_series_values(kernel.get())[0]},
                  {"output", opt.output}};
  emit(summary);
  return 0;
}

// ------------------------------------------------------------------
// train
// ------------------------------------------------------------------

struct TrainOptions {
  std::string manifest;
  std::string output;
  std::string method = "rom-gpr";
  double zeta_pod = 0.01;
  std::uint64_t time_stride = 1;
  int restarts = -1;
  int max_iters = -1;
  double tol = -1.0;
  std::optional<std::uint64_t> seed;
  std::string config;
};

glek_gpr_config gpr_config_from(int restarts, int max_iters, double tol,
                                std::uint64_t seed) {
  glek_gpr_config cfg = glek_gpr_config_default();
  if (restarts > 0) cfg.restarts = restarts;
  if (max_iters > 0) cfg.max_iters = max_iters;
  if (tol > 0.0) cfg.tol = tol;
  cfg.seed = seed;
  return cfg;
}

json surrogate_summary(const glek_surrogate* s) {
  json out = {{"method", glek_surrogate_method(s)},
              {"param_dim", glek_surrogate_param_dim(s)},
              {"training_points", glek_surrogate_training_count(s)}};
  if (std::string(glek_surrogate_method(s)) == "rom-gpr") {
    out["rank"] = glek_surrogate_rank(s);
    out["pod_rel_error"] = glek_surrogate_pod_error(s);
  }
  return out;
}

int cmd_train(TrainOptions opt) {
  ConfigOverrides config;
  if (!opt.config.empty()) {
    config.load(opt.config, {"manifest", "output", "method", "zeta_pod",
                             "time_stride", "restarts", "max_iters", "tol",
                             "seed"});
    config.apply("manifest", opt.manifest);
    config.apply("output", opt.output);
    config.apply("method", opt.method);
    config.apply("zeta_pod", opt.zeta_pod);
    config.apply("time_stride", opt.time_stride);
    config.apply("restarts", opt.restarts);
    config.apply("max_iters", opt.max_iters);
    config.apply("tol", opt.tol);
    config.apply_optional_u64("seed", opt.seed);
  }
  if (opt.manifest.empty()) fail(2, "--manifest is required");
  if (opt.output.empty()) fail(2, "--output is required");
  const glek_gpr_config gpr = gpr_config_from(opt.restarts, opt.max_iters,
                                              opt.tol, require_seed(opt.seed));

  Snapshots snapshots;
  check(glek_snapshots_read_manifest(opt.manifest.c_str(), snapshots.out()));

  Surrogate surrogate;
  if (opt.method == "gpr") {
    check(glek_train_direct(snapshots.get(), &gpr,
                            static_cast<size_t>(opt.time_stride),
                            surrogate.out()));
  } else if (opt.method == "rom-gpr") {
    check(glek_train_rom_gpr(snapshots.get(), opt.zeta_pod, &gpr,
                             surrogate.out()));
  } else {
    fail(2, "--method must be gpr or rom-gpr");
  }
  check(glek_surrogate_save(surrogate.get(), opt.output.c_str()));

  json summary = {{"version", 1},
                  {"command", "train"},
                  {"snapshots", glek_snapshots_count(snapshots.get())},
                  {"surrogate", surrogate_summary(surrogate.get())},
                  {"output", opt.output}};
  emit(summary);
  return 0;
}

// ------------------------------------------------------------------
// predict
// ------------------------------------------------------------------

struct PredictOptions {
  std::string surrogate;
  std::string mu;
  std::string output;
  std::string std_output;
  std::string config;
};

int cmd_predict(PredictOptions opt) {
  ConfigOverrides config;
  if (!opt.config.empty()) {
    config.load(opt.config, {"surrogate", "mu", "output", "std_output"});
    config.apply("surrogate", opt.surrogate);
    config.apply("mu", opt.mu);
    config.apply("output", opt.output);
    config.apply("std_output", opt.std_output);
  }
  if (opt.surrogate.empty()) fail(2, "--surrogate is required");
  if (opt.mu.empty()) fail(2, "--mu is required");
  if (opt.output.empty()) fail(2, "--output is required");
  const std::vector<double> mu = parse_doubles(opt.mu);

  Surrogate surrogate;
  check(glek_surrogate_load(opt.surrogate.c_str(), surrogate.out()));
  if (mu.size() != glek_surrogate_param_dim(surrogate.get()))
    fail(2, "--mu has " + std::to_string(mu.size()) +
                " coordinates; the surrogate expects " +
                std::to_string(glek_surrogate_param_dim(surrogate.get())));

  const size_t rank = glek_surrogate_rank(surrogate.get());
  std::vector<double> mode_stds(rank, 0.0);
  Series kernel;
  Series pointwise;
  check(glek_surrogate_predict(surrogate.get(), mu.data(), kernel.out(),
                               pointwise.out(),
                               rank > 0 ? mode_stds.data() : nullptr));
  check(glek_series_write_csv(kernel.get(), opt.output.c_str()));
  if (!opt.std_output.empty())
    check(glek_series_write_csv(pointwise.get(), opt.std_output.c_str()));

  json summary = {{"version", 1},
                  {"command", "predict"},
                  {"mu", mu},
                  {"surrogate", surrogate_summary(surrogate.get())},
                  {"kernel", series_summary(kernel.get())},
                  {"output", opt.output}};
  if (rank > 0) summary["mode_std"] = mode_stds;
  if (!opt.std_output.empty()) summary["std_output"] = opt.std_output;

  // When the query coincides with a stored training point, report the
  // reconstruction error against that snapshot.
  const size_t n_train = glek_surrogate_training_count(surrogate.get());
  const size_t dim = glek_surrogate_param_dim(surrogate.get());
  std::vector<double> candidate(dim);
  for (size_t i = 0; i < n_train; ++i) {
    check(glek_surrogate_training_point(surrogate.get(), i, candidate.data()));
    if (candidate != mu) continue;
    Series truth;
    check(glek_surrogate_training_kernel(surrogate.get(), i, truth.out()));
    double rel = 0.0;
    check(glek_relative_error(kernel.get(), truth.get(), &rel));
    summary["training_point"] = true;
    summary["training_rel_error"] = rel;
    break;
  }
  emit(summary);
  return 0;
}

// ------------------------------------------------------------------
// active-learn
// ------------------------------------------------------------------

struct ActiveOptions {
  std::string pool;
  std::string data_dir;
  std::string output;
  double zeta_al = 0.01;
  double zeta_pod = 0.01;
  std::uint64_t budget = 100;
  int restarts = -1;
  int max_iters = -1;
  double tol = -1.0;
  std::optional<std::uint64_t> seed;
  std::string config;
};

int cmd_active_learn(ActiveOptions opt) {
  ConfigOverrides config;
  if (!opt.config.empty()) {
    config.load(opt.config,
                {"pool", "data_dir", "output", "zeta_al", "zeta_pod", "budget",
                 "restarts", "max_iters", "tol", "seed"});
    config.apply("pool", opt.pool);
    config.apply("data_dir", opt.data_dir);
    config.apply("output", opt.output);
    config.apply("zeta_al", opt.zeta_al);
    config.apply("zeta_pod", opt.zeta_pod);
    config.apply("budget", opt.budget);
    config.apply("restarts", opt.restarts);
    config.apply("max_iters", opt.max_iters);
    config.apply("tol", opt.tol);
    config.apply_optional_u64("seed", opt.seed);
  }
  if (opt.pool.empty()) fail(2, "--pool is required");
  if (opt.data_dir.empty()) fail(2, "--data-dir is required");
  if (opt.output.empty()) fail(2, "--output is required");
  const glek_gpr_config gpr = gpr_config_from(opt.restarts, opt.max_iters,
                                              opt.tol, require_seed(opt.seed));

  double* pool_flat = nullptr;
  double* init_flat = nullptr;
  size_t n_pool = 0, n_initial = 0, dim = 0;
  check(glek_pool_read_json(opt.pool.c_str(), &pool_flat, &n_pool, &init_flat,
                            &n_initial, &dim));
  const std::vector<double> pool(pool_flat, pool_flat + n_pool * dim);
  const std::vector<double> initial(init_flat, init_flat + n_initial * dim);
  glek_buffer_free(pool_flat);
  glek_buffer_free(init_flat);
  if (n_initial == 0)
    fail(2, "pool document provides no initial design points");

  Surrogate surrogate;
  Report report;
  const glek_status status = glek_active_learn_files(
      opt.data_dir.c_str(), pool.data(), n_pool, dim, initial.data(),
      n_initial, opt.zeta_al, opt.zeta_pod,
      static_cast<size_t>(opt.budget), &gpr, surrogate.out(), report.out());

  if (status == GLEK_ERR_DATA_REQUEST) {
    // The batch interaction point: persist the request and signal exit 3 so
    // an external pipeline can produce the kernel and re-invoke.
    const std::string message = glek_last_error();
    const size_t point_dim = glek_last_request(nullptr, 0);
    std::vector<double> point(point_dim);
    glek_last_request(point.data(), point_dim);
    const json request = {{"version", 1},
                          {"point", point},
                          {"tag", tag_of(point)},
                          {"file", kernel_file_of(point)}};
    const fs::path request_path = fs::path(opt.data_dir) / "request.json";
    atomic_write_file(request_path, request.dump(2) + "\n");
    json summary = {{"version", 1},
                    {"command", "active-learn"},
                    {"status", "data-request"},
                    {"request", request},
                    {"request_file", request_path.string()},
                    {"error", {{"code", 3}, {"message", message}}}};
    emit(summary);
    return 3;
  }
  check(status);
  check(glek_surrogate_save(surrogate.get(), opt.output.c_str()));

  json sampled = json::array();
  std::vector<double> point(dim);
  for (size_t i = 0; i < glek_active_report_samples(report.get()); ++i) {
    check(glek_active_report_sample(report.get(), i, point.data()));
    sampled.push_back(point);
  }
  json history = json::array();
  for (size_t i = 0; i < glek_active_report_history_length(report.get());
       ++i) {
    double sigma = 0.0;
    check(glek_active_report_history(report.get(), i, point.data(), &sigma));
    history.push_back(json{{"point", point}, {"sigma_bar", sigma}});
  }
  json summary = {{"version", 1},
                  {"command", "active-learn"},
                  {"status", "ok"},
                  {"converged", glek_active_report_converged(report.get()) != 0},
                  {"final_max_sigma",
                   glek_active_report_final_sigma(report.get())},
                  {"samples", sampled},
                  {"history", history},
                  {"surrogate", surrogate_summary(surrogate.get())},
                  {"output", opt.output}};
  emit(summary);
  return 0;
}

// ------------------------------------------------------------------
// fit-kernel
// ------------------------------------------------------------------

struct FitOptions {
  std::string input;
  std::string output;
  std::uint64_t terms = 0;
  int starts = -1;
  double residual_ceiling = -1.0;
  std::optional<std::uint64_t> seed;
  std::string config;
};

int cmd_fit_kernel(FitOptions opt) {
  ConfigOverrides config;
  if (!opt.config.empty()) {
    config.load(opt.config, {"input", "output", "terms", "starts",
                             "residual_ceiling", "seed"});
    config.apply("input", opt.input);
    config.apply("output", opt.output);
    config.apply("terms", opt.terms);
    config.apply("starts", opt.starts);
    config.apply("residual_ceiling", opt.residual_ceiling);
    config.apply_optional_u64("seed", opt.seed);
  }
  if (opt.input.empty()) fail(2, "--input is required");
  if (opt.output.empty()) fail(2, "--output is required");
  if (opt.terms == 0) fail(2, "--terms must be at least 1");
  const std::uint64_t seed = require_seed(opt.seed);

  Series kernel;
  check(glek_series_read_csv(opt.input.c_str(), GLEK_SERIES_KERNEL,
                             kernel.out()));

  Expansion expansion;
  double rel_residual = 0.0;
  check(glek_fit_expansion(kernel.get(), static_cast<size_t>(opt.terms),
                           opt.starts, seed, opt.residual_ceiling,
                           expansion.out(), &rel_residual));
  check(glek_expansion_write_json(expansion.get(), rel_residual,
                                  opt.output.c_str()));

  std::vector<double> abcq(4 * glek_expansion_terms(expansion.get()));
  check(glek_expansion_coefficients(expansion.get(), abcq.data()));
  json terms = json::array();
  for (size_t i = 0; i < glek_expansion_terms(expansion.get()); ++i)
    terms.push_back(json{{"a", abcq[4 * i]},
                         {"b", abcq[4 * i + 1]},
                         {"c", abcq[4 * i + 2]},
                         {"q", abcq[4 * i + 3]}});
  json summary = {{"version", 1},
                  {"command", "fit-kernel"},
                  {"terms", terms},
                  {"rel_residual", rel_residual},
                  {"output", opt.output}};
  emit(summary);
  return 0;
}

// ------------------------------------------------------------------
// simulate
// ------------------------------------------------------------------

struct SimulateOptions {
  std::string fit;
  std::string out;
  double mass = 1.0;
  double kbt = 1.0;
  std::uint64_t particles = 0;
  std::uint64_t steps = 0;
  std::uint64_t record_every = 1;
  std::uint64_t dim = 1;
  double dt = 0.0;
  std::string scheme = "implicit-vv";
  std::optional<std::uint64_t> seed;
  std::string config;
};

int cmd_simulate(SimulateOptions opt) {
  ConfigOverrides config;
  if (!opt.config.empty()) {
    config.load(opt.config,
                {"fit", "out", "mass", "kbt", "particles", "steps",
                 "record_every", "dim", "dt", "scheme", "seed"});
    config.apply("fit", opt.fit);
    config.apply("out", opt.out);
    config.apply("mass", opt.mass);
    config.apply("kbt", opt.kbt);
    config.apply("particles", opt.particles);
    config.apply("steps", opt.steps);
    config.apply("record_every", opt.record_every);
    config.apply("dim", opt.dim);
    config.apply("dt", opt.dt);
    config.apply("scheme", opt.scheme);
    config.apply_optional_u64("seed", opt.seed);
  }
  if (opt.fit.empty()) fail(2, "--fit is required");
  if (opt.out.empty()) fail(2, "--out is required");
  if (opt.particles == 0) fail(2, "--particles must be at least 1");
  if (opt.steps == 0) fail(2, "--steps must be at least 1");
  const std::uint64_t seed = require_seed(opt.seed);

  glek_scheme scheme = GLEK_SCHEME_IMPLICIT_VV;
  if (opt.scheme == "exact-ou")
    scheme = GLEK_SCHEME_EXACT_OU;
  else if (opt.scheme != "implicit-vv")
    fail(2, "--scheme must be implicit-vv or exact-ou");

  Expansion expansion;
  check(glek_expansion_read_json(opt.fit.c_str(), expansion.out(), nullptr));
  System system;
  check(glek_system_new(expansion.get(), opt.mass, opt.kbt, system.out()));

  double dt = opt.dt;
  if (!(dt > 0.0)) check(glek_default_time_step(expansion.get(), &dt));

  Trajectory traj;
  check(glek_simulate(system.get(), dt, static_cast<size_t>(opt.steps),
                      static_cast<size_t>(opt.record_every),
                      static_cast<size_t>(opt.particles),
                      static_cast<size_t>(opt.dim), scheme, seed, traj.out()));
  check(glek_trajectory_write_csv(traj.get(), opt.out.c_str()));

  json summary = {{"version", 1},
                  {"command", "simulate"},
                  {"scheme", opt.scheme},
                  {"dt", dt},
                  {"steps", opt.steps},
                  {"particles", opt.particles},
                  {"dim", opt.dim},
                  {"frames", glek_trajectory_frames(traj.get())},
                  {"dt_record", glek_trajectory_dt(traj.get())},
                  {"output", opt.out},
                  {"meta", opt.out + ".meta.json"}};
  emit(summary);
  return 0;
}

// ------------------------------------------------------------------
// analyze
// ------------------------------------------------------------------

struct AnalyzeOptions {
  std::string traj;
  std::string vacf_out;
  std::string msd_out;
  std::string diffusion_out;
  std::uint64_t max_lag = 0;  // 0 = half the frame count
  std::string config;
};

int cmd_analyze(AnalyzeOptions opt) {
  ConfigOverrides config;
  if (!opt.config.empty()) {
    config.load(opt.config, {"traj", "vacf", "msd", "diffusion", "max_lag"});
    config.apply("traj", opt.traj);
    config.apply("vacf", opt.vacf_out);
    config.apply("msd", opt.msd_out);
    config.apply("diffusion", opt.diffusion_out);
    config.apply("max_lag", opt.max_lag);
  }
  if (opt.traj.empty()) fail(2, "--traj is required");
  if (opt.vacf_out.empty() && opt.msd_out.empty() && opt.diffusion_out.empty())
    fail(2, "nothing to do: give at least one of --vacf, --msd, --diffusion");

  Trajectory traj;
  check(glek_trajectory_read_csv(opt.traj.c_str(), nullptr, traj.out()));
  const size_t frames = glek_trajectory_frames(traj.get());
  size_t max_lag = static_cast<size_t>(opt.max_lag);
  if (max_lag == 0) max_lag = frames > 2 ? frames / 2 : 1;
  if (max_lag + 1 > frames)
    fail(2, "--max-lag must be smaller than the frame count");

  json summary = {{"version", 1},
                  {"command", "analyze"},
                  {"frames", frames},
                  {"particles", glek_trajectory_particles(traj.get())},
                  {"dim", glek_trajectory_dim(traj.get())},
                  {"max_lag", max_lag}};

  Series vacf;
  if (!opt.vacf_out.empty() || !opt.diffusion_out.empty()) {
    check(glek_vacf(traj.get(), max_lag, vacf.out()));
    if (!opt.vacf_out.empty()) {
      check(glek_series_write_csv(vacf.get(), opt.vacf_out.c_str()));
      summary["vacf"] = opt.vacf_out;
      summary["vacf_zero"] = glek_series_values(vacf.get())[0];
    }
  }
  if (!opt.msd_out.empty()) {
    Series msd;
    check(glek_msd(traj.get(), max_lag, msd.out()));
    check(glek_series_write_csv(msd.get(), opt.msd_out.c_str()));
    summary["msd"] = opt.msd_out;
  }
  if (!opt.diffusion_out.empty()) {
    Series diffusion;
    check(glek_diffusion_coefficient(
        vacf.get(), glek_trajectory_dim(traj.get()), diffusion.out()));
    check(glek_series_write_csv(diffusion.get(), opt.diffusion_out.c_str()));
    summary["diffusion"] = opt.diffusion_out;
    const std::vector<double> d = series_to_vector(diffusion.get());
    summary["diffusion_final"] = d.back();
  }
  emit(summary);
  return 0;
}

// ------------------------------------------------------------------
// synth
// ------------------------------------------------------------------

struct SynthOptions {
  std::string mu;
  std::string out_dir;
  double dt = 1e-2;
  double t_final = 20.0;
  std::string config;
};

int cmd_synth(SynthOptions opt) {
  ConfigOverrides config;
  if (!opt.config.empty()) {
    config.load(opt.config, {"mu", "out_dir", "dt", "t_final"});
    config.apply("mu", opt.mu);
    config.apply("out_dir", opt.out_dir);
    config.apply("dt", opt.dt);
    config.apply("t_final", opt.t_final);
  }
  if (opt.mu.empty()) fail(2, "--mu is required");
  if (opt.out_dir.empty()) fail(2, "--out-dir is required");
  const std::vector<double> mu = parse_doubles(opt.mu);
  if (mu.size() != 2) fail(2, "the benchmark family takes exactly 2 parameters");
  if (!(opt.dt > 0.0) || !(opt.t_final > opt.dt))
    fail(2, "need dt > 0 and t_final > dt");
  const size_t n = static_cast<size_t>(std::llround(opt.t_final / opt.dt)) + 1;

  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) fail(2, "cannot create output directory " + opt.out_dir);

  Series kernel, vacf, fvcf;
  check(glek_benchmark_kernel(mu.data(), opt.dt, n, kernel.out()));
  check(glek_benchmark_vacf(mu.data(), opt.dt, n, vacf.out()));
  check(glek_benchmark_fvcf(mu.data(), opt.dt, n, fvcf.out()));

  const fs::path dir(opt.out_dir);
  const std::string oracle_name = kernel_file_of(mu);
  check(glek_series_write_csv(kernel.get(), (dir / "kernel.csv").c_str()));
  check(glek_series_write_csv(kernel.get(), (dir / oracle_name).c_str()));
  check(glek_series_write_csv(vacf.get(), (dir / "vacf.csv").c_str()));
  check(glek_series_write_csv(fvcf.get(), (dir / "fvcf.csv").c_str()));

  json summary = {{"version", 1},
                  {"command", "synth"},
                  {"mu", mu},
                  {"tag", tag_of(mu)},
                  {"samples", n},
                  {"dt", opt.dt},
                  {"files",
                   {(dir / "kernel.csv").string(), (dir / oracle_name).string(),
                    (dir / "vacf.csv").string(), (dir / "fvcf.csv").string()}}};
  emit(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GLE memory-kernel extraction, transferable surrogates and "
               "extended Markovian dynamics"};
  app.require_subcommand(1);

  ExtractOptions extract_opt;
  auto* extract = app.add_subcommand(
      "extract", "Recover a memory kernel from VACF (and FVCF) data");
  extract->add_option("--vacf", extract_opt.vacf, "VACF CSV input");
  extract->add_option("--fvcf", extract_opt.fvcf,
                      "FVCF CSV input (derived from the VACF when absent)");
  extract->add_option("--output", extract_opt.output, "kernel CSV output");
  extract->add_option("--mode", extract_opt.mode,
                      "direct, tikhonov or auto (default auto)");
  extract->add_option("--cond-threshold", extract_opt.cond_threshold,
                      "condition threshold for auto mode");
  extract->add_option("--beta-grid", extract_opt.beta_grid,
                      "regularization ladder start,ratio,count");
  extract->add_option("--config", extract_opt.config, "JSON config file");

  TrainOptions train_opt;
  auto* train =
      app.add_subcommand("train", "Train a kernel surrogate from snapshots");
  train->add_option("--manifest", train_opt.manifest,
                    "snapshot manifest JSON");
  train->add_option("--output", train_opt.output, "surrogate JSON output");
  train->add_option("--method", train_opt.method, "gpr or rom-gpr");
  train->add_option("--zeta-pod", train_opt.zeta_pod,
                    "POD truncation tolerance (rom-gpr)");
  train->add_option("--time-stride", train_opt.time_stride,
                    "time subsampling stride (gpr)");
  train->add_option("--restarts", train_opt.restarts, "GPR restarts");
  train->add_option("--max-iters", train_opt.max_iters,
                    "GPR optimizer iteration cap");
  train->add_option("--tol", train_opt.tol, "GPR optimizer tolerance");
  train->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t v) { train_opt.seed = v; },
      "RNG seed (required)");
  train->add_option("--config", train_opt.config, "JSON config file");

  PredictOptions predict_opt;
  auto* predict =
      app.add_subcommand("predict", "Predict a kernel at a parameter point");
  predict->add_option("--surrogate", predict_opt.surrogate,
                      "surrogate JSON input");
  predict->add_option("--mu", predict_opt.mu,
                      "parameter point v1,v2,...");
  predict->add_option("--output", predict_opt.output, "kernel CSV output");
  predict->add_option("--std-output", predict_opt.std_output,
                      "pointwise posterior std CSV output");
  predict->add_option("--config", predict_opt.config, "JSON config file");

  ActiveOptions active_opt;
  auto* active = app.add_subcommand(
      "active-learn", "Uncertainty-guided sampling over a candidate pool");
  active->add_option("--pool", active_opt.pool, "pool JSON document");
  active->add_option("--data-dir", active_opt.data_dir,
                     "directory of kernel_<tag>.csv files");
  active->add_option("--output", active_opt.output, "surrogate JSON output");
  active->add_option("--zeta-al", active_opt.zeta_al,
                     "acquisition convergence threshold");
  active->add_option("--zeta-pod", active_opt.zeta_pod,
                     "POD truncation tolerance");
  active->add_option("--budget", active_opt.budget, "total sample cap");
  active->add_option("--restarts", active_opt.restarts, "GPR restarts");
  active->add_option("--max-iters", active_opt.max_iters,
                     "GPR optimizer iteration cap");
  active->add_option("--tol", active_opt.tol, "GPR optimizer tolerance");
  active->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t v) { active_opt.seed = v; },
      "RNG seed (required)");
  active->add_option("--config", active_opt.config, "JSON config file");

  FitOptions fit_opt;
  auto* fit = app.add_subcommand(
      "fit-kernel", "Fit a damped-oscillator expansion to a kernel");
  fit->add_option("--input", fit_opt.input, "kernel CSV input");
  fit->add_option("--output", fit_opt.output, "expansion JSON output");
  fit->add_option("--terms", fit_opt.terms, "number of oscillator terms");
  fit->add_option("--starts", fit_opt.starts, "multi-start count");
  fit->add_option("--residual-ceiling", fit_opt.residual_ceiling,
                  "acceptable relative residual ceiling");
  fit->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t v) { fit_opt.seed = v; },
      "RNG seed (required)");
  fit->add_option("--config", fit_opt.config, "JSON config file");

  SimulateOptions sim_opt;
  auto* simulate = app.add_subcommand(
      "simulate", "Run the extended Markovian dynamics for a fitted kernel");
  simulate->add_option("--fit", sim_opt.fit, "expansion JSON input");
  simulate->add_option("--out", sim_opt.out, "trajectory CSV output");
  simulate->add_option("--mass", sim_opt.mass, "CG particle mass");
  simulate->add_option("--kbt", sim_opt.kbt, "thermal energy kB*T");
  simulate->add_option("--particles", sim_opt.particles, "ensemble size");
  simulate->add_option("--steps", sim_opt.steps, "number of time steps");
  simulate->add_option("--record-every", sim_opt.record_every,
                       "record every this many steps");
  simulate->add_option("--dim", sim_opt.dim, "spatial dimension (1-3)");
  simulate->add_option("--dt", sim_opt.dt,
                       "time step (0 = stability default)");
  simulate->add_option("--scheme", sim_opt.scheme,
                       "implicit-vv or exact-ou");
  simulate->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t v) { sim_opt.seed = v; },
      "RNG seed (required)");
  simulate->add_option("--config", sim_opt.config, "JSON config file");

  AnalyzeOptions analyze_opt;
  auto* analyze = app.add_subcommand(
      "analyze", "Compute VACF / MSD / diffusion curves from a trajectory");
  analyze->add_option("--traj", analyze_opt.traj, "trajectory CSV input");
  analyze->add_option("--vacf", analyze_opt.vacf_out, "VACF CSV output");
  analyze->add_option("--msd", analyze_opt.msd_out, "MSD CSV output");
  analyze->add_option("--diffusion", analyze_opt.diffusion_out,
                      "running diffusion coefficient CSV output");
  analyze->add_option("--max-lag", analyze_opt.max_lag,
                      "largest lag in frames (0 = half the trajectory)");
  analyze->add_option("--config", analyze_opt.config, "JSON config file");

  SynthOptions synth_opt;
  auto* synth = app.add_subcommand(
      "synth", "Emit closed-form benchmark kernels and correlations");
  synth->add_option("--mu", synth_opt.mu, "family parameters v1,v2");
  synth->add_option("--out-dir", synth_opt.out_dir, "output directory");
  synth->add_option("--dt", synth_opt.dt, "grid spacing");
  synth->add_option("--t-final", synth_opt.t_final, "grid end time");
  synth->add_option("--config", synth_opt.config, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string command = "unknown";
  try {
    if (extract->parsed()) {
      command = "extract";
      return cmd_extract(std::move(extract_opt));
    }
    if (train->parsed()) {
      command = "train";
      return cmd_train(std::move(train_opt));
    }
    if (predict->parsed()) {
      command = "predict";
      return cmd_predict(std::move(predict_opt));
    }
    if (active->parsed()) {
      command = "active-learn";
      return cmd_active_learn(std::move(active_opt));
    }
    if (fit->parsed()) {
      command = "fit-kernel";
      return cmd_fit_kernel(std::move(fit_opt));
    }
    if (simulate->parsed()) {
      command = "simulate";
      return cmd_simulate(std::move(sim_opt));
    }
    if (analyze->parsed()) {
      command = "analyze";
      return cmd_analyze(std::move(analyze_opt));
    }
    if (synth->parsed()) {
      command = "synth";
      return cmd_synth(std::move(synth_opt));
    }
  } catch (const CliError& e) {
    emit(json{{"version", 1},
              {"command", command},
              {"error", {{"code", e.code}, {"message", e.message}}}});
    return e.code;
  } catch (const std::exception& e) {
    emit(json{{"version", 1},
              {"command", command},
              {"error", {{"code", 4}, {"message", e.what()}}}});
    return 4;
  }
  return 2;
}
