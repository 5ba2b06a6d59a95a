#include "glekit/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace glekit {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || (end != nullptr && *end != '\0'))
    throw ValidationError(context + ": cannot parse number '" + token + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream stream(line);
  while (std::getline(stream, token, ',')) out.push_back(token);
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " +
                          e.what());
  }
}

void require_version(const json& doc, const std::filesystem::path& path) {
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != 1)
    throw ValidationError(path.string() + ": missing or unsupported version");
}

json grid_to_json(const TimeGrid& grid) {
  return json{{"dt", grid.dt}, {"n_t", grid.n_t}};
}

TimeGrid grid_from_json(const json& j) {
  TimeGrid grid;
  grid.dt = j.at("dt").get<double>();
  grid.n_t = j.at("n_t").get<std::size_t>();
  grid.validate();
  return grid;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ValidationError(std::string(what) + " must be a non-empty array");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ValidationError(std::string(what) + " rows have unequal lengths");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          j[i][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array())
    throw ValidationError(std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json points_to_json(const std::vector<ParameterPoint>& points) {
  json out = json::array();
  for (const auto& p : points) out.push_back(p.coords);
  return out;
}

std::vector<ParameterPoint> points_from_json(const json& j, const char* what) {
  if (!j.is_array())
    throw ValidationError(std::string(what) + " must be an array");
  std::vector<ParameterPoint> out;
  out.reserve(j.size());
  for (const auto& row : j) {
    ParameterPoint p;
    p.coords = row.get<std::vector<double>>();
    p.validate();
    out.push_back(std::move(p));
  }
  return out;
}

json gpr_to_json(const GprModel& model) {
  const GprHyperparameters& hp = model.standardized_hyperparameters();
  return json{{"theta_f", hp.theta_f},
              {"theta_l", vector_to_json(hp.theta_l)},
              {"sigma2", hp.sigma2},
              {"x_mean", vector_to_json(model.x_mean())},
              {"x_scale", vector_to_json(model.x_scale())},
              {"y_mean", model.y_mean()},
              {"y_scale", model.y_scale()},
              {"x", matrix_to_json(model.training_inputs())},
              {"y", vector_to_json(model.training_outputs())}};
}

GprModel gpr_from_json(const json& j) {
  GprHyperparameters hp;
  hp.theta_f = j.at("theta_f").get<double>();
  hp.theta_l = vector_from_json(j.at("theta_l"), "theta_l");
  hp.sigma2 = j.at("sigma2").get<double>();
  return GprModel::restore(matrix_from_json(j.at("x"), "x"),
                           vector_from_json(j.at("y"), "y"),
                           vector_from_json(j.at("x_mean"), "x_mean"),
                           vector_from_json(j.at("x_scale"), "x_scale"),
                           j.at("y_mean").get<double>(),
                           j.at("y_scale").get<double>(), hp);
}

json snapshots_to_json(const SnapshotSet& snapshots) {
  json out{{"grid", grid_to_json(snapshots.grid)},
           {"t_offset", snapshots.t_offset},
           {"points", points_to_json(snapshots.points)},
           {"kernels", matrix_to_json(snapshots.kernels)}};
  if (!snapshots.axis_names.empty()) out["axes"] = snapshots.axis_names;
  return out;
}

SnapshotSet snapshots_from_json(const json& j) {
  SnapshotSet s;
  s.grid = grid_from_json(j.at("grid"));
  s.t_offset = j.at("t_offset").get<double>();
  s.points = points_from_json(j.at("points"), "points");
  s.kernels = matrix_from_json(j.at("kernels"), "kernels");
  if (j.contains("axes"))
    s.axis_names = j.at("axes").get<std::vector<std::string>>();
  s.validate();
  return s;
}

}  // namespace

void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw ValidationError("cannot move " + tmp.string() + " to " +
                          path.string() + ": " + ec.message());
}

void write_series_csv(const std::filesystem::path& path,
                      const CorrelationSeries& series) {
  series.validate();
  std::string out = "t,value\n";
  out.reserve(series.size() * 24 + 16);
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += fmt17(series.time(i));
    out += ',';
    out += fmt17(series.values[i]);
    out += '\n';
  }
  atomic_write_text(path, out);
}

CorrelationSeries read_series_csv(const std::filesystem::path& path,
                                  SeriesKind kind) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
                                     std::vector<std::string>{"t", "value"})
    throw ValidationError(path.string() + ": expected header 't,value'");

  std::vector<double> times;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tokens = split_csv_line(line);
    if (tokens.size() != 2)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected two columns");
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    times.push_back(parse_double(tokens[0], ctx));
    values.push_back(parse_double(tokens[1], ctx));
  }
  if (times.size() < 2)
    throw ValidationError(path.string() + ": needs at least two samples");

  const double dt = times[1] - times[0];
  if (!(dt > 0.0))
    throw ValidationError(path.string() + ": time column must increase");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expected = times[0] + static_cast<double>(i) * dt;
    if (std::abs(times[i] - expected) > 1e-6 * dt)
      throw ValidationError(path.string() + ": time column is not uniform");
  }
  return make_series(TimeGrid{dt, times.size()}, kind, std::move(values),
                     times[0]);
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const CgTrajectory& traj) {
  traj.validate();
  // Streamed rather than buffered: trajectories can be large.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << "frame,particle,axis,position,momentum\n";
    for (std::size_t f = 0; f < traj.n_frames; ++f)
      for (std::size_t p = 0; p < traj.n_particles; ++p)
        for (std::size_t a = 0; a < traj.dim; ++a)
          out << f << ',' << p << ',' << a << ','
              << fmt17(traj.position(f, p, a)) << ','
              << fmt17(traj.momentum(f, p, a)) << '\n';
    out.flush();
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw ValidationError("cannot move " + tmp.string() + " to " +
                          path.string() + ": " + ec.message());

  const json meta{{"version", 1},
                  {"mass", traj.mass},
                  {"dt_record", traj.dt_record},
                  {"dim", traj.dim}};
  atomic_write_text(path.string() + ".meta.json", meta.dump(2) + "\n");
}

CgTrajectory read_trajectory_csv(const std::filesystem::path& path,
                                 const std::filesystem::path& meta_path) {
  const std::filesystem::path meta_file =
      meta_path.empty() ? std::filesystem::path(path.string() + ".meta.json")
                        : meta_path;
  const json meta = parse_json(meta_file);
  require_version(meta, meta_file);
  for (const auto& [key, value] : meta.items()) {
    (void)value;
    if (key != "version" && key != "mass" && key != "dt_record" &&
        key != "dim")
      throw ValidationError(meta_file.string() + ": unknown key '" + key +
                            "'");
  }

  CgTrajectory traj;
  traj.mass = meta.at("mass").get<double>();
  traj.dt_record = meta.at("dt_record").get<double>();
  traj.dim = meta.at("dim").get<std::size_t>();

  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      split_csv_line(line) != std::vector<std::string>{"frame", "particle",
                                                       "axis", "position",
                                                       "momentum"})
    throw ValidationError(
        path.string() +
        ": expected header 'frame,particle,axis,position,momentum'");

  struct Row {
    std::size_t frame, particle, axis;
    double position, momentum;
  };
  std::vector<Row> rows;
  std::size_t max_frame = 0;
  std::size_t max_particle = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tokens = split_csv_line(line);
    if (tokens.size() != 5)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected five columns");
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    Row r;
    r.frame = static_cast<std::size_t>(parse_double(tokens[0], ctx));
    r.particle = static_cast<std::size_t>(parse_double(tokens[1], ctx));
    r.axis = static_cast<std::size_t>(parse_double(tokens[2], ctx));
    r.position = parse_double(tokens[3], ctx);
    r.momentum = parse_double(tokens[4], ctx);
    max_frame = std::max(max_frame, r.frame);
    max_particle = std::max(max_particle, r.particle);
    rows.push_back(r);
  }
  if (rows.empty())
    throw ValidationError(path.string() + ": trajectory table is empty");

  traj.n_frames = max_frame + 1;
  traj.n_particles = max_particle + 1;
  const std::size_t expected = traj.n_frames * traj.n_particles * traj.dim;
  if (rows.size() != expected)
    throw ValidationError(path.string() +
                          ": row count does not form a dense table");
  traj.positions.assign(expected, 0.0);
  traj.momenta.assign(expected, 0.0);
  std::vector<char> seen(expected, 0);
  for (const auto& r : rows) {
    if (r.axis >= traj.dim)
      throw ValidationError(path.string() + ": axis out of range");
    const std::size_t idx = traj.index(r.frame, r.particle, r.axis);
    if (seen[idx]++)
      throw ValidationError(path.string() + ": duplicate table entry");
    traj.positions[idx] = r.position;
    traj.momenta[idx] = r.momentum;
  }
  traj.validate();
  return traj;
}

void write_snapshot_manifest(const std::filesystem::path& path,
                             const SnapshotSet& snapshots,
                             const std::vector<std::string>& kernel_files) {
  snapshots.validate();
  if (kernel_files.size() != snapshots.n_points())
    throw ValidationError("need one kernel file per snapshot");
  json entries = json::array();
  for (std::size_t i = 0; i < snapshots.n_points(); ++i)
    entries.push_back(
        json{{"mu", snapshots.points[i].coords}, {"kernel", kernel_files[i]}});
  json doc{{"version", 1}, {"snapshots", std::move(entries)}};
  if (!snapshots.axis_names.empty()) doc["axes"] = snapshots.axis_names;
  atomic_write_text(path, doc.dump(2) + "\n");
}

SnapshotSet read_snapshot_manifest(const std::filesystem::path& path) {
  const json doc = parse_json(path);
  require_version(doc, path);
  if (!doc.contains("snapshots") || !doc["snapshots"].is_array() ||
      doc["snapshots"].empty())
    throw ValidationError(path.string() + ": no snapshots listed");

  const std::filesystem::path base = path.parent_path();
  std::vector<ParameterPoint> points;
  std::vector<CorrelationSeries> kernels;
  for (const auto& entry : doc["snapshots"]) {
    ParameterPoint p;
    p.coords = entry.at("mu").get<std::vector<double>>();
    p.validate();
    std::filesystem::path kernel_path = entry.at("kernel").get<std::string>();
    if (kernel_path.is_relative()) kernel_path = base / kernel_path;
    points.push_back(std::move(p));
    kernels.push_back(read_series_csv(kernel_path, SeriesKind::kernel));
  }
  SnapshotSet s = make_snapshot_set(points, kernels);
  if (doc.contains("axes")) {
    s.axis_names = doc.at("axes").get<std::vector<std::string>>();
    s.validate();
  }
  return s;
}

namespace {

json direct_to_json(const DirectSurrogate& s) {
  return json{{"version", 1},
              {"method", "gpr"},
              {"param_dim", s.param_dim},
              {"grid", grid_to_json(s.grid)},
              {"t_offset", s.t_offset},
              {"time_stride", s.time_stride},
              {"model", gpr_to_json(s.model)},
              {"training", snapshots_to_json(s.training)}};
}

json rom_to_json(const RomGprSurrogate& s) {
  json pod{{"eigenvalues", vector_to_json(s.basis.eigenvalues)},
           {"rank", s.basis.rank},
           {"rel_error", s.basis.rel_error},
           {"mean", vector_to_json(s.basis.mean)},
           {"bases", matrix_to_json(s.basis.bases)},
           {"training_modes", matrix_to_json(s.basis.training_modes)}};
  json models = json::array();
  for (const auto& m : s.mode_models) models.push_back(gpr_to_json(m));
  return json{{"version", 1},
              {"method", "rom-gpr"},
              {"param_dim", s.param_dim},
              {"grid", grid_to_json(s.basis.grid)},
              {"t_offset", s.basis.t_offset},
              {"pod", std::move(pod)},
              {"mode_models", std::move(models)},
              {"training", snapshots_to_json(s.training)}};
}

}  // namespace

void save_surrogate(const std::filesystem::path& path,
                    const DirectSurrogate& surrogate) {
  atomic_write_text(path, direct_to_json(surrogate).dump(2) + "\n");
}

void save_surrogate(const std::filesystem::path& path,
                    const RomGprSurrogate& surrogate) {
  atomic_write_text(path, rom_to_json(surrogate).dump(2) + "\n");
}

AnySurrogate load_surrogate(const std::filesystem::path& path) {
  const json doc = parse_json(path);
  require_version(doc, path);
  const std::string method = doc.at("method").get<std::string>();
  if (method == "gpr") {
    DirectSurrogate s;
    s.param_dim = doc.at("param_dim").get<std::size_t>();
    s.grid = grid_from_json(doc.at("grid"));
    s.t_offset = doc.at("t_offset").get<double>();
    s.time_stride = doc.at("time_stride").get<std::size_t>();
    s.model = gpr_from_json(doc.at("model"));
    s.training = snapshots_from_json(doc.at("training"));
    return s;
  }
  if (method == "rom-gpr") {
    RomGprSurrogate s;
    s.param_dim = doc.at("param_dim").get<std::size_t>();
    const json& pod = doc.at("pod");
    s.basis.grid = grid_from_json(doc.at("grid"));
    s.basis.t_offset = doc.at("t_offset").get<double>();
    s.basis.eigenvalues = vector_from_json(pod.at("eigenvalues"), "eigenvalues");
    s.basis.rank = pod.at("rank").get<std::size_t>();
    s.basis.rel_error = pod.at("rel_error").get<double>();
    s.basis.mean = vector_from_json(pod.at("mean"), "mean");
    if (s.basis.rank > 0) {
      s.basis.bases = matrix_from_json(pod.at("bases"), "bases");
      s.basis.training_modes =
          matrix_from_json(pod.at("training_modes"), "training_modes");
    } else {
      s.basis.bases.resize(s.basis.mean.size(), 0);
      s.basis.training_modes.resize(0, 0);
    }
    s.basis.validate();
    for (const auto& m : doc.at("mode_models")) {
      s.mode_models.push_back(gpr_from_json(m));
    }
    if (s.mode_models.size() != s.basis.rank)
      throw ValidationError(path.string() +
                            ": mode model count does not match the rank");
    s.training = snapshots_from_json(doc.at("training"));
    return s;
  }
  throw ValidationError(path.string() + ": unknown surrogate method '" +
                        method + "'");
}

void write_expansion_json(const std::filesystem::path& path,
                          const OscillatorExpansion& expansion,
                          double rel_residual) {
  expansion.validate();
  json terms = json::array();
  for (const auto& t : expansion.terms)
    terms.push_back(json{{"a", t.a}, {"b", t.b}, {"c", t.c}, {"q", t.q}});
  const json doc{
      {"version", 1}, {"terms", std::move(terms)}, {"rel_residual", rel_residual}};
  atomic_write_text(path, doc.dump(2) + "\n");
}

std::pair<OscillatorExpansion, double> read_expansion_json(
    const std::filesystem::path& path) {
  const json doc = parse_json(path);
  require_version(doc, path);
  OscillatorExpansion exp;
  for (const auto& t : doc.at("terms")) {
    OscillatorTerm term;
    term.a = t.at("a").get<double>();
    term.b = t.at("b").get<double>();
    term.c = t.at("c").get<double>();
    term.q = t.at("q").get<double>();
    exp.terms.push_back(term);
  }
  exp.validate();
  const double residual = doc.contains("rel_residual")
                              ? doc.at("rel_residual").get<double>()
                              : 0.0;
  return {std::move(exp), residual};
}

void write_pool_json(const std::filesystem::path& path,
                     const CandidatePool& pool,
                     const std::vector<ParameterPoint>& initial) {
  pool.validate();
  const json doc{{"version", 1},
                 {"points", points_to_json(pool.points)},
                 {"initial", points_to_json(initial)}};
  atomic_write_text(path, doc.dump(2) + "\n");
}

std::pair<CandidatePool, std::vector<ParameterPoint>> read_pool_json(
    const std::filesystem::path& path) {
  const json doc = parse_json(path);
  require_version(doc, path);
  CandidatePool pool;
  pool.points = points_from_json(doc.at("points"), "points");
  pool.validate();
  std::vector<ParameterPoint> initial;
  if (doc.contains("initial"))
    initial = points_from_json(doc.at("initial"), "initial");
  return {std::move(pool), std::move(initial)};
}

std::string point_tag(const ParameterPoint& mu) {
  mu.validate();
  std::string text;
  for (std::size_t i = 0; i < mu.coords.size(); ++i) {
    if (i > 0) text += ',';
    text += fmt17(mu.coords[i]);
  }
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string kernel_filename(const ParameterPoint& mu) {
  return "kernel_" + point_tag(mu) + ".csv";
}

KernelOracle file_kernel_oracle(const std::filesystem::path& dir,
                                const TimeGrid* grid) {
  TimeGrid expected{};
  const bool check_grid = grid != nullptr;
  if (check_grid) expected = *grid;
  return [dir, check_grid, expected](const ParameterPoint& mu) {
    const std::filesystem::path path = dir / kernel_filename(mu);
    if (!std::filesystem::exists(path))
      throw DataRequestError(mu.coords, "kernel data missing for point tag " +
                                            point_tag(mu) + ": expected " +
                                            path.string());
    CorrelationSeries kernel = read_series_csv(path, SeriesKind::kernel);
    if (check_grid && !(kernel.grid == expected))
      throw ValidationError(path.string() +
                            ": kernel grid does not match the expected grid");
    return kernel;
  };
}

}  // namespace glekit
