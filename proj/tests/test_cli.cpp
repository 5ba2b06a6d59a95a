// End-to-end tests for the command-line front end. The test binary receives
// the CLI executable path as its first argument and drives it as a
// subprocess, checking exit codes, JSON summaries and the files produced.
#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "glekit.h"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string g_cli_path;
int g_run_counter = 0;

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& label) {
    path = fs::temp_directory_path() /
           ("glekit_cli_" + label + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run_cli(const std::vector<std::string>& args,
                  const ScratchDir& dir) {
  const std::string capture =
      dir.file("capture_" + std::to_string(g_run_counter++) + ".txt");
  std::string cmd = shell_quote(g_cli_path);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " > " + shell_quote(capture) + " 2>&1";
  const int rc = std::system(cmd.c_str());
  RunResult result;
  if (rc == -1)
    result.code = -1;
  else if (WIFEXITED(rc))
    result.code = WEXITSTATUS(rc);
  else
    result.code = -2;
  result.output = slurp(capture);
  return result;
}

json parse_summary(const RunResult& r) {
  REQUIRE(json::accept(r.output));
  return json::parse(r.output);
}

// Reads a series CSV back through the library for numerical checks.
std::vector<double> read_csv_values(const std::string& path,
                                    glek_series_kind kind) {
  glek_series* s = nullptr;
  REQUIRE(glek_series_read_csv(path.c_str(), kind, &s) == GLEK_OK);
  const double* v = glek_series_values(s);
  std::vector<double> out(v, v + glek_series_size(s));
  glek_series_free(s);
  return out;
}

double csv_relative_error(const std::string& path, const glek_series* truth,
                          glek_series_kind kind) {
  glek_series* s = nullptr;
  REQUIRE(glek_series_read_csv(path.c_str(), kind, &s) == GLEK_OK);
  double err = -1.0;
  REQUIRE(glek_relative_error(s, truth, &err) == GLEK_OK);
  glek_series_free(s);
  return err;
}

std::string kernel_file_of(const std::vector<double>& mu) {
  char buf[96];
  REQUIRE(glek_kernel_filename(mu.data(), mu.size(), buf, sizeof buf) ==
          GLEK_OK);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out << content;
}

}  // namespace

TEST_CASE("synth writes the closed-form corpus") {
  ScratchDir dir("synth");
  const std::string out_dir = dir.file("family");
  const RunResult r = run_cli({"synth", "--mu", "1.3,0.8", "--out-dir",
                               out_dir, "--dt", "0.01", "--t-final", "5"},
                              dir);
  CHECK(r.code == 0);
  const json summary = parse_summary(r);
  CHECK(summary.at("version") == 1);
  CHECK(summary.at("command") == "synth");
  CHECK(summary.at("samples") == 501);
  const std::string tag = summary.at("tag");
  CHECK(tag.size() == 16);

  CHECK(fs::exists(out_dir + "/kernel.csv"));
  CHECK(fs::exists(out_dir + "/vacf.csv"));
  CHECK(fs::exists(out_dir + "/fvcf.csv"));
  CHECK(fs::exists(out_dir + "/kernel_" + tag + ".csv"));
  CHECK(slurp(out_dir + "/kernel.csv") ==
        slurp(out_dir + "/kernel_" + tag + ".csv"));

  // The emitted kernel equals the library's closed form bitwise.
  const double mu[2] = {1.3, 0.8};
  glek_series* truth = nullptr;
  REQUIRE(glek_benchmark_kernel(mu, 0.01, 501, &truth) == GLEK_OK);
  CHECK(csv_relative_error(out_dir + "/kernel.csv", truth,
                           GLEK_SERIES_KERNEL) == 0.0);
  glek_series_free(truth);

  // Malformed parameter lists fail fast.
  CHECK(run_cli({"synth", "--mu", "1.3", "--out-dir", out_dir}, dir).code ==
        2);
  CHECK(run_cli({"synth", "--mu", "1.3,abc", "--out-dir", out_dir}, dir)
            .code == 2);
  CHECK(run_cli({"synth", "--mu", "1.3,0.8"}, dir).code == 2);
}

TEST_CASE("extract recovers the kernel from CSV inputs") {
  ScratchDir dir("extract");
  const std::string data = dir.file("data");
  REQUIRE(run_cli({"synth", "--mu", "1.3,0.8", "--out-dir", data, "--dt",
                   "0.01", "--t-final", "5"},
                  dir)
              .code == 0);

  const std::string kernel_out = dir.file("kernel.csv");
  const RunResult r =
      run_cli({"extract", "--vacf", data + "/vacf.csv", "--fvcf",
               data + "/fvcf.csv", "--output", kernel_out},
              dir);
  CHECK(r.code == 0);
  const json summary = parse_summary(r);
  CHECK(summary.at("command") == "extract");
  CHECK(summary.at("mode") == "auto");
  CHECK(summary.at("fvcf_derived") == false);
  CHECK(summary.at("condition_estimate").get<double>() >= 1.0);
  CHECK(summary.at("kernel").at("samples") == 500);
  CHECK(summary.at("kernel").at("t_offset").get<double>() ==
        doctest::Approx(0.005).epsilon(1e-12));

  // Compare against the closed-form kernel on the staggered grid.
  const double abcq[8] = {1.8, 1.3, 0.0, 2.0, 2.4, 0.65, 0.0, 5.0};
  glek_expansion* exp = nullptr;
  REQUIRE(glek_expansion_new(2, abcq, &exp) == GLEK_OK);
  glek_series* truth = nullptr;
  REQUIRE(glek_expansion_eval(exp, 0.01, 0.005, 500, &truth) == GLEK_OK);
  CHECK(csv_relative_error(kernel_out, truth, GLEK_SERIES_KERNEL) <= 2e-2);

  // Without --fvcf the derivative is taken internally.
  const std::string derived_out = dir.file("kernel_derived.csv");
  const RunResult r2 = run_cli({"extract", "--vacf", data + "/vacf.csv",
                                "--output", derived_out},
                               dir);
  CHECK(r2.code == 0);
  const json summary2 = parse_summary(r2);
  CHECK(summary2.at("fvcf_derived") == true);
  CHECK(csv_relative_error(derived_out, truth, GLEK_SERIES_KERNEL) <= 0.1);
  glek_series_free(truth);
  glek_expansion_free(exp);

  CHECK(summary.at("k0").get<double>() ==
        doctest::Approx(read_csv_values(kernel_out, GLEK_SERIES_KERNEL)[0])
            .epsilon(1e-12));

  // Failure paths keep the JSON error contract.
  const RunResult missing = run_cli(
      {"extract", "--vacf", dir.file("absent.csv"), "--output", kernel_out},
      dir);
  CHECK(missing.code == 2);
  CHECK(parse_summary(missing).at("error").at("code") == 2);
  CHECK(run_cli({"extract", "--vacf", data + "/vacf.csv", "--output",
                 kernel_out, "--mode", "bogus"},
                dir)
            .code == 2);
  CHECK(run_cli({"extract", "--output", kernel_out}, dir).code == 2);
  CHECK(run_cli({"extract", "--vacf", data + "/vacf.csv", "--output",
                 kernel_out, "--beta-grid", "1,0.5"},
                dir)
            .code == 2);
}

TEST_CASE("config files override flags and reject unknown keys") {
  ScratchDir dir("config");
  const std::string data = dir.file("data");
  REQUIRE(run_cli({"synth", "--mu", "1.0,1.0", "--out-dir", data, "--dt",
                   "0.02", "--t-final", "4"},
                  dir)
              .code == 0);

  // The config value wins over the conflicting command-line flag.
  write_file(dir.file("extract.json"), "{\"version\": 1, \"mode\": \"direct\"}\n");
  const RunResult r = run_cli(
      {"extract", "--vacf", data + "/vacf.csv", "--fvcf", data + "/fvcf.csv",
       "--output", dir.file("k.csv"), "--mode", "tikhonov", "--config",
       dir.file("extract.json")},
      dir);
  CHECK(r.code == 0);
  CHECK(parse_summary(r).at("mode") == "direct");

  auto extract_with_config = [&](const std::string& body) {
    write_file(dir.file("bad.json"), body);
    return run_cli({"extract", "--vacf", data + "/vacf.csv", "--fvcf",
                    data + "/fvcf.csv", "--output", dir.file("k.csv"),
                    "--config", dir.file("bad.json")},
                   dir)
        .code;
  };
  CHECK(extract_with_config("{\"mode\": \"direct\"}") == 2);   // no version
  CHECK(extract_with_config("{\"version\": 2}") == 2);          // wrong version
  CHECK(extract_with_config("{\"version\": 1, \"tau\": 3}") == 2);  // unknown
  CHECK(extract_with_config("{\"version\": 1, \"mode\": 5}") == 2);  // type
  CHECK(extract_with_config("not json") == 2);
  CHECK(run_cli({"extract", "--vacf", data + "/vacf.csv", "--output",
                 dir.file("k.csv"), "--config", dir.file("nope.json")},
                dir)
            .code == 2);

  // A config can supply the mandatory seed of a stochastic command.
  write_file(dir.file("fit.json"), "{\"version\": 1, \"seed\": 3}\n");
  const RunResult fit = run_cli(
      {"fit-kernel", "--input", data + "/kernel.csv", "--output",
       dir.file("fit_out.json"), "--terms", "2", "--config",
       dir.file("fit.json")},
      dir);
  CHECK(fit.code == 0);
}

TEST_CASE("stochastic commands insist on a seed") {
  ScratchDir dir("seed");
  const std::string data = dir.file("data");
  REQUIRE(run_cli({"synth", "--mu", "1.0,1.0", "--out-dir", data, "--dt",
                   "0.05", "--t-final", "4"},
                  dir)
              .code == 0);

  const RunResult fit = run_cli({"fit-kernel", "--input", data + "/kernel.csv",
                                 "--output", dir.file("f.json"), "--terms",
                                 "2"},
                                dir);
  CHECK(fit.code == 2);
  CHECK(parse_summary(fit).at("error").at("message").get<std::string>().find(
            "seed") != std::string::npos);

  CHECK(run_cli({"simulate", "--fit", dir.file("f.json"), "--out",
                 dir.file("t.csv"), "--particles", "2", "--steps", "10"},
                dir)
            .code == 2);
  CHECK(run_cli({"train", "--manifest", dir.file("m.json"), "--output",
                 dir.file("s.json")},
                dir)
            .code == 2);
  CHECK(run_cli({"active-learn", "--pool", dir.file("p.json"), "--data-dir",
                 data, "--output", dir.file("s.json")},
                dir)
            .code == 2);
}

TEST_CASE("fit, simulate and analyze form a working pipeline") {
  ScratchDir dir("pipeline");
  const std::string data = dir.file("data");
  REQUIRE(run_cli({"synth", "--mu", "1.3,0.8", "--out-dir", data, "--dt",
                   "0.05", "--t-final", "10"},
                  dir)
              .code == 0);

  // Fit a two-term expansion to the emitted kernel.
  const std::string fit_path = dir.file("fit.json");
  const RunResult fit = run_cli({"fit-kernel", "--input", data + "/kernel.csv",
                                 "--output", fit_path, "--terms", "2",
                                 "--seed", "0"},
                                dir);
  CHECK(fit.code == 0);
  const json fit_summary = parse_summary(fit);
  CHECK(fit_summary.at("rel_residual").get<double>() <= 1e-3);
  CHECK(fit_summary.at("terms").size() == 2);
  CHECK(fs::exists(fit_path));

  // An unreachable residual ceiling is a numeric failure (exit 4).
  const RunResult starved = run_cli(
      {"fit-kernel", "--input", data + "/kernel.csv", "--output",
       dir.file("starved.json"), "--terms", "1", "--starts", "1",
       "--residual-ceiling", "1e-12", "--seed", "0"},
      dir);
  CHECK(starved.code == 4);
  CHECK(parse_summary(starved).at("error").at("code") == 4);

  // Simulate the fitted system and analyze the trajectory.
  const std::string traj = dir.file("traj.csv");
  const RunResult sim = run_cli(
      {"simulate", "--fit", fit_path, "--out", traj, "--mass", "1", "--kbt",
       "1", "--particles", "64", "--steps", "500", "--record-every", "5",
       "--dim", "1", "--dt", "0.02", "--scheme", "exact-ou", "--seed", "5"},
      dir);
  CHECK(sim.code == 0);
  const json sim_summary = parse_summary(sim);
  CHECK(sim_summary.at("frames") == 101);
  CHECK(sim_summary.at("dt_record").get<double>() ==
        doctest::Approx(0.1).epsilon(1e-12));
  CHECK(fs::exists(traj));
  CHECK(fs::exists(traj + ".meta.json"));

  const RunResult an = run_cli(
      {"analyze", "--traj", traj, "--vacf", dir.file("vacf.csv"), "--msd",
       dir.file("msd.csv"), "--diffusion", dir.file("d.csv")},
      dir);
  CHECK(an.code == 0);
  const json an_summary = parse_summary(an);
  CHECK(an_summary.at("frames") == 101);
  CHECK(an_summary.at("max_lag") == 50);
  CHECK(an_summary.at("vacf_zero").get<double>() ==
        doctest::Approx(1.0).epsilon(0.35));
  CHECK(fs::exists(dir.file("vacf.csv")));
  CHECK(fs::exists(dir.file("msd.csv")));
  CHECK(fs::exists(dir.file("d.csv")));
  const auto msd = read_csv_values(dir.file("msd.csv"), GLEK_SERIES_MSD);
  CHECK(msd.front() == 0.0);
  CHECK(msd.back() > 0.0);

  // Determinism: the same seed reproduces the trajectory byte for byte,
  // another seed does not.
  const std::string traj_b = dir.file("traj_b.csv");
  REQUIRE(run_cli({"simulate", "--fit", fit_path, "--out", traj_b, "--mass",
                   "1", "--kbt", "1", "--particles", "64", "--steps", "500",
                   "--record-every", "5", "--dim", "1", "--dt", "0.02",
                   "--scheme", "exact-ou", "--seed", "5"},
                  dir)
              .code == 0);
  CHECK(slurp(traj) == slurp(traj_b));
  const std::string traj_c = dir.file("traj_c.csv");
  REQUIRE(run_cli({"simulate", "--fit", fit_path, "--out", traj_c, "--mass",
                   "1", "--kbt", "1", "--particles", "64", "--steps", "500",
                   "--record-every", "5", "--dim", "1", "--dt", "0.02",
                   "--scheme", "exact-ou", "--seed", "6"},
                  dir)
              .code == 0);
  CHECK(slurp(traj) != slurp(traj_c));

  // Analyze input validation.
  CHECK(run_cli({"analyze", "--traj", traj}, dir).code == 2);
  CHECK(run_cli({"analyze", "--traj", traj, "--vacf", dir.file("v2.csv"),
                 "--max-lag", "101"},
                dir)
            .code == 2);
  CHECK(run_cli({"simulate", "--fit", fit_path, "--out", traj, "--particles",
                 "2", "--steps", "10", "--scheme", "warp", "--seed", "1"},
                dir)
            .code == 2);
}

TEST_CASE("train and predict work from a snapshot manifest") {
  ScratchDir dir("train");
  const std::string data = dir.file("data");
  const double corners[4][2] = {
      {0.8, 0.8}, {1.2, 0.8}, {0.8, 1.2}, {1.2, 1.2}};
  json snapshots = json::array();
  for (const auto& mu : corners) {
    std::ostringstream spec;
    spec << mu[0] << "," << mu[1];
    REQUIRE(run_cli({"synth", "--mu", spec.str(), "--out-dir", data, "--dt",
                     "0.05", "--t-final", "4"},
                    dir)
                .code == 0);
    snapshots.push_back(
        {{"mu", {mu[0], mu[1]}},
         {"kernel", kernel_file_of({mu[0], mu[1]})}});
  }
  const json manifest = {{"version", 1}, {"snapshots", snapshots}};
  write_file(data + "/manifest.json", manifest.dump(2) + "\n");

  const std::string surr = dir.file("surrogate.json");
  const RunResult train = run_cli(
      {"train", "--manifest", data + "/manifest.json", "--output", surr,
       "--method", "rom-gpr", "--zeta-pod", "0.01", "--restarts", "2",
       "--max-iters", "100", "--seed", "7"},
      dir);
  CHECK(train.code == 0);
  const json train_summary = parse_summary(train);
  CHECK(train_summary.at("snapshots") == 4);
  CHECK(train_summary.at("surrogate").at("method") == "rom-gpr");
  CHECK(train_summary.at("surrogate").at("training_points") == 4);
  const size_t rank = train_summary.at("surrogate").at("rank").get<size_t>();
  CHECK(rank >= 1);
  CHECK(train_summary.at("surrogate").at("pod_rel_error").get<double>() <=
        0.01);

  // Predicting at a training point reports the reconstruction error.
  const std::string pred = dir.file("pred.csv");
  const RunResult predict = run_cli(
      {"predict", "--surrogate", surr, "--mu", "0.8,0.8", "--output", pred,
       "--std-output", dir.file("std.csv")},
      dir);
  CHECK(predict.code == 0);
  const json predict_summary = parse_summary(predict);
  CHECK(predict_summary.at("training_point") == true);
  CHECK(predict_summary.at("training_rel_error").get<double>() <= 0.05);
  CHECK(predict_summary.at("mode_std").size() == rank);
  CHECK(fs::exists(pred));
  CHECK(fs::exists(dir.file("std.csv")));

  glek_series* truth = nullptr;
  const double mu0[2] = {0.8, 0.8};
  REQUIRE(glek_benchmark_kernel(mu0, 0.05, 81, &truth) == GLEK_OK);
  CHECK(csv_relative_error(pred, truth, GLEK_SERIES_KERNEL) <= 0.05);
  glek_series_free(truth);

  // Predictions are byte-deterministic.
  const std::string pred_b = dir.file("pred_b.csv");
  REQUIRE(run_cli({"predict", "--surrogate", surr, "--mu", "0.8,0.8",
                   "--output", pred_b},
                  dir)
              .code == 0);
  CHECK(slurp(pred) == slurp(pred_b));

  // Wrong query dimension and wrong method names are validation failures.
  CHECK(run_cli({"predict", "--surrogate", surr, "--mu", "0.8", "--output",
                 pred_b},
                dir)
            .code == 2);
  CHECK(run_cli({"train", "--manifest", data + "/manifest.json", "--output",
                 surr, "--method", "kriging", "--seed", "7"},
                dir)
            .code == 2);

  // The direct GP method trains off the same manifest.
  const RunResult direct = run_cli(
      {"train", "--manifest", data + "/manifest.json", "--output",
       dir.file("direct.json"), "--method", "gpr", "--time-stride", "4",
       "--restarts", "2", "--max-iters", "60", "--seed", "3"},
      dir);
  CHECK(direct.code == 0);
  CHECK(parse_summary(direct).at("surrogate").at("method") == "gpr");
}

TEST_CASE("active-learn drives the file request protocol") {
  ScratchDir dir("active");
  const std::string data = dir.file("data");

  // Seed the data directory with the four corner kernels.
  const double corners[4][2] = {
      {0.8, 0.8}, {1.2, 0.8}, {0.8, 1.2}, {1.2, 1.2}};
  for (const auto& mu : corners) {
    std::ostringstream spec;
    spec << mu[0] << "," << mu[1];
    REQUIRE(run_cli({"synth", "--mu", spec.str(), "--out-dir", data, "--dt",
                     "0.05", "--t-final", "4"},
                    dir)
                .code == 0);
  }

  // Pool of the four corners: everything needed is on disk, so the run
  // completes directly (budget-limited, not converged at a tiny threshold).
  const json corner_pool = {
      {"version", 1},
      {"points", {{0.8, 0.8}, {1.2, 0.8}, {0.8, 1.2}, {1.2, 1.2}}},
      {"initial", {{0.8, 0.8}, {1.2, 1.2}}}};
  write_file(dir.file("corner_pool.json"), corner_pool.dump(2) + "\n");
  const std::string surr = dir.file("surrogate.json");
  const RunResult direct_run = run_cli(
      {"active-learn", "--pool", dir.file("corner_pool.json"), "--data-dir",
       data, "--output", surr, "--zeta-al", "1e-9", "--zeta-pod", "0.01",
       "--budget", "4", "--restarts", "2", "--max-iters", "100", "--seed",
       "7"},
      dir);
  CHECK(direct_run.code == 0);
  const json direct_summary = parse_summary(direct_run);
  CHECK(direct_summary.at("status") == "ok");
  CHECK(direct_summary.at("converged") == false);
  CHECK(direct_summary.at("samples").size() == 4);
  CHECK(direct_summary.at("history").size() == 2);
  CHECK(fs::exists(surr));

  // Adding the pool center (whose kernel is missing) triggers the batch
  // interaction: exit 3 plus a persisted request.json naming the point.
  const json center_pool = {
      {"version", 1},
      {"points",
       {{0.8, 0.8}, {1.2, 0.8}, {0.8, 1.2}, {1.2, 1.2}, {1.0, 1.0}}},
      {"initial", {{0.8, 0.8}, {1.2, 1.2}}}};
  write_file(dir.file("center_pool.json"), center_pool.dump(2) + "\n");
  const std::vector<std::string> active_args = {
      "active-learn", "--pool", dir.file("center_pool.json"), "--data-dir",
      data,           "--output", dir.file("surrogate5.json"), "--zeta-al",
      "1e-9",         "--zeta-pod", "0.01", "--budget", "5", "--restarts",
      "2",            "--max-iters", "100", "--seed", "7"};
  const RunResult request_run = run_cli(active_args, dir);
  CHECK(request_run.code == 3);
  const json request_summary = parse_summary(request_run);
  CHECK(request_summary.at("status") == "data-request");
  CHECK(request_summary.at("error").at("code") == 3);

  REQUIRE(fs::exists(data + "/request.json"));
  const json request = json::parse(slurp(data + "/request.json"));
  CHECK(request.at("version") == 1);
  const std::vector<double> point =
      request.at("point").get<std::vector<double>>();
  REQUIRE(point.size() == 2);
  CHECK(point[0] == 1.0);
  CHECK(point[1] == 1.0);
  CHECK(request.at("file") == kernel_file_of(point));
  CHECK(request_summary.at("request") == request);

  // Produce the requested kernel and re-invoke: the run now finishes.
  REQUIRE(run_cli({"synth", "--mu", "1.0,1.0", "--out-dir", data, "--dt",
                   "0.05", "--t-final", "4"},
                  dir)
              .code == 0);
  const RunResult resumed = run_cli(active_args, dir);
  CHECK(resumed.code == 0);
  const json resumed_summary = parse_summary(resumed);
  CHECK(resumed_summary.at("status") == "ok");
  CHECK(resumed_summary.at("samples").size() == 5);
  CHECK(resumed_summary.at("surrogate").at("training_points") == 5);
  REQUIRE(fs::exists(dir.file("surrogate5.json")));

  // The resumed run is reproducible byte for byte.
  std::vector<std::string> again_args = active_args;
  again_args[6] = dir.file("surrogate5_again.json");
  const RunResult again = run_cli(again_args, dir);
  CHECK(again.code == 0);
  CHECK(slurp(dir.file("surrogate5_again.json")) ==
        slurp(dir.file("surrogate5.json")));

  // Pool documents without initial points are rejected.
  const json no_init = {{"version", 1},
                        {"points", {{0.8, 0.8}, {1.2, 1.2}}}};
  write_file(dir.file("no_init.json"), no_init.dump(2) + "\n");
  CHECK(run_cli({"active-learn", "--pool", dir.file("no_init.json"),
                 "--data-dir", data, "--output", surr, "--seed", "7"},
                dir)
            .code == 2);
}

TEST_CASE("argument parsing failures exit with status 2") {
  ScratchDir dir("parse");
  CHECK(run_cli({"frobnicate"}, dir).code == 2);
  CHECK(run_cli({}, dir).code == 2);
  CHECK(run_cli({"extract", "--no-such-flag", "1"}, dir).code == 2);
}

int main(int argc, char** argv) {
  std::vector<char*> args;
  args.push_back(argv[0]);
  for (int i = 1; i < argc; ++i) {
    if (g_cli_path.empty() && argv[i][0] != '-') {
      g_cli_path = argv[i];
      continue;
    }
    args.push_back(argv[i]);
  }
  if (g_cli_path.empty()) {
    std::fprintf(stderr, "usage: %s <path-to-cli-binary> [doctest args]\n",
                 argv[0]);
    return 1;
  }
  if (!fs::exists(g_cli_path)) {
    std::fprintf(stderr, "CLI binary not found: %s\n", g_cli_path.c_str());
    return 1;
  }
  doctest::Context context(static_cast<int>(args.size()), args.data());
  return context.run();
}
