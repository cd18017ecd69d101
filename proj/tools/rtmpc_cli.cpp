// Command-line driver for the networked tube-tracking MPC benchmark.
//
// Subcommands:
//   synthesize  build gains/sets from the config and write the cache
//   run         closed-loop runs for one (variant, plant, rho) cell
//   sweep       full rho x seed sweep for one (variant, plant)
//   report      print a human-readable digest of a sweep output directory
//
// Exit codes: 0 success, 2 synthesis failure, 3 I/O failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rtmpc/io.hpp"
#include "rtmpc/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSynthesis = 2;
constexpr int kExitIo = 3;

struct CommonArgs {
  std::string config_path;
  std::string variant = "rt";
  std::string plant = "linear";
  std::vector<double> rho;
  int seeds = -1;
  std::string out = "out";
  std::uint64_t master_seed = 0;
  bool has_master_seed = false;
};

rtmpc::Config load_or_default(const std::string& path) {
  if (path.empty()) return rtmpc::Config{};
  return rtmpc::load_config(path);
}

std::string cache_path_for(const std::string& out_dir) {
  return (std::filesystem::path(out_dir) / "synthesis_cache.json").string();
}

int do_synthesize(const CommonArgs& a) {
  rtmpc::Config cfg;
  try {
    cfg = load_or_default(a.config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitIo;
  }
  rtmpc::SynthesisCache cache;
  try {
    cache = rtmpc::synthesize_suite(cfg);
  } catch (const std::exception& e) {
    std::cerr << "synthesis failed: " << e.what() << "\n";
    return kExitSynthesis;
  }
  try {
    std::filesystem::create_directories(a.out);
    rtmpc::save_synthesis_cache(cache, cache_path_for(a.out));
  } catch (const std::exception& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  std::cout << "synthesis cache written to " << cache_path_for(a.out) << "\n"
            << "tube rows: " << cache.sets.Z_K.rows()
            << ", terminal rows: " << cache.sets.X_f.rows()
            << ", truncated disturbance runs: "
            << cache.truncated_disturbance_runs << "\n";
  return kExitOk;
}

int run_cells(const CommonArgs& a, bool full_sweep) {
  rtmpc::Config cfg;
  try {
    cfg = load_or_default(a.config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitIo;
  }
  if (a.has_master_seed) cfg.experiment.master_seed = a.master_seed;
  if (a.seeds > 0) cfg.experiment.seeds_per_rho = a.seeds;
  std::vector<double> rho_list =
      full_sweep && a.rho.empty() ? cfg.experiment.rho_list : a.rho;
  if (rho_list.empty()) rho_list = {0.0};

  rtmpc::Suite suite;
  try {
    std::filesystem::create_directories(a.out);
    suite = rtmpc::build_suite(cfg, cache_path_for(a.out));
  } catch (const std::exception& e) {
    std::cerr << "synthesis failed: " << e.what() << "\n";
    return kExitSynthesis;
  }

  try {
    const rtmpc::RunContext ctx = rtmpc::make_context(
        suite, rtmpc::parse_variant(a.variant), rtmpc::parse_plant(a.plant));
    const std::vector<rtmpc::SimTrace> traces =
        rtmpc::run_sweep(ctx, rho_list, cfg.experiment.seeds_per_rho,
                         cfg.experiment.master_seed);
    rtmpc::export_sweep(traces, a.out);
    long infeasible = 0;
    for (const auto& t : traces) infeasible += t.summary.infeasible_steps;
    std::cout << traces.size() << " runs written to " << a.out
              << " (infeasible steps total: " << infeasible << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

int do_report(const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path summary = fs::path(out_dir) / "summary.json";
  const fs::path hist = fs::path(out_dir) / "solve_time_histogram.csv";
  std::ifstream in(summary);
  if (!in) {
    std::cerr << "missing " << summary.string() << "\n";
    return kExitIo;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    std::cerr << "bad summary.json: " << e.what() << "\n";
    return kExitIo;
  }
  std::cout << "runs: " << j.value("runs", 0) << "\n";
  for (const auto& row : j.value("per_rho", nlohmann::json::array())) {
    const auto& e = row.at("avg_tracking_error");
    std::printf(
        "rho=%.2f  runs=% 3d  err median=%.6f [q1=%.6f q3=%.6f]  "
        "infeasible=%ld  tube_violations=%ld\n",
        row.at("rho").get<double>(), row.at("runs").get<int>(),
        e.at("median").get<double>(), e.at("q1").get<double>(),
        e.at("q3").get<double>(), row.at("infeasible_steps").get<long>(),
        row.at("tube_violations").get<long>());
  }
  std::ifstream hin(hist);
  if (hin) {
    std::string line, last;
    while (std::getline(hin, line))
      if (!line.empty() && line[0] == '#') last = line;
    if (!last.empty()) std::cout << "solve time " << last.substr(2) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"networked tube-tracking MPC benchmark"};
  app.require_subcommand(1);
  CommonArgs a;

  auto add_common = [&](CLI::App* sub, bool with_run_flags) {
    sub->add_option("--config", a.config_path, "JSON config file");
    sub->add_option("--out", a.out, "output directory");
    if (with_run_flags) {
      sub->add_option("--variant", a.variant, "controller: r|rt|ert");
      sub->add_option("--plant", a.plant, "plant: linear|nonlinear");
      sub->add_option("--rho", a.rho, "loss probabilities");
      sub->add_option("--seeds", a.seeds, "seeds per rho");
      sub->add_option("--master-seed", a.master_seed, "master seed")
          ->each([&](const std::string&) { a.has_master_seed = true; });
    }
  };

  CLI::App* synth = app.add_subcommand("synthesize", "build gains and sets");
  add_common(synth, false);
  CLI::App* run = app.add_subcommand("run", "closed-loop runs at given rho");
  add_common(run, true);
  CLI::App* sweep = app.add_subcommand("sweep", "full rho x seed sweep");
  add_common(sweep, true);
  CLI::App* report = app.add_subcommand("report", "summarize a sweep directory");
  add_common(report, false);

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) return do_synthesize(a);
  if (run->parsed()) return run_cells(a, /*full_sweep=*/false);
  if (sweep->parsed()) return run_cells(a, /*full_sweep=*/true);
  return do_report(a.out);
}
