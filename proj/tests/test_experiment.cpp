#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rtmpc/io.hpp"
#include "rtmpc/pipeline.hpp"

using namespace rtmpc;

namespace {
const Suite& suite() {
  static Suite s = build_suite(Config{});
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}
}  // namespace

TEST_CASE("config: JSON round trip preserves every field") {
  Config c;
  c.cartpole.l = 0.6;
  c.N = 15;
  c.experiment.rho_list = {0.0, 0.25};
  c.experiment.master_seed = 99;
  c.synthesis.w_inflation = 1.1;
  Config back = config_from_json(config_to_json(c));
  CHECK(back.cartpole.l == 0.6);
  CHECK(back.N == 15);
  CHECK(back.experiment.rho_list == std::vector<double>{0.0, 0.25});
  CHECK(back.experiment.master_seed == 99);
  CHECK(back.synthesis.w_inflation == 1.1);
}

TEST_CASE("config: invalid values rejected") {
  json j;
  j["experiment"]["rho_list"] = {0.5, 1.0};
  CHECK_THROWS(config_from_json(j));
  json j2;
  j2["experiment"]["horizon"] = 0;
  CHECK_THROWS(config_from_json(j2));
}

TEST_CASE("synthesis cache: round trip and hash gating") {
  const Suite& s = suite();
  SynthesisCache cache;
  cache.config_hash = synthesis_config_hash(s.cfg);
  cache.A = s.model.A;
  cache.B = s.model.B;
  cache.gains = s.gains;
  cache.sets = s.sets;
  cache.W = s.W;

  const std::string path = "/tmp/rtmpc_cache_test.json";
  save_synthesis_cache(cache, path);
  SynthesisCache back;
  REQUIRE(load_synthesis_cache(path, cache.config_hash, back));
  CHECK((back.A - cache.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.gains.K - cache.gains.K).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.sets.Z_K.h() - cache.sets.Z_K.h()).cwiseAbs().maxCoeff() == 0.0);
  // stale hash must be rejected
  CHECK_FALSE(load_synthesis_cache(path, cache.config_hash + 1, back));
  std::remove(path.c_str());
}

TEST_CASE("metrics: exact tracking and constant offset") {
  const Suite& s = suite();
  Vector x_r = s.cfg.experiment.x_r;
  std::vector<StepRecord> recs(5);
  for (int k = 0; k < 5; ++k) {
    recs[k].k = k;
    recs[k].x = x_r;
    recs[k].x_n = x_r;
    recs[k].x_hat = x_r;
    recs[k].u = Vector::Zero(1);
    recs[k].u_n = Vector::Zero(1);
    recs[k].Theta = 1;
  }
  RunSummary m = compute_metrics(recs, x_r, s.X, s.U, s.sets.Z_K, true);
  CHECK(m.avg_tracking_error == 0.0);
  CHECK(m.infeasible_steps == 0);
  CHECK(m.tube_violations == 0);

  Vector delta(4);
  delta << 0.01, 0.0, 0.0, 0.0;
  for (auto& r : recs) r.x = x_r + delta;
  m = compute_metrics(recs, x_r, s.X, s.U, s.sets.Z_K, false);
  CHECK(m.avg_tracking_error == doctest::Approx(delta.norm()).epsilon(1e-12));
}

TEST_CASE("loss-free run: s_k = k, protocol accounting, decreasing error") {
  const Suite& s = suite();
  RunContext ctx = make_context(suite(), Variant::RT, PlantKind::Linear);
  SimTrace tr = run_single(ctx, 0.0, 0, 0, 2026);
  REQUIRE(tr.records.size() == 500);
  for (const StepRecord& r : tr.records) {
    CHECK(r.s == r.k);
    CHECK(r.Theta == 1);
    CHECK(r.status == SolveTag::Optimal);
  }
  // average error over the last quarter is below the first quarter
  auto avg_err = [&](size_t lo, size_t hi) {
    double e = 0;
    for (size_t i = lo; i < hi; ++i)
      e += (tr.records[i].x - ctx.x_r).norm();
    return e / (hi - lo);
  };
  CHECK(avg_err(375, 500) < avg_err(0, 125));
  // final position within tube radius of the reference
  Vector d(4);
  d << 1, 0, 0, 0;
  const double tube_radius = support(s.sets.Z_K, d);
  CHECK(std::abs(tr.records.back().x(0) - 0.5) < tube_radius + 1e-3);
}

TEST_CASE("lossy run satisfies the protocol accounting invariant") {
  RunContext ctx = make_context(suite(), Variant::RT, PlantKind::Linear);
  for (Variant v : {Variant::R, Variant::RT, Variant::ERT}) {
    RunContext c = make_context(suite(), v, PlantKind::Linear);
    SimTrace tr = run_single(c, 0.4, stable_rho_index(0.4), 3, 2026);
    for (const StepRecord& r : tr.records) {
      if (r.Theta == 1) CHECK(r.theta == 1);
      CHECK((r.s == r.k) == (r.Theta == 1));
      CHECK(r.q <= r.k);
    }
    // forced initial exchange
    CHECK(tr.records[0].theta == 1);
    CHECK(tr.records[0].gamma == 1);
    CHECK(tr.records[0].Theta == 1);
  }
}

TEST_CASE("run_single is deterministic") {
  RunContext ctx = make_context(suite(), Variant::ERT, PlantKind::Linear);
  SimTrace a = run_single(ctx, 0.5, stable_rho_index(0.5), 1, 2026);
  SimTrace b = run_single(ctx, 0.5, stable_rho_index(0.5), 1, 2026);
  REQUIRE(a.records.size() == b.records.size());
  for (size_t i = 0; i < a.records.size(); ++i) {
    CHECK((a.records[i].x - b.records[i].x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.records[i].u - b.records[i].u).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.records[i].theta == b.records[i].theta);
    CHECK(a.records[i].gamma == b.records[i].gamma);
  }
}

TEST_CASE("run_sweep covers the grid and matches run_single") {
  RunContext ctx = make_context(suite(), Variant::RT, PlantKind::Linear);
  ctx.horizon = 50;
  auto traces = run_sweep(ctx, {0.0, 0.3}, 2, 2026);
  REQUIRE(traces.size() == 4);
  SimTrace direct = run_single(ctx, 0.3, stable_rho_index(0.3), 1, 2026);
  const SimTrace& from_sweep = traces[3];
  CHECK(from_sweep.rho == 0.3);
  CHECK(from_sweep.seed_index == 1);
  for (size_t i = 0; i < direct.records.size(); ++i)
    CHECK((direct.records[i].x - from_sweep.records[i].x)
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("quantiles interpolate between order statistics") {
  std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_type7(v, 0.0) == 1.0);
  CHECK(quantile_type7(v, 0.25) == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(quantile_type7(v, 0.5) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(quantile_type7(v, 0.75) == doctest::Approx(3.25).epsilon(1e-12));
  CHECK(quantile_type7(v, 1.0) == 4.0);
  CHECK(quantile_type7({5.0}, 0.5) == 5.0);
}

TEST_CASE("CSV export: stable format and re-export identity") {
  RunContext ctx = make_context(suite(), Variant::RT, PlantKind::Linear);
  ctx.horizon = 20;
  SimTrace tr = run_single(ctx, 0.2, stable_rho_index(0.2), 0, 2026);
  const std::string p1 = "/tmp/rtmpc_csv_a.csv", p2 = "/tmp/rtmpc_csv_b.csv";
  write_trace_csv(tr, p1);
  write_trace_csv(tr, p2);
  const std::string a = read_file(p1);
  CHECK(a == read_file(p2));
  // header plus one line per record
  CHECK(std::count(a.begin(), a.end(), '\n') == 21);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("sweep export produces summary and histogram artifacts") {
  namespace fs = std::filesystem;
  RunContext ctx = make_context(suite(), Variant::RT, PlantKind::Linear);
  ctx.horizon = 20;
  auto traces = run_sweep(ctx, {0.0}, 2, 2026);
  const std::string dir = "/tmp/rtmpc_export_test";
  fs::remove_all(dir);
  export_sweep(traces, dir);
  CHECK(fs::exists(fs::path(dir) / "summary.json"));
  CHECK(fs::exists(fs::path(dir) / "solve_time_histogram.csv"));
  CHECK(fs::exists(fs::path(dir) / "rt_linear_rho00_seed000.csv"));
  nlohmann::json j;
  std::ifstream(fs::path(dir) / "summary.json") >> j;
  CHECK(j["runs"] == 2);
  CHECK(j["per_rho"].size() == 1);
  CHECK(j["per_rho"][0]["infeasible_steps"] == 0);
  fs::remove_all(dir);
}

TEST_CASE("empty trace list yields an empty summary") {
  nlohmann::json j = sweep_summary_json({});
  CHECK(j["runs"] == 0);
  CHECK(j["per_rho"].empty());
  const std::string p = "/tmp/rtmpc_empty_hist.csv";
  write_solve_time_histogram({}, p);
  CHECK(std::filesystem::exists(p));
  std::remove(p.c_str());
}
