// Closed-loop co-simulation engine: one controller (MPC + remote estimator),
// one plant (nominal model + consistent actuator + ancillary loop), two lossy
// links, stepped in lockstep for a fixed horizon.
//
// Per-tick cycle (k = 0, 1, ...):
//   1. controller solves from x_hat(k|k-1) and transmits its plan (theta-link)
//   2. plant evaluates the consistency flag, adopts the plan when consistent
//      (state-feedback variant also resets the nominal state)
//   3. actuator picks u_n(k), the ancillary loop forms u(k)
//   4. plant transmits (x_n(k), s_k) [+ x(k)] back (gamma-link)
//   5. estimator absorbs the packet or falls back on its own plan
//   6. plant and nominal states advance
// Tick 0 performs one forced successful exchange in both directions and
// starts from x_n(0) = x(0), the consistent hand-off the feasibility results
// assume.
#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rtmpc/cartpole.hpp"
#include "rtmpc/network.hpp"
#include "rtmpc/plant_runtime.hpp"
#include "rtmpc/polytope.hpp"
#include "rtmpc/remote_side.hpp"
#include "rtmpc/rng.hpp"
#include "rtmpc/synthesis.hpp"
#include "rtmpc/tracking_mpc.hpp"

namespace rtmpc {

enum class Variant { R, RT, ERT };
enum class PlantKind { Linear, Nonlinear };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::R: return "r";
    case Variant::RT: return "rt";
    default: return "ert";
  }
}

inline const char* plant_name(PlantKind p) {
  return p == PlantKind::Linear ? "linear" : "nonlinear";
}

struct StepRecord {
  long k = 0;
  Vector x, x_n, x_hat;  // x_hat is the prediction consumed by this tick's solve
  Vector u, u_n;
  int theta = 0, gamma = 0, Theta = 0;
  long s = -1, q = -1;
  SolveTag status = SolveTag::Optimal;
  double solve_ms = 0.0;
};

struct RunSummary {
  double avg_tracking_error = 0.0;  // mean over records of ||x(k) - x_r||_2
  long infeasible_steps = 0;
  long tube_violations = 0;
  double max_constraint_violation = 0.0;  // positive part over X and U rows
};

struct SimTrace {
  Variant variant = Variant::RT;
  PlantKind plant = PlantKind::Linear;
  double rho = 0.0;
  int rho_index = 0;
  int seed_index = 0;
  std::vector<StepRecord> records;
  RunSummary summary;
};

// Everything a run needs besides (rho, seed): the controller and the sets the
// accounting is judged against. The engine treats `mpc` as shared immutable
// state, so runs may execute concurrently against one instance.
struct RunContext {
  const TrackingMpc* mpc = nullptr;
  Variant variant = Variant::RT;
  PlantKind plant = PlantKind::Linear;
  HPolytope X, U;   // untightened sets for violation accounting
  Box W_sample;     // linear-plant disturbance box (uniform sampling)
  CartpoleParams params;  // nonlinear plant physics
  Vector x_r;
  Vector x0;        // initial plant state
  long horizon = 500;
  bool forced_initial_exchange = true;
};

inline RunSummary compute_metrics(const std::vector<StepRecord>& records,
                                  const Vector& x_r, const HPolytope& X,
                                  const HPolytope& U, const HPolytope& Z_K,
                                  bool check_tube) {
  if (records.empty()) throw std::invalid_argument("compute_metrics: empty trace");
  RunSummary s;
  double acc = 0.0;
  bool tube_armed = false;
  for (const StepRecord& r : records) {
    acc += (r.x - x_r).norm();
    if (r.status != SolveTag::Optimal) ++s.infeasible_steps;
    const double vx = (X.H() * r.x - X.h()).maxCoeff();
    const double vu = (U.H() * r.u - U.h()).maxCoeff();
    s.max_constraint_violation =
        std::max(s.max_constraint_violation, std::max(0.0, std::max(vx, vu)));
    if (check_tube) {
      if (r.Theta == 1) tube_armed = true;  // tube anchored from first consistent step
      if (tube_armed && !contains_point(Z_K, r.x - r.x_n, 1e-7)) ++s.tube_violations;
    }
  }
  s.avg_tracking_error = acc / static_cast<double>(records.size());
  return s;
}

inline SimTrace run_single(const RunContext& ctx, double rho, int rho_index,
                           int seed_index, uint64_t master_seed) {
  const TrackingMpc& mpc = *ctx.mpc;
  const Matrix& K = mpc.gains().K;
  const Matrix& K_bar = mpc.gains().K_bar;

  SimTrace trace;
  trace.variant = ctx.variant;
  trace.plant = ctx.plant;
  trace.rho = rho;
  trace.rho_index = rho_index;
  trace.seed_index = seed_index;
  trace.records.reserve(static_cast<size_t>(ctx.horizon));

  Link theta_link(LossProcess::bernoulli(rho),
                  derive_seed(master_seed, static_cast<uint64_t>(rho_index),
                              static_cast<uint64_t>(seed_index), 0),
                  "theta");
  Link gamma_link(LossProcess::bernoulli(rho),
                  derive_seed(master_seed, static_cast<uint64_t>(rho_index),
                              static_cast<uint64_t>(seed_index), 1),
                  "gamma");
  SplitMix64 w_rng(derive_seed(master_seed, static_cast<uint64_t>(rho_index),
                               static_cast<uint64_t>(seed_index), 2));

  const bool state_feedback = (ctx.variant == Variant::ERT);
  const LtiModel& lin = mpc.model();

  Vector x = ctx.x0;
  Vector x_n = ctx.x0;
  ActuatorState act;
  EstimatorState est;
  est.x_hat = ctx.x0;
  est.q = -1;
  est.sent.reserve(static_cast<size_t>(ctx.horizon));
  ControllerPacket last_good;
  bool have_good = false;
  int gamma_prev = ctx.forced_initial_exchange ? 1 : 0;

  for (long k = 0; k < ctx.horizon; ++k) {
    StepRecord rec;
    rec.k = k;
    rec.x = x;
    rec.x_n = x_n;
    rec.x_hat = est.x_hat;

    // 1. controller solve + plan transmission
    const auto t0 = std::chrono::steady_clock::now();
    MpcSolution sol = (state_feedback && gamma_prev == 1)
                          ? mpc.solve_relaxed(est.x_hat, ctx.x_r)
                          : mpc.solve_pinned(est.x_hat, ctx.x_r);
    const auto t1 = std::chrono::steady_clock::now();
    rec.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    rec.status = sol.tag;

    ControllerPacket pkt;
    if (sol.feasible()) {
      pkt = make_controller_packet(sol, K_bar, est.q, k, state_feedback);
      last_good = pkt;
      have_good = true;
    } else if (have_good) {
      pkt = last_good;  // re-send the last plan with fresh bookkeeping
      pkt.q = est.q;
      pkt.k_sent = k;
    } else {
      throw std::runtime_error("run_single: infeasible before any feasible plan");
    }
    est.sent.push_back(pkt);

    int theta = theta_link.transmit(k);
    if (k == 0 && ctx.forced_initial_exchange) theta = 1;
    rec.theta = theta;

    // 2. plant-side reception, consistency, (state-feedback) nominal reset
    const int Theta = actuator_step(act, theta, pkt, k);
    rec.Theta = Theta;
    if (state_feedback) nominal_reset(x_n, act.current, Theta);
    if (ctx.variant == Variant::R) x_n = x;  // baseline: no nominal copy
    rec.s = act.s;
    rec.q = pkt.q;

    // 3. actuator + ancillary loop
    const Vector u_n = nominal_input(act, k, x_n, K_bar);
    const Vector u = ancillary_control(u_n, x, x_n, K);
    rec.u_n = u_n;
    rec.u = u;
    rec.x_n = x_n;  // post-reset nominal state is what the tick acts on

    // 4.-5. plant packet + estimator absorption
    int gamma = gamma_link.transmit(k);
    if (k == 0 && ctx.forced_initial_exchange) gamma = 1;
    rec.gamma = gamma;
    PlantPacket ppkt = state_feedback ? make_plant_packet(x_n, act.s, k, x)
                                      : make_plant_packet(x_n, act.s, k);
    estimator_update(est, lin, K, K_bar, gamma, ppkt, k, state_feedback);
    gamma_prev = gamma;

    trace.records.push_back(std::move(rec));

    // 6. state advances
    if (ctx.plant == PlantKind::Linear) {
      Vector w(lin.nx());
      for (Eigen::Index i = 0; i < w.size(); ++i)
        w(i) = ctx.W_sample.center(i) +
               ctx.W_sample.half_widths(i) * (2.0 * w_rng.uniform() - 1.0);
      x = lin.A * x + lin.B * u + w;
    } else {
      x = plant_step(x, u(0), ctx.params);
    }
    x_n = nominal_step(lin, x_n, u_n);
    if (ctx.variant == Variant::R) x_n = x;
  }

  trace.summary = compute_metrics(trace.records, ctx.x_r, ctx.X, ctx.U,
                                  mpc.sets().Z_K, ctx.variant != Variant::R);
  return trace;
}

// Stable stream index for a loss probability: random streams depend only on
// (rho, seed index, master seed), not on the composition of the sweep list.
inline int stable_rho_index(double rho) {
  return static_cast<int>(std::lround(rho * 1000.0));
}

// Sweep over (rho, seed) with a shared controller; embarrassingly parallel.
inline std::vector<SimTrace> run_sweep(const RunContext& ctx,
                                       const std::vector<double>& rho_list,
                                       int seeds_per_rho, uint64_t master_seed,
                                       unsigned n_threads = 0) {
  struct Job {
    double rho;
    int rho_index, seed_index;
  };
  std::vector<Job> jobs;
  for (size_t i = 0; i < rho_list.size(); ++i)
    for (int j = 0; j < seeds_per_rho; ++j)
      jobs.push_back({rho_list[i], stable_rho_index(rho_list[i]), j});
  std::vector<SimTrace> out(jobs.size());
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(jobs.size()));
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      out[i] = run_single(ctx, jobs[i].rho, jobs[i].rho_index, jobs[i].seed_index,
                          master_seed);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace rtmpc
