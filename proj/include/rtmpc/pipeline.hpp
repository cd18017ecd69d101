#pragma once

// Builds the full benchmark suite (model, sets, gains, controllers) from a
// Config, with an optional on-disk synthesis cache keyed by a content hash
// of the synthesis-relevant config subtree.

#include <memory>
#include <string>

#include "rtmpc/config.hpp"
#include "rtmpc/experiment.hpp"
#include "rtmpc/tracking_mpc.hpp"

namespace rtmpc {

struct Suite {
  Config cfg;
  LtiModel model{Matrix(), Matrix(), Matrix(), 0.0};
  HPolytope X = Box(Vector::Zero(1), Vector::Ones(1)).to_hpolytope();
  HPolytope U = Box(Vector::Zero(1), Vector::Ones(1)).to_hpolytope();
  Box W{Vector::Zero(1), Vector::Zero(1)};  // inflated box used everywhere
  int truncated_disturbance_runs = 0;
  GainSet gains;      // tube gain K, terminal gain K_bar, terminal cost P
  SetSuite sets;      // tightened suite for the tube controllers
  GainSet gains_r;    // baseline: K = 0
  SetSuite sets_r;    // baseline: untightened sets, trivial tube
  MpcWeights weights{Matrix(), Matrix(), Matrix(), 0};
  std::unique_ptr<TrackingMpc> mpc_tube;      // pinned + relaxed problems
  std::unique_ptr<TrackingMpc> mpc_baseline;  // pinned only
};

inline SynthesisCache synthesize_suite(const Config& cfg) {
  cfg.cartpole.validate();
  auto [Ac, Bc] = linearized_matrices(cfg.cartpole);
  auto [A, B] = zoh_discretize(Ac, Bc, cfg.cartpole.Ts);
  const LtiModel model{A, B, Matrix::Identity(4, 4), cfg.cartpole.Ts};
  const HPolytope X = Box(Vector::Zero(4), cfg.x_half_widths).to_hpolytope();
  const HPolytope U = Box(Vector::Zero(1), cfg.u_half_widths).to_hpolytope();
  const Matrix Q = cfg.Q_diag.asDiagonal();
  const Matrix R = cfg.R_diag.asDiagonal();

  auto [K, P] = dare_gain(A, B, Q, R);
  const DisturbanceEstimate de = estimate_disturbance_set(
      cfg.cartpole, A, B, K, cfg.synthesis.disturbance.n_runs,
      cfg.synthesis.disturbance.horizon,
      Box(Vector::Zero(4), cfg.synthesis.disturbance.init_box),
      cfg.synthesis.disturbance.seed);
  const Box W(de.W.center, de.W.half_widths * cfg.synthesis.w_inflation);

  const SynthesisInputs si{model,
                           X,
                           U,
                           W.to_hpolytope(),
                           Q,
                           R,
                           cfg.synthesis.lambda,
                           cfg.synthesis.k_max,
                           cfg.synthesis.rpi_tol};
  const SynthesisResult syn = synthesize(si);

  SynthesisCache cache;
  cache.config_hash = synthesis_config_hash(cfg);
  cache.A = A;
  cache.B = B;
  cache.gains = syn.gains;
  cache.sets = syn.sets;
  cache.W = W;
  cache.truncated_disturbance_runs = de.truncated_runs;
  return cache;
}

// Loads the cache when it matches the config hash; otherwise synthesizes
// (and writes the cache if a path is given).
inline SynthesisCache obtain_synthesis(const Config& cfg,
                                       const std::string& cache_path = "") {
  const std::uint64_t h = synthesis_config_hash(cfg);
  SynthesisCache cache;
  if (!cache_path.empty() && load_synthesis_cache(cache_path, h, cache))
    return cache;
  cache = synthesize_suite(cfg);
  if (!cache_path.empty()) save_synthesis_cache(cache, cache_path);
  return cache;
}

inline Suite build_suite(const Config& cfg, const std::string& cache_path = "") {
  Suite s;
  s.cfg = cfg;
  const SynthesisCache cache = obtain_synthesis(cfg, cache_path);
  s.model = LtiModel{cache.A, cache.B, Matrix::Identity(4, 4), cfg.cartpole.Ts};
  s.X = Box(Vector::Zero(4), cfg.x_half_widths).to_hpolytope();
  s.U = Box(Vector::Zero(1), cfg.u_half_widths).to_hpolytope();
  s.W = cache.W;
  s.truncated_disturbance_runs = cache.truncated_disturbance_runs;
  s.gains = cache.gains;
  s.sets = cache.sets;

  // Baseline: identical machinery but no tube feedback (K = 0), untightened
  // state/input sets, and a degenerate tube {0} so tube bookkeeping is a
  // no-op; terminal set rebuilt on the untightened sets.
  s.gains_r = cache.gains;
  s.gains_r.K = Matrix::Zero(1, 4);
  Matrix Hz(8, 4);
  Hz << Matrix::Identity(4, 4), -Matrix::Identity(4, 4);
  s.sets_r.Z_K = HPolytope(Hz, Vector::Zero(8));
  s.sets_r.X_c = s.X;
  s.sets_r.U_c = s.U;
  s.sets_r.lambda = cfg.synthesis.lambda;
  s.sets_r.X_f = max_admissible_set(
      augmented_dynamics(cache.A, cache.B, cache.gains.K_bar), s.X, s.U,
      cache.gains.K_bar, cfg.synthesis.lambda, cfg.synthesis.k_max);
  s.sets_r.w_support_on_Z_rows = Vector::Zero(8);

  const Matrix Q = cfg.Q_diag.asDiagonal();
  const Matrix R = cfg.R_diag.asDiagonal();
  const Matrix T = cfg.T_diag.asDiagonal();
  s.weights = MpcWeights{Q, R, T, cfg.N};
  s.mpc_tube = std::make_unique<TrackingMpc>(s.model, s.gains, s.sets,
                                             s.weights, /*build_relaxed=*/true);
  s.mpc_baseline = std::make_unique<TrackingMpc>(s.model, s.gains_r, s.sets_r,
                                                 s.weights,
                                                 /*build_relaxed=*/false);
  return s;
}

inline RunContext make_context(const Suite& s, Variant variant,
                               PlantKind plant) {
  RunContext c;
  c.mpc = (variant == Variant::R) ? s.mpc_baseline.get() : s.mpc_tube.get();
  c.variant = variant;
  c.plant = plant;
  c.X = s.X;
  c.U = s.U;
  c.W_sample = s.W;
  c.params = s.cfg.cartpole;
  c.x_r = s.cfg.experiment.x_r;
  c.x0 = s.cfg.experiment.x0;
  c.horizon = s.cfg.experiment.horizon;
  return c;
}

inline Variant parse_variant(const std::string& v) {
  if (v == "r") return Variant::R;
  if (v == "rt") return Variant::RT;
  if (v == "ert") return Variant::ERT;
  throw std::invalid_argument("unknown variant '" + v + "' (want r|rt|ert)");
}

inline PlantKind parse_plant(const std::string& p) {
  if (p == "linear") return PlantKind::Linear;
  if (p == "nonlinear") return PlantKind::Nonlinear;
  throw std::invalid_argument("unknown plant '" + p +
                              "' (want linear|nonlinear)");
}

}  // namespace rtmpc
