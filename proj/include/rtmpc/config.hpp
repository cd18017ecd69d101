#pragma once

// JSON scenario configuration and the synthesis cache.
//
// Config schema (all keys optional; omitted keys take the defaults below):
// {
//   "cartpole":    { "I", "l", "m", "M", "b", "g", "Ts" },
//   "constraints": { "x_half_widths": [4], "u_half_widths": [1] },
//   "weights":     { "Q_diag": [4], "R_diag": [1], "T_diag": [4], "N": int },
//   "synthesis":   { "lambda", "k_max", "rpi_tol", "w_inflation",
//                    "disturbance": { "init_box": [4], "n_runs", "horizon",
//                                     "seed" } },
//   "experiment":  { "horizon", "x_r": [4], "x0": [4],
//                    "rho_list": [..], "seeds_per_rho", "master_seed",
//                    "loss_model": "bernoulli" }
// }
// Q/R/T are diagonal; the diagonals are listed explicitly.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtmpc/cartpole.hpp"
#include "rtmpc/polytope.hpp"
#include "rtmpc/synthesis.hpp"

namespace rtmpc {

using json = nlohmann::json;

struct DisturbanceConfig {
  Vector init_box = (Vector(4) << 0.2, 0.2, 0.1, 0.2).finished();
  int n_runs = 50;
  int horizon = 250;
  std::uint64_t seed = 12345;
};

struct SynthesisConfig {
  double lambda = 0.99;
  int k_max = 500;
  double rpi_tol = 1e-9;
  double w_inflation = 1.05;
  DisturbanceConfig disturbance;
};

struct ExperimentConfig {
  int horizon = 500;
  Vector x_r = (Vector(4) << 0.5, 0, 0, 0).finished();
  Vector x0 = Vector::Zero(4);
  std::vector<double> rho_list = {0.0, 0.1, 0.2, 0.3, 0.4,
                                  0.5, 0.6, 0.7, 0.8, 0.9};
  int seeds_per_rho = 20;
  std::uint64_t master_seed = 2026;
  std::string loss_model = "bernoulli";
};

struct Config {
  CartpoleParams cartpole;
  Vector x_half_widths = (Vector(4) << 5, 5, 0.3, 2).finished();
  Vector u_half_widths = Vector::Constant(1, 10.0);
  Vector Q_diag = (Vector(4) << 100, 10, 100, 10).finished();
  Vector R_diag = Vector::Constant(1, 0.1);
  Vector T_diag = Vector::Constant(4, 1e4);
  int N = 20;
  SynthesisConfig synthesis;
  ExperimentConfig experiment;
};

namespace detail {

inline Vector vec_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<size_t>(i)];
  return v;
}

inline json vec_to_json(const Vector& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

inline json mat_to_json(const Matrix& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

inline Matrix mat_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = j[static_cast<size_t>(r)][static_cast<size_t>(c)];
  return m;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void maybe_vec(const json& j, const char* key, Vector& out) {
  if (j.contains(key)) out = vec_from_json(j.at(key));
}

}  // namespace detail

inline Config config_from_json(const json& j) {
  Config c;
  if (j.contains("cartpole")) {
    const json& p = j.at("cartpole");
    detail::maybe(p, "I", c.cartpole.I);
    detail::maybe(p, "l", c.cartpole.l);
    detail::maybe(p, "m", c.cartpole.m);
    detail::maybe(p, "M", c.cartpole.M);
    detail::maybe(p, "b", c.cartpole.b);
    detail::maybe(p, "g", c.cartpole.g);
    detail::maybe(p, "Ts", c.cartpole.Ts);
  }
  if (j.contains("constraints")) {
    const json& p = j.at("constraints");
    detail::maybe_vec(p, "x_half_widths", c.x_half_widths);
    detail::maybe_vec(p, "u_half_widths", c.u_half_widths);
  }
  if (j.contains("weights")) {
    const json& p = j.at("weights");
    detail::maybe_vec(p, "Q_diag", c.Q_diag);
    detail::maybe_vec(p, "R_diag", c.R_diag);
    detail::maybe_vec(p, "T_diag", c.T_diag);
    detail::maybe(p, "N", c.N);
  }
  if (j.contains("synthesis")) {
    const json& p = j.at("synthesis");
    detail::maybe(p, "lambda", c.synthesis.lambda);
    detail::maybe(p, "k_max", c.synthesis.k_max);
    detail::maybe(p, "rpi_tol", c.synthesis.rpi_tol);
    detail::maybe(p, "w_inflation", c.synthesis.w_inflation);
    if (p.contains("disturbance")) {
      const json& d = p.at("disturbance");
      detail::maybe_vec(d, "init_box", c.synthesis.disturbance.init_box);
      detail::maybe(d, "n_runs", c.synthesis.disturbance.n_runs);
      detail::maybe(d, "horizon", c.synthesis.disturbance.horizon);
      detail::maybe(d, "seed", c.synthesis.disturbance.seed);
    }
  }
  if (j.contains("experiment")) {
    const json& p = j.at("experiment");
    detail::maybe(p, "horizon", c.experiment.horizon);
    detail::maybe_vec(p, "x_r", c.experiment.x_r);
    detail::maybe_vec(p, "x0", c.experiment.x0);
    detail::maybe(p, "rho_list", c.experiment.rho_list);
    detail::maybe(p, "seeds_per_rho", c.experiment.seeds_per_rho);
    detail::maybe(p, "master_seed", c.experiment.master_seed);
    detail::maybe(p, "loss_model", c.experiment.loss_model);
  }
  if (c.experiment.horizon < 1)
    throw std::invalid_argument("config: horizon must be >= 1");
  for (double rho : c.experiment.rho_list)
    if (rho < 0.0 || rho >= 1.0)
      throw std::invalid_argument("config: rho must lie in [0, 1)");
  if (c.experiment.loss_model != "bernoulli")
    throw std::invalid_argument("config: unsupported loss model '" +
                                c.experiment.loss_model + "'");
  return c;
}

inline json config_to_json(const Config& c) {
  json j;
  j["cartpole"] = {{"I", c.cartpole.I}, {"l", c.cartpole.l},
                   {"m", c.cartpole.m}, {"M", c.cartpole.M},
                   {"b", c.cartpole.b}, {"g", c.cartpole.g},
                   {"Ts", c.cartpole.Ts}};
  j["constraints"] = {{"x_half_widths", detail::vec_to_json(c.x_half_widths)},
                      {"u_half_widths", detail::vec_to_json(c.u_half_widths)}};
  j["weights"] = {{"Q_diag", detail::vec_to_json(c.Q_diag)},
                  {"R_diag", detail::vec_to_json(c.R_diag)},
                  {"T_diag", detail::vec_to_json(c.T_diag)},
                  {"N", c.N}};
  j["synthesis"] = {
      {"lambda", c.synthesis.lambda},
      {"k_max", c.synthesis.k_max},
      {"rpi_tol", c.synthesis.rpi_tol},
      {"w_inflation", c.synthesis.w_inflation},
      {"disturbance",
       {{"init_box", detail::vec_to_json(c.synthesis.disturbance.init_box)},
        {"n_runs", c.synthesis.disturbance.n_runs},
        {"horizon", c.synthesis.disturbance.horizon},
        {"seed", c.synthesis.disturbance.seed}}}};
  j["experiment"] = {{"horizon", c.experiment.horizon},
                     {"x_r", detail::vec_to_json(c.experiment.x_r)},
                     {"x0", detail::vec_to_json(c.experiment.x0)},
                     {"rho_list", c.experiment.rho_list},
                     {"seeds_per_rho", c.experiment.seeds_per_rho},
                     {"master_seed", c.experiment.master_seed},
                     {"loss_model", c.experiment.loss_model}};
  return j;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return config_from_json(j);
}

// FNV-1a over the canonical dump of the synthesis-relevant config subtree;
// identifies a cached synthesis result.
inline std::uint64_t synthesis_config_hash(const Config& c) {
  json j;
  j["cartpole"] = config_to_json(c)["cartpole"];
  j["constraints"] = config_to_json(c)["constraints"];
  j["weights"] = {{"Q_diag", detail::vec_to_json(c.Q_diag)},
                  {"R_diag", detail::vec_to_json(c.R_diag)}};
  j["synthesis"] = config_to_json(c)["synthesis"];
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline json hpolytope_to_json(const HPolytope& p) {
  return {{"H", detail::mat_to_json(p.H())}, {"h", detail::vec_to_json(p.h())}};
}

inline HPolytope hpolytope_from_json(const json& j) {
  return HPolytope(detail::mat_from_json(j.at("H")),
                   detail::vec_from_json(j.at("h")));
}

// Serialized synthesis output plus the disturbance box it was built from.
struct SynthesisCache {
  std::uint64_t config_hash = 0;
  Matrix A, B;
  GainSet gains;
  SetSuite sets;
  Box W;
  int truncated_disturbance_runs = 0;
};

inline json synthesis_cache_to_json(const SynthesisCache& c) {
  json j;
  j["config_hash"] = c.config_hash;
  j["A"] = detail::mat_to_json(c.A);
  j["B"] = detail::mat_to_json(c.B);
  j["K"] = detail::mat_to_json(c.gains.K);
  j["K_bar"] = detail::mat_to_json(c.gains.K_bar);
  j["P"] = detail::mat_to_json(c.gains.P);
  j["Z_K"] = hpolytope_to_json(c.sets.Z_K);
  j["X_c"] = hpolytope_to_json(c.sets.X_c);
  j["U_c"] = hpolytope_to_json(c.sets.U_c);
  j["X_f"] = hpolytope_to_json(c.sets.X_f);
  j["lambda"] = c.sets.lambda;
  j["w_support_on_Z_rows"] = detail::vec_to_json(c.sets.w_support_on_Z_rows);
  j["W_center"] = detail::vec_to_json(c.W.center);
  j["W_half_widths"] = detail::vec_to_json(c.W.half_widths);
  j["truncated_disturbance_runs"] = c.truncated_disturbance_runs;
  return j;
}

inline SynthesisCache synthesis_cache_from_json(const json& j) {
  SynthesisCache c;
  c.config_hash = j.at("config_hash").get<std::uint64_t>();
  c.A = detail::mat_from_json(j.at("A"));
  c.B = detail::mat_from_json(j.at("B"));
  c.gains.K = detail::mat_from_json(j.at("K"));
  c.gains.K_bar = detail::mat_from_json(j.at("K_bar"));
  c.gains.P = detail::mat_from_json(j.at("P"));
  c.sets.Z_K = hpolytope_from_json(j.at("Z_K"));
  c.sets.X_c = hpolytope_from_json(j.at("X_c"));
  c.sets.U_c = hpolytope_from_json(j.at("U_c"));
  c.sets.X_f = hpolytope_from_json(j.at("X_f"));
  c.sets.lambda = j.at("lambda").get<double>();
  c.sets.w_support_on_Z_rows =
      detail::vec_from_json(j.at("w_support_on_Z_rows"));
  c.W = Box(detail::vec_from_json(j.at("W_center")),
            detail::vec_from_json(j.at("W_half_widths")));
  c.truncated_disturbance_runs = j.at("truncated_disturbance_runs").get<int>();
  return c;
}

inline void save_synthesis_cache(const SynthesisCache& c,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write synthesis cache: " + path);
  out << synthesis_cache_to_json(c).dump(2) << "\n";
}

inline bool load_synthesis_cache(const std::string& path,
                                 std::uint64_t expected_hash,
                                 SynthesisCache& out) {
  std::ifstream in(path);
  if (!in) return false;
  json j;
  try {
    in >> j;
    SynthesisCache c = synthesis_cache_from_json(j);
    if (c.config_hash != expected_hash) return false;
    out = std::move(c);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace rtmpc
