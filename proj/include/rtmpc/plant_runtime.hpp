// Plant-side runtime: consistency flag and smart-actuator bookkeeping, the
// local ancillary feedback around the nominal trajectory, and the plant ->
// controller packet.
//
// Tick-k cycle on this side: record theta_k, evaluate the consistency flag of
// the freshly received controller packet, adopt it when consistent (which
// also resets the nominal state in the state-feedback variant), apply the
// nominal input for offset k - s into the adopted plan, close the ancillary
// loop, and report (x_n(k), s_k) back.
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "rtmpc/synthesis.hpp"
#include "rtmpc/tracking_mpc.hpp"

namespace rtmpc {

// Payload sent plant -> controller. `x_n` carries the nominal state (the
// plant state itself for variants that do not run a nominal copy); `x` is the
// measured plant state, present only in the state-feedback variant.
struct PlantPacket {
  Vector x_n;
  long s = -1;
  long k_sent = -1;
  bool has_x = false;
  Vector x;
};

struct ActuatorState {
  long s = -1;               // tick at which `current` was adopted
  ControllerPacket current;  // the consistently received plan in use
  std::vector<int> theta_log;  // delivery outcome per tick, grows by one per tick
};

// Theta_k: 1 iff the packet of tick k arrived and every controller
// transmission since the plant packet it consumed (tick q) also arrived, so
// the remote estimate provably coincides with the local nominal state.
inline int consistency_flag(const std::vector<int>& theta_log, long q, long k) {
  if (k < 0 || static_cast<size_t>(k) >= theta_log.size())
    throw std::out_of_range("consistency_flag: k outside the logged range");
  if (theta_log[static_cast<size_t>(k)] != 1) return 0;
  for (long i = q + 1; i < k; ++i) {
    if (i < 0) continue;
    if (theta_log[static_cast<size_t>(i)] != 1) return 0;
  }
  return 1;
}

// Records theta_k, evaluates Theta_k, and adopts the packet when consistent
// (s_k = k); otherwise the previous plan and index persist. Returns Theta_k.
inline int actuator_step(ActuatorState& st, int theta_k, const ControllerPacket& pkt,
                         long k) {
  if (static_cast<long>(st.theta_log.size()) != k)
    throw std::logic_error("actuator_step: theta log out of sync with tick");
  st.theta_log.push_back(theta_k);
  const int Theta = (theta_k == 1) ? consistency_flag(st.theta_log, pkt.q, k) : 0;
  if (Theta == 1) {
    st.current = pkt;
    st.s = k;
  }
  return Theta;
}

// u_n(k): entry k - s of the adopted plan while it lasts, then the terminal
// feedback u_bar* + K_bar(x_bar* - x_n) expressed through the affine offset.
inline Vector nominal_input(const ActuatorState& st, long k, const Vector& x_n,
                            const Matrix& K_bar) {
  if (st.s < 0) throw std::logic_error("nominal_input: no plan adopted yet");
  const long offset = k - st.s;
  if (offset < 0) throw std::logic_error("nominal_input: tick precedes adoption");
  if (offset < st.current.u_traj.cols()) return st.current.u_traj.col(offset);
  return st.current.steady_input_affine - K_bar * x_n;
}

inline Vector ancillary_control(const Vector& u_n, const Vector& x, const Vector& x_n,
                                const Matrix& K) {
  return u_n - K * (x - x_n);
}

inline Vector nominal_step(const LtiModel& model, const Vector& x_n, const Vector& u_n) {
  return model.A * x_n + model.B * u_n;
}

// State-feedback variant: a consistent reception replaces the nominal state
// with the optimizer's initial state, re-centering the tube on the plant.
inline void nominal_reset(Vector& x_n, const ControllerPacket& pkt, int Theta) {
  if (Theta != 1) return;
  if (!pkt.has_x0) throw std::logic_error("nominal_reset: packet lacks x0");
  x_n = pkt.x0_opt;
}

inline PlantPacket make_plant_packet(const Vector& x_n, long s, long k) {
  PlantPacket p;
  p.x_n = x_n;
  p.s = s;
  p.k_sent = k;
  return p;
}

inline PlantPacket make_plant_packet(const Vector& x_n, long s, long k, const Vector& x) {
  PlantPacket p = make_plant_packet(x_n, s, k);
  p.has_x = true;
  p.x = x;
  return p;
}

}  // namespace rtmpc
