// Controller-side estimator. Between receptions the estimate is propagated
// open loop through the nominal model; the applied input is reconstructed
// from a replica of every packet this side has transmitted, indexed by the
// adoption tick s reported back by the plant.
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "rtmpc/plant_runtime.hpp"
#include "rtmpc/synthesis.hpp"
#include "rtmpc/tracking_mpc.hpp"

namespace rtmpc {

struct EstimatorState {
  Vector x_hat;  // x_hat(k | k-1), the prediction consumed by tick k's solve
  long q = -1;   // tick of the most recent plant packet that arrived
  std::vector<ControllerPacket> sent;  // replica of transmitted plans, by tick
};

// Mirrors the actuator's input selection using the replicated plan adopted at
// tick s and the reported nominal state.
inline Vector replica_nominal_input(const std::vector<ControllerPacket>& sent, long s,
                                    long k, const Vector& x_n, const Matrix& K_bar) {
  if (s < 0 || static_cast<size_t>(s) >= sent.size())
    throw std::out_of_range("replica_nominal_input: s outside the sent log");
  const ControllerPacket& pkt = sent[static_cast<size_t>(s)];
  const long offset = k - s;
  if (offset < 0) throw std::logic_error("replica_nominal_input: tick precedes s");
  if (offset < pkt.u_traj.cols()) return pkt.u_traj.col(offset);
  return pkt.steady_input_affine - K_bar * x_n;
}

// Absorbs the tick-k plant packet (or its loss) after this side's plan for
// tick k has been stored in st.sent. Produces x_hat(k+1 | k) and the q used
// by the next outgoing plan. `state_feedback` selects the variant whose
// packets carry the measured plant state.
inline void estimator_update(EstimatorState& st, const LtiModel& model,
                             const Matrix& K, const Matrix& K_bar, int gamma_k,
                             const PlantPacket& pkt, long k, bool state_feedback) {
  if (static_cast<long>(st.sent.size()) != k + 1)
    throw std::logic_error("estimator_update: sent log out of sync with tick");
  Vector x_filt, u_filt;
  if (gamma_k == 1) {
    if (state_feedback) {
      if (!pkt.has_x) throw std::logic_error("estimator_update: packet lacks x");
      const Vector u_n = replica_nominal_input(st.sent, pkt.s, k, pkt.x_n, K_bar);
      x_filt = pkt.x;
      u_filt = ancillary_control(u_n, pkt.x, pkt.x_n, K);
    } else {
      x_filt = pkt.x_n;
      u_filt = replica_nominal_input(st.sent, pkt.s, k, pkt.x_n, K_bar);
    }
    st.q = k;
  } else {
    // No reception: fall back on this tick's own plan.
    x_filt = (state_feedback && st.sent.back().has_x0) ? st.sent.back().x0_opt : st.x_hat;
    u_filt = st.sent.back().u_traj.col(0);
  }
  st.x_hat = model.A * x_filt + model.B * u_filt;
}

}  // namespace rtmpc
