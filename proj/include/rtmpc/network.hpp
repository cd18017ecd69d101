// Deterministic, seeded lossy-channel simulation for the two link directions
// (theta: controller -> plant, gamma: plant -> controller), with pluggable
// loss processes and a transmission log.

#pragma once

#include "rtmpc/rng.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtmpc {

struct LossProcess {
  enum class Kind { Bernoulli, Scripted, GilbertElliott };
  Kind kind = Kind::Bernoulli;
  double rho = 0.0;                // Bernoulli loss probability, in [0,1)
  std::vector<int> script;         // Scripted: cycled bit sequence
  double p_gb = 0.0, p_bg = 0.0;   // GilbertElliott transition probabilities
  double rho_good = 0.0, rho_bad = 1.0;  // per-state loss probabilities

  static LossProcess bernoulli(double rho_) {
    if (rho_ < 0.0 || rho_ >= 1.0)
      throw std::invalid_argument("LossProcess: rho must be in [0,1)");
    LossProcess lp;
    lp.kind = Kind::Bernoulli;
    lp.rho = rho_;
    return lp;
  }
  static LossProcess scripted(std::vector<int> bits) {
    if (bits.empty()) throw std::invalid_argument("LossProcess: empty script");
    LossProcess lp;
    lp.kind = Kind::Scripted;
    lp.script = std::move(bits);
    return lp;
  }
  static LossProcess gilbert_elliott(double p_gb_, double p_bg_, double rho_good_,
                                     double rho_bad_) {
    LossProcess lp;
    lp.kind = Kind::GilbertElliott;
    lp.p_gb = p_gb_;
    lp.p_bg = p_bg_;
    lp.rho_good = rho_good_;
    lp.rho_bad = rho_bad_;
    return lp;
  }
};

// One direction of the channel. Each link owns an independent RNG stream
// (derived from the run seed plus a direction tag) and logs every draw.
class Link {
 public:
  Link(LossProcess loss, uint64_t stream_seed, std::string direction_tag)
      : loss_(std::move(loss)), rng_(stream_seed), tag_(std::move(direction_tag)) {}

  // Returns the delivery bit for time step k; k must advance by exactly 1.
  int transmit(long k) {
    if (k != next_k_)
      throw std::logic_error("Link::transmit: non-monotone time index");
    ++next_k_;
    int bit = 1;
    switch (loss_.kind) {
      case LossProcess::Kind::Bernoulli:
        bit = rng_.bernoulli(1.0 - loss_.rho) ? 1 : 0;
        break;
      case LossProcess::Kind::Scripted:
        bit = loss_.script[static_cast<size_t>(k) % loss_.script.size()] ? 1 : 0;
        break;
      case LossProcess::Kind::GilbertElliott: {
        const double flip = rng_.uniform();
        if (good_state_ ? (flip < loss_.p_gb) : (flip < loss_.p_bg))
          good_state_ = !good_state_;
        const double rho = good_state_ ? loss_.rho_good : loss_.rho_bad;
        bit = rng_.bernoulli(1.0 - rho) ? 1 : 0;
        break;
      }
    }
    log_.push_back(bit);
    return bit;
  }

  const std::vector<int>& log() const { return log_; }
  const std::string& tag() const { return tag_; }

 private:
  LossProcess loss_;
  SplitMix64 rng_;
  std::string tag_;
  long next_k_ = 0;
  bool good_state_ = true;
  std::vector<int> log_;
};

struct Assumption1Report {
  long longest_bad_run = 0;   // longest stretch with gamma_{t-1} * theta_t = 0
  long good_event_count = 0;  // count of gamma_{t-1} = theta_t = 1
};

// Diagnostic for the consecutive-success assumption: scans paired logs for
// events gamma_{t-1} = theta_t = 1.
inline Assumption1Report assumption1_monitor(const std::vector<int>& gamma_log,
                                             const std::vector<int>& theta_log) {
  Assumption1Report rep;
  long bad_run = 0;
  const size_t n = std::min(gamma_log.size(), theta_log.size());
  // gamma_{-1} = 1 by the forced-initial-exchange convention
  for (size_t t = 0; t < n; ++t) {
    const int gamma_prev = (t == 0) ? 1 : gamma_log[t - 1];
    if (gamma_prev == 1 && theta_log[t] == 1) {
      ++rep.good_event_count;
      bad_run = 0;
    } else {
      ++bad_run;
      if (bad_run > rep.longest_bad_run) rep.longest_bad_run = bad_run;
    }
  }
  return rep;
}

}  // namespace rtmpc
