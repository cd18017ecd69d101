#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rtmpc/network.hpp"
#include "rtmpc/plant_runtime.hpp"
#include "rtmpc/remote_side.hpp"
#include "rtmpc/rng.hpp"

using namespace rtmpc;

namespace {
ControllerPacket packet_with_q(long q, int N = 3) {
  ControllerPacket pkt;
  pkt.u_traj = Matrix::Zero(1, N);
  pkt.steady_input_affine = Vector::Zero(1);
  pkt.q = q;
  pkt.k_sent = q + 1;
  return pkt;
}
}  // namespace

TEST_CASE("consistency flag: all deliveries since q+1 must have succeeded") {
  // theta history for ticks 0..4
  std::vector<int> log = {1, 1, 0, 1, 1};
  // packet consumed the plant packet of tick q; every theta in [q+1, k)
  // and theta_k itself must equal 1
  CHECK(consistency_flag(log, /*q=*/3, /*k=*/4) == 1);   // window {4}
  CHECK(consistency_flag(log, /*q=*/1, /*k=*/4) == 0);   // theta_2 = 0
  CHECK(consistency_flag(log, /*q=*/2, /*k=*/4) == 1);   // window {3,4}
  CHECK(consistency_flag(log, /*q=*/-1, /*k=*/1) == 1);  // negative skipped
}

TEST_CASE("actuator adopts only consistent packets") {
  ActuatorState st;
  st.current = packet_with_q(-1);

  // k = 0: delivery succeeds, packet consistent -> adopt
  CHECK(actuator_step(st, 1, packet_with_q(-1), 0) == 1);
  CHECK(st.s == 0);

  // k = 1: loss -> no adoption, s unchanged
  CHECK(actuator_step(st, 0, packet_with_q(0), 1) == 0);
  CHECK(st.s == 0);

  // k = 2: delivered but stale (q = 0 while theta_1 = 0 broke the chain)
  CHECK(actuator_step(st, 1, packet_with_q(0), 2) == 0);
  CHECK(st.s == 0);

  // k = 3: delivered and consistent (q = 2 -> window {3})
  CHECK(actuator_step(st, 1, packet_with_q(2), 3) == 1);
  CHECK(st.s == 3);
}

TEST_CASE("nominal input: plan replay then steady-state fallback") {
  ActuatorState st;
  st.s = 5;
  st.current = packet_with_q(4, /*N=*/3);
  st.current.u_traj << 1.0, 2.0, 3.0;
  st.current.steady_input_affine = Vector::Constant(1, 10.0);
  const Matrix K_bar = Matrix::Constant(1, 4, 0.0);
  Vector x_n = Vector::Zero(4);

  CHECK(nominal_input(st, 5, x_n, K_bar)(0) == 1.0);
  CHECK(nominal_input(st, 7, x_n, K_bar)(0) == 3.0);
  // beyond the plan: u = steady_affine - K_bar x_n
  CHECK(nominal_input(st, 8, x_n, K_bar)(0) == 10.0);
  Matrix K_bar2 = Matrix::Zero(1, 4);
  K_bar2(0, 0) = 2.0;
  x_n(0) = 1.5;
  CHECK(nominal_input(st, 9, x_n, K_bar2)(0) == doctest::Approx(7.0));
}

TEST_CASE("ancillary control subtracts tube feedback") {
  Matrix K = Matrix::Zero(1, 4);
  K(0, 2) = 3.0;
  Vector x = Vector::Zero(4), x_n = Vector::Zero(4);
  x(2) = 0.1;
  Vector u = ancillary_control(Vector::Constant(1, 1.0), x, x_n, K);
  CHECK(u(0) == doctest::Approx(1.0 - 0.3).epsilon(1e-12));
}

TEST_CASE("estimator: reception pins the estimate, loss propagates the plan") {
  Matrix A = Matrix::Identity(4, 4) * 2.0;
  Matrix B = Matrix::Zero(4, 1);
  B(0, 0) = 1.0;
  LtiModel model{A, B, Matrix::Identity(4, 4), 0.02};
  const Matrix K = Matrix::Zero(1, 4);
  const Matrix K_bar = Matrix::Zero(1, 4);

  EstimatorState st;
  st.x_hat = Vector::Ones(4);
  ControllerPacket sent = packet_with_q(-1);
  sent.u_traj = Matrix::Constant(1, 3, 5.0);
  st.sent.push_back(sent);

  PlantPacket pp;
  pp.x_n = Vector::Constant(4, 3.0);
  pp.s = 0;
  pp.k_sent = 0;

  SUBCASE("gamma = 1 adopts the nominal state") {
    estimator_update(st, model, K, K_bar, 1, pp, 0, /*state_feedback=*/false);
    // x_hat(1|0) = A * x_n + B * u_n(0) with u_n = plan entry 0 = 5
    CHECK(st.x_hat(0) == doctest::Approx(2.0 * 3.0 + 5.0));
    CHECK(st.x_hat(1) == doctest::Approx(6.0));
    CHECK(st.q == 0);
  }
  SUBCASE("gamma = 0 rolls the previous estimate forward with u*(0)") {
    estimator_update(st, model, K, K_bar, 0, pp, 0, /*state_feedback=*/false);
    CHECK(st.x_hat(0) == doctest::Approx(2.0 * 1.0 + 5.0));
    CHECK(st.q == -1);
  }
}

TEST_CASE("bernoulli link matches its loss rate over many draws") {
  Link link(LossProcess::bernoulli(0.5), derive_seed(2026, 0, 0, 0), "theta");
  long ok = 0;
  const long n = 100000;
  for (long k = 0; k < n; ++k) ok += link.transmit(k);
  CHECK(std::abs(static_cast<double>(ok) / n - 0.5) < 0.01);
}

TEST_CASE("links are deterministic given the stream seed") {
  Link a(LossProcess::bernoulli(0.3), derive_seed(7, 1, 2, 0), "theta");
  Link b(LossProcess::bernoulli(0.3), derive_seed(7, 1, 2, 0), "theta");
  for (long k = 0; k < 1000; ++k) CHECK(a.transmit(k) == b.transmit(k));
}

TEST_CASE("two channels of the same master seed are independent") {
  // chi-square on the 2x2 contingency table of paired draws
  Link a(LossProcess::bernoulli(0.5), derive_seed(11, 0, 0, 0), "theta");
  Link b(LossProcess::bernoulli(0.5), derive_seed(11, 0, 0, 1), "gamma");
  long n[2][2] = {{0, 0}, {0, 0}};
  const long total = 100000;
  for (long k = 0; k < total; ++k) ++n[a.transmit(k)][b.transmit(k)];
  double chi2 = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double row = n[i][0] + n[i][1];
      const double col = n[0][j] + n[1][j];
      const double expect = row * col / total;
      chi2 += (n[i][j] - expect) * (n[i][j] - expect) / expect;
    }
  CHECK(chi2 < 10.83);  // 1 dof, p = 0.001
}

TEST_CASE("scripted loss process replays its bits") {
  Link link(LossProcess::scripted({1, 0, 0, 1}), 0, "theta");
  CHECK(link.transmit(0) == 1);
  CHECK(link.transmit(1) == 0);
  CHECK(link.transmit(2) == 0);
  CHECK(link.transmit(3) == 1);
}

TEST_CASE("transmit enforces monotone ticks") {
  Link link(LossProcess::bernoulli(0.5), 1, "theta");
  link.transmit(0);
  link.transmit(1);
  CHECK_THROWS(link.transmit(1));
}

TEST_CASE("assumption monitor counts good events and bad runs") {
  // all-loss trace of length L reports a bad run of L
  std::vector<int> zeros(7, 0), ones(7, 1);
  auto rep = assumption1_monitor(zeros, zeros);
  CHECK(rep.longest_bad_run == 7);
  CHECK(rep.good_event_count == 0);

  // all-success trace: every tick is a good event (gamma_{-1} = 1 forced)
  rep = assumption1_monitor(ones, ones);
  CHECK(rep.longest_bad_run == 0);
  CHECK(rep.good_event_count == 7);

  // gamma loss at t breaks the event at t+1
  std::vector<int> gamma = {1, 0, 1, 1};
  std::vector<int> theta = {1, 1, 1, 1};
  rep = assumption1_monitor(gamma, theta);
  CHECK(rep.good_event_count == 3);
  CHECK(rep.longest_bad_run == 1);
}

TEST_CASE("seed derivation separates streams") {
  CHECK(derive_seed(1, 0, 0, 0) != derive_seed(1, 0, 0, 1));
  CHECK(derive_seed(1, 0, 0, 0) != derive_seed(1, 0, 1, 0));
  CHECK(derive_seed(1, 0, 0, 0) != derive_seed(2, 0, 0, 0));
  CHECK(derive_seed(3, 4, 5, 6) == derive_seed(3, 4, 5, 6));
}

TEST_CASE("splitmix64 uniform stays in [0,1) and fills the range") {
  SplitMix64 rng(123);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}
