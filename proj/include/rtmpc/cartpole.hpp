// Cartpole benchmark: continuous-time linearization around the upright
// equilibrium, the nonlinear ODE with RK4 sub-stepping under a zero-order
// hold, and the disturbance-set estimation procedure.

#pragma once

#include "rtmpc/polytope.hpp"
#include "rtmpc/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rtmpc {

struct CartpoleParams {
  double I = 0.001;   // pendulum inertia [kg m^2]
  double l = 0.5;     // length to center of mass [m]
  double m = 0.1;     // pendulum mass [kg]
  double M = 1.0;     // cart mass [kg]
  double b = 0.0;     // cart friction [N/m/s]
  double g = 9.8;     // gravity [m/s^2]
  double Ts = 0.02;   // sampling time [s]

  double r() const { return I * (M + m) + M * m * l * l; }

  void validate() const {
    if (I <= 0 || l <= 0 || m <= 0 || M <= 0 || g <= 0 || Ts <= 0 || b < 0)
      throw std::invalid_argument("CartpoleParams: nonpositive parameter");
    if (r() <= 0) throw std::invalid_argument("CartpoleParams: r <= 0");
  }
};

// state x = [p, p_dot, phi, phi_dot], phi measured from upright
using CartpoleState = Eigen::Vector4d;

inline std::pair<Matrix, Matrix> linearized_matrices(const CartpoleParams& pp) {
  pp.validate();
  const double r = pp.r();
  Matrix A = Matrix::Zero(4, 4);
  Matrix B = Matrix::Zero(4, 1);
  A(0, 1) = 1.0;
  A(1, 1) = -(pp.I + pp.m * pp.l * pp.l) * pp.b / r;
  A(1, 2) = -(pp.m * pp.m * pp.g * pp.l * pp.l) / r;
  A(2, 3) = 1.0;
  A(3, 1) = -(pp.m * pp.l * pp.b) / r;
  A(3, 2) = pp.m * pp.g * pp.l * (pp.M + pp.m) / r;
  B(1, 0) = (pp.I + pp.m * pp.l * pp.l) / r;
  B(3, 0) = -(pp.m * pp.l) / r;
  return {A, B};
}

// Coupled cartpole ODE. Accelerations solve
//   (M+m) p_dd + b p_d + m l phi_dd cos(phi) - m l phi_d^2 sin(phi) = u
//   (I+m l^2) phi_dd + m l p_dd cos(phi) - m g l sin(phi) = 0
// with signs chosen so the Jacobian at the origin equals the linearization.
inline CartpoleState nonlinear_derivative(const CartpoleState& x, double u,
                                          const CartpoleParams& pp) {
  const double phi = x(2);
  const double phid = x(3);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double ml = pp.m * pp.l;
  // [ M+m      ml c   ] [p_dd  ]   [ u - b p_d + ml phid^2 s ]
  // [ ml c   I + m l^2] [phi_dd] = [ m g l s                 ]
  const double a11 = pp.M + pp.m;
  const double a12 = ml * c;
  const double a22 = pp.I + ml * pp.l;
  const double det = a11 * a22 - a12 * a12;
  if (std::abs(det) < 1e-14)
    throw std::runtime_error("nonlinear_derivative: singular mass matrix");
  const double rhs1 = u - pp.b * x(1) + ml * phid * phid * s;
  const double rhs2 = pp.m * pp.g * pp.l * s;
  const double pdd = (a22 * rhs1 - a12 * rhs2) / det;
  const double phidd = (a11 * rhs2 - a12 * rhs1) / det;
  CartpoleState dx;
  dx << x(1), pdd, phid, phidd;
  return dx;
}

// RK4 integration over Ts with constant input (ZOH), `substeps` equal
// intervals; default matches a 500 Hz physics rate at Ts = 20 ms.
inline CartpoleState plant_step(const CartpoleState& x, double u,
                                const CartpoleParams& pp, int substeps = 0) {
  if (substeps <= 0) substeps = static_cast<int>(std::lround(pp.Ts * 500.0));
  const double dt = pp.Ts / substeps;
  CartpoleState s = x;
  for (int i = 0; i < substeps; ++i) {
    const CartpoleState k1 = nonlinear_derivative(s, u, pp);
    const CartpoleState k2 = nonlinear_derivative(s + 0.5 * dt * k1, u, pp);
    const CartpoleState k3 = nonlinear_derivative(s + 0.5 * dt * k2, u, pp);
    const CartpoleState k4 = nonlinear_derivative(s + dt * k3, u, pp);
    s += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!s.allFinite()) throw std::runtime_error("plant_step: non-finite state");
  return s;
}

struct DisturbanceEstimate {
  Box W;
  int truncated_runs = 0;  // trajectories that left the safety envelope
};

// Simulate the nonlinear plant under u = -Kx from random initial states and
// bound the residual w(k) = x(k+1) - (A - BK) x(k), componentwise.
inline DisturbanceEstimate estimate_disturbance_set(const CartpoleParams& pp,
                                                    const Matrix& A, const Matrix& B,
                                                    const Matrix& K, int n_runs,
                                                    int horizon, const Box& init_box,
                                                    uint64_t seed) {
  const Matrix AK = A - B * K;
  Vector bound = Vector::Zero(4);
  SplitMix64 rng(seed);
  int truncated = 0;
  for (int run = 0; run < n_runs; ++run) {
    CartpoleState x;
    for (int i = 0; i < 4; ++i) {
      x(i) = init_box.center(i) +
             init_box.half_widths(i) * (2.0 * rng.uniform() - 1.0);
    }
    for (int k = 0; k < horizon; ++k) {
      if (std::abs(x(2)) > 0.5) {  // safety envelope
        ++truncated;
        break;
      }
      const double u = -(K * x)(0);
      const CartpoleState x_next = plant_step(x, u, pp);
      const Vector w = x_next - AK * x;
      bound = bound.cwiseMax(w.cwiseAbs());
      x = x_next;
    }
  }
  DisturbanceEstimate est;
  est.W = Box(Vector::Zero(4), bound);
  est.truncated_runs = truncated;
  return est;
}

}  // namespace rtmpc
