// Offline controller and set synthesis: ZOH discretization, LQR gains,
// terminal cost, RPI tube cross-section, tightened constraint sets,
// augmented steady-state dynamics and the finitely determined terminal set.

#pragma once

#include "rtmpc/polytope.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>
#include <vector>

namespace rtmpc {

struct LtiModel {
  Matrix A;
  Matrix B;
  Matrix C;
  double sampling_time = 0.0;

  Eigen::Index nx() const { return A.rows(); }
  Eigen::Index nu() const { return B.cols(); }
};

struct GainSet {
  Matrix K;      // ancillary gain
  Matrix K_bar;  // steady-state gain
  Matrix P;      // terminal cost, Lyapunov identity for (A - B K_bar)
};

struct SetSuite {
  HPolytope Z_K;    // RPI tube cross-section
  HPolytope X_c;    // tightened state set
  HPolytope U_c;    // tightened input set
  HPolytope X_f;    // terminal set over (x, x_bar, u_bar)
  double lambda = 0.0;
  Vector w_support_on_Z_rows;  // support(W, H_Z row_i'), used by constraint
                               // relaxation of the state-feedback variant
};

struct SynthesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double spectral_radius(const Matrix& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

// ZOH discretization via the augmented-matrix exponential
// exp([[Ac, Bc], [0, 0]] Ts) = [[A, B], [0, I]].
inline std::pair<Matrix, Matrix> zoh_discretize(const Matrix& A_c, const Matrix& B_c,
                                                double Ts) {
  if (Ts <= 0.0) throw std::invalid_argument("zoh_discretize: Ts must be > 0");
  const Eigen::Index nx = A_c.rows();
  const Eigen::Index nu = B_c.cols();
  Matrix aug = Matrix::Zero(nx + nu, nx + nu);
  aug.topLeftCorner(nx, nx) = A_c;
  aug.topRightCorner(nx, nu) = B_c;
  Matrix e = (aug * Ts).exp();
  return {e.topLeftCorner(nx, nx), e.topRightCorner(nx, nu)};
}

// Stabilizing DARE fixed point by Riccati recursion, and the associated gain
// K = (R + B'PB)^{-1} B'PA.
inline std::pair<Matrix, Matrix> dare_gain(const Matrix& A, const Matrix& B,
                                           const Matrix& Q, const Matrix& R) {
  Matrix P = Q;
  const long max_iter = 1000000;
  for (long it = 0; it < max_iter; ++it) {
    Matrix BtPB = R + B.transpose() * P * B;
    Matrix K = BtPB.ldlt().solve(B.transpose() * P * A);
    Matrix P_next =
        A.transpose() * P * (A - B * K) + Q;
    P_next = 0.5 * (P_next + P_next.transpose());
    const double delta = (P_next - P).cwiseAbs().maxCoeff();
    P = P_next;
    if (delta < 1e-11) {
      Matrix Kf = (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
      if (spectral_radius(A - B * Kf) >= 1.0)
        throw SynthesisError("dare_gain: converged P is not stabilizing");
      return {Kf, P};
    }
  }
  throw SynthesisError("dare_gain: no convergence (stabilizability failure?)");
}

// Solve P = M'PM + S for M = A - B K_bar, S = Q + K_bar'R K_bar by doubling.
inline Matrix dlyap_terminal_cost(const Matrix& A, const Matrix& B,
                                  const Matrix& K_bar, const Matrix& Q,
                                  const Matrix& R) {
  Matrix M = A - B * K_bar;
  if (spectral_radius(M) >= 1.0)
    throw SynthesisError("dlyap_terminal_cost: spectral radius >= 1");
  Matrix P = Q + K_bar.transpose() * R * K_bar;
  Matrix Mk = M;
  for (int it = 0; it < 200; ++it) {
    Matrix P_next = P + Mk.transpose() * P * Mk;
    Mk = Mk * Mk;
    const double delta = (P_next - P).cwiseAbs().maxCoeff();
    P = 0.5 * (P_next + P_next.transpose());
    if (delta < 1e-14 * (1.0 + P.cwiseAbs().maxCoeff())) break;
  }
  return P;
}

// RPI outer approximation of the minimal invariant set of e+ = A_K e + w.
//
// Construction: pick s with A_K^s W subseteq alpha W (alpha small), so that
// Z_true = (1-alpha)^{-1} (W (+) A_K W (+) ... (+) A_K^{s-1} W) is invariant.
// Its support in any direction d is the geometric sum
//   h(d) = (1-alpha)^{-1} sum_{i<s} support(W, (A_K^i)' d),
// evaluated exactly per template row. The template polytope over D contains
// Z_true but can over-shoot between directions, so invariance of the returned
// H-representation is verified by LP (support of A_K Z (+) W along each row);
// failing rows enrich the template with their propagated direction A_K' d and
// the whole set of supports is recomputed.
inline HPolytope rpi_outer(const Matrix& A_K, const HPolytope& W,
                           const std::vector<Vector>& D, double tol = 1e-9) {
  if (spectral_radius(A_K) >= 1.0)
    throw SynthesisError("rpi_outer: closed loop not stable");
  if (W.h().minCoeff() <= 0.0)
    throw SynthesisError("rpi_outer: W must contain the origin in its interior");
  const Eigen::Index n = A_K.cols();

  // Template enrichment: propagate directions through A_K' until they
  // deduplicate (the richer the template, the tighter the fixed point).
  std::vector<Vector> dirs;
  auto add_dir = [&](Vector d) {
    const double nrm = d.norm();
    if (nrm < 1e-14) return false;
    d /= nrm;
    for (const Vector& e : dirs)
      if ((e - d).cwiseAbs().maxCoeff() < 1e-9) return false;
    dirs.push_back(std::move(d));
    return true;
  };
  for (const Vector& d : D) add_dir(d);
  constexpr int max_rings = 12;
  size_t ring_begin = 0;
  for (int ring = 0; ring < max_rings; ++ring) {
    const size_t ring_end = dirs.size();
    bool grew = false;
    for (size_t i = ring_begin; i < ring_end; ++i)
      grew |= add_dir(A_K.transpose() * dirs[i]);
    ring_begin = ring_end;
    if (!grew) break;
  }
  Matrix H(static_cast<Eigen::Index>(dirs.size()), n);
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    H.row(i) = dirs[static_cast<size_t>(i)].transpose();

  // Truncated geometric series gives the mRPI support along each row; the
  // template fixed point sits above it, so a scaled-up copy is a safe start.
  Vector h_mrpi(H.rows());
  {
    int s = 0;
    Matrix AKs = Matrix::Identity(n, n);
    while (AKs.cwiseAbs().maxCoeff() > 1e-9 && s < 20000) {
      AKs = A_K * AKs;
      ++s;
    }
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
      double acc = 0.0;
      Vector dir = H.row(i).transpose();
      for (int j = 0; j < s; ++j) {
        acc += support(W, dir);
        dir = A_K.transpose() * dir;
      }
      h_mrpi(i) = acc;
    }
  }

  // Downward iteration of the template hull map
  //   h_{t+1}(d) = support(Z_t, A_K'd) + support(W, d)
  // from well above the fixed point. Any fixed point h* is RPI for the
  // returned polytope: A_K Z* (+) W has exactly these supports along the
  // template rows, so it is contained in Z*. Convergence is checked, then the
  // invariance inequality is re-verified row by row.
  HPolytope Z(H, Vector::Constant(H.rows(), 100.0 * h_mrpi.maxCoeff()));
  bool converged = false;
  for (long it = 0; it < 100000; ++it) {
    Vector h_next(H.rows());
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
      const Vector d = H.row(i).transpose();
      h_next(i) = support(Z, A_K.transpose() * d) + support(W, d);
    }
    const double delta = (h_next - Z.h()).cwiseAbs().maxCoeff();
    Z = HPolytope(H, h_next);
    if (delta < tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw SynthesisError("rpi_outer: template fixed point did not converge");
  SupportFn mapped_sum = [&](const Vector& d) {
    return support(Z, A_K.transpose() * d) + support(W, d);
  };
  if (!inclusion_check(mapped_sum, Z, std::max(tol * 100.0, kGeomTol)))
    throw SynthesisError("rpi_outer: RPI verification failed (enlarge D or tol)");
  return Z;
}

// X_c = X (-) Z_K, U_c = U (-) (-K) Z_K, where the support of (-K)Z_K in
// direction d equals support(Z_K, -K'd).
inline std::pair<HPolytope, HPolytope> tighten(const HPolytope& X, const HPolytope& U,
                                               const HPolytope& Z_K, const Matrix& K) {
  HPolytope X_c = pontryagin_diff(X, Z_K);
  Vector h_u(U.rows());
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    const Vector d = U.H().row(i).transpose();
    h_u(i) = U.h()(i) - support(Z_K, -K.transpose() * d);
  }
  HPolytope U_c(U.H(), h_u);
  if (X_c.is_empty())
    throw SynthesisError("tighten: X_c is empty (tube too large for X)");
  if (U_c.is_empty())
    throw SynthesisError("tighten: U_c is empty (tube too large for U)");
  return {X_c, U_c};
}

// Block matrix of the augmented steady-state dynamics on (x_n, x_bar, u_bar).
inline Matrix augmented_dynamics(const Matrix& A, const Matrix& B, const Matrix& K_bar) {
  const Eigen::Index nx = A.rows();
  const Eigen::Index nu = B.cols();
  Matrix Aa = Matrix::Zero(2 * nx + nu, 2 * nx + nu);
  Aa.topLeftCorner(nx, nx) = A - B * K_bar;
  Aa.block(0, nx, nx, nx) = B * K_bar;
  Aa.topRightCorner(nx, nu) = B;
  Aa.block(nx, nx, nx, nx).setIdentity();
  Aa.bottomRightCorner(nu, nu).setIdentity();
  return Aa;
}

// Gilbert-Tan iteration for the maximal admissible set of x_a(k+1) = A_a x_a(k)
// under x_n in X_c, u_bar - K_bar(x_n - x_bar) in U_c, intersected with the
// lambda-scaled steady-state constraints. Rows G A_a^k <= g are accumulated
// until every candidate row at the next power is redundant.
inline HPolytope max_admissible_set(const Matrix& A_a, const HPolytope& X_c,
                                    const HPolytope& U_c, const Matrix& K_bar,
                                    double lambda, int k_max = 500) {
  if (lambda <= 0.0 || lambda >= 1.0)
    throw std::invalid_argument("max_admissible_set: lambda must be in (0,1)");
  const Eigen::Index nx = X_c.dim();
  const Eigen::Index nu = U_c.dim();
  const Eigen::Index na = 2 * nx + nu;

  // base rows G x_a <= g
  const Eigen::Index mx = X_c.rows();
  const Eigen::Index mu = U_c.rows();
  Matrix G(mx + mu + mx + mu, na);
  Vector g(G.rows());
  G.setZero();
  // x_n in X_c
  G.block(0, 0, mx, nx) = X_c.H();
  g.head(mx) = X_c.h();
  // u_bar - K_bar (x_n - x_bar) in U_c
  G.block(mx, 0, mu, nx) = -U_c.H() * K_bar;
  G.block(mx, nx, mu, nx) = U_c.H() * K_bar;
  G.block(mx, 2 * nx, mu, nu) = U_c.H();
  g.segment(mx, mu) = U_c.h();
  // x_bar in lambda X_c, u_bar in lambda U_c (invariant under A_a)
  G.block(mx + mu, nx, mx, nx) = X_c.H();
  g.segment(mx + mu, mx) = lambda * X_c.h();
  G.block(mx + mu + mx, 2 * nx, mu, nu) = U_c.H();
  g.tail(mu) = lambda * U_c.h();

  Matrix H_acc = G;
  Vector h_acc = g;
  Matrix Gk = G;  // G A_a^k, dynamic rows only would suffice; kept whole
  const double redundancy_tol = 1e-9;

  for (int k = 0; k < k_max; ++k) {
    Gk = Gk * A_a;
    // test every candidate row for redundancy w.r.t. the accumulated set
    std::vector<Eigen::Index> keep;
    HPolytope current(H_acc, h_acc);
    for (Eigen::Index i = 0; i < Gk.rows(); ++i) {
      const double sup = support(current, Gk.row(i).transpose());
      if (sup > g(i) + redundancy_tol) keep.push_back(i);
    }
    if (keep.empty()) return current;  // finitely determined at power k
    Matrix H_new(H_acc.rows() + static_cast<Eigen::Index>(keep.size()), na);
    Vector h_new(H_new.rows());
    H_new.topRows(H_acc.rows()) = H_acc;
    h_new.head(h_acc.size()) = h_acc;
    for (size_t j = 0; j < keep.size(); ++j) {
      H_new.row(H_acc.rows() + static_cast<Eigen::Index>(j)) = Gk.row(keep[j]);
      h_new(h_acc.size() + static_cast<Eigen::Index>(j)) = g(keep[j]);
    }
    H_acc = std::move(H_new);
    h_acc = std::move(h_new);
  }
  throw SynthesisError(
      "max_admissible_set: not determined within k_max (lambda too close to 1?)");
}

// Default direction template: +/- unit axes, all rows of H_x, and the rows of
// H_u (-K), everything normalized and deduplicated.
inline std::vector<Vector> default_rpi_template(const HPolytope& X, const HPolytope& U,
                                                const Matrix& K) {
  std::vector<Vector> D;
  const Eigen::Index n = X.dim();
  auto push_unique = [&](Vector d) {
    const double nrm = d.norm();
    if (nrm < 1e-14) return;
    d /= nrm;
    for (const Vector& e : D) {
      if ((e - d).cwiseAbs().maxCoeff() < 1e-12) return;
    }
    D.push_back(std::move(d));
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    push_unique(e);
    push_unique(-e);
  }
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    push_unique(X.H().row(i).transpose());
  const Matrix UK = U.H() * (-K);
  for (Eigen::Index i = 0; i < UK.rows(); ++i)
    push_unique(UK.row(i).transpose());
  return D;
}

// One-call synthesis for the benchmark pipeline.
struct SynthesisInputs {
  LtiModel model;
  HPolytope X, U, W;
  Matrix Q, R;       // LQR weights (also used by the MPC)
  double lambda = 0.99;
  int k_max = 500;
  double rpi_tol = 1e-9;
};

struct SynthesisResult {
  GainSet gains;
  SetSuite sets;
};

inline SynthesisResult synthesize(const SynthesisInputs& in) {
  SynthesisResult out;
  auto [K, P_lqr] = dare_gain(in.model.A, in.model.B, in.Q, in.R);
  out.gains.K = K;
  out.gains.K_bar = K;  // equal gains by default; split exposed via GainSet
  out.gains.P = dlyap_terminal_cost(in.model.A, in.model.B, out.gains.K_bar, in.Q, in.R);

  const Matrix A_K = in.model.A - in.model.B * out.gains.K;
  const std::vector<Vector> D = default_rpi_template(in.X, in.U, out.gains.K);
  out.sets.Z_K = rpi_outer(A_K, in.W, D, in.rpi_tol);
  auto [X_c, U_c] = tighten(in.X, in.U, out.sets.Z_K, out.gains.K);
  out.sets.X_c = X_c;
  out.sets.U_c = U_c;
  out.sets.lambda = in.lambda;
  const Matrix A_a = augmented_dynamics(in.model.A, in.model.B, out.gains.K_bar);
  out.sets.X_f =
      max_admissible_set(A_a, X_c, U_c, out.gains.K_bar, in.lambda, in.k_max);
  out.sets.w_support_on_Z_rows = Vector(out.sets.Z_K.rows());
  for (Eigen::Index i = 0; i < out.sets.Z_K.rows(); ++i)
    out.sets.w_support_on_Z_rows(i) =
        support(in.W, out.sets.Z_K.H().row(i).transpose());
  return out;
}

}  // namespace rtmpc
