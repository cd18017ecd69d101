// Tracking MPC with artificial steady-state target and tube-tightened
// constraints, solved as a dense convex QP over the stacked decision vector
//
//   z = [ x(0..N) | u(0..N-1) | x_bar | u_bar ]
//
// Two problem structures are prefactored at construction:
//  - "pinned":  x(0) = x_hat enters as an equality row block,
//  - "relaxed": the initial equality is replaced by the tube membership
//    H_Z (x_hat - x(0)) + sup_W(H_Z rows) <= h_Z together with x(0) in X_c,
//    used when the measured plant state (not the nominal replica) seeds the
//    problem.
// Only right-hand sides change between solves, so the per-step cost is a pair
// of triangular solves plus the active-set iterations.
#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>

#include "rtmpc/optimization.hpp"
#include "rtmpc/polytope.hpp"
#include "rtmpc/synthesis.hpp"

namespace rtmpc {

struct MpcWeights {
  Matrix Q;   // stage state weight, positive definite
  Matrix R;   // stage input weight, positive definite
  Matrix T;   // offset weight on (x_bar - x_r), positive definite
  int N = 0;  // horizon length, >= 1
};

struct MpcSolution {
  SolveTag tag = SolveTag::MaxIterations;
  Matrix x_traj;  // nx x (N+1)
  Matrix u_traj;  // nu x N
  Vector x_bar;
  Vector u_bar;
  double cost = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;

  bool feasible() const { return tag == SolveTag::Optimal; }
};

// Payload sent controller -> plant. `q` names the tick whose plant packet the
// optimization consumed; the receiver uses it to evaluate its consistency
// flag. `x0_opt` is populated only by the state-feedback variant, which also
// resets the nominal trajectory on consistent reception.
struct ControllerPacket {
  Matrix u_traj;              // nu x N, u*(0..N-1)
  Vector steady_input_affine; // u_bar* + K_bar x_bar*, tail feedback offset
  long q = -1;
  long k_sent = -1;
  bool has_x0 = false;
  Vector x0_opt;
};

namespace detail {

inline void require_pd(const Matrix& M, const char* name) {
  if (M.rows() != M.cols()) throw std::invalid_argument(std::string(name) + ": not square");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument(std::string(name) + ": not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument(std::string(name) + ": not positive definite");
}

}  // namespace detail

class TrackingMpc {
 public:
  // `build_relaxed` additionally prepares the tube-membership initial
  // constraint structure (only meaningful when sets.Z_K and
  // sets.w_support_on_Z_rows describe a nontrivial tube).
  TrackingMpc(const LtiModel& model, const GainSet& gains, const SetSuite& sets,
              const MpcWeights& weights, bool build_relaxed = false)
      : model_(model), gains_(gains), sets_(sets), w_(weights) {
    nx_ = model.nx();
    nu_ = model.nu();
    N_ = weights.N;
    if (N_ < 1) throw std::invalid_argument("mpc: horizon must be >= 1");
    detail::require_pd(w_.Q, "mpc Q");
    detail::require_pd(w_.R, "mpc R");
    detail::require_pd(w_.T, "mpc T");
    if (w_.Q.rows() != nx_ || w_.T.rows() != nx_ || w_.R.rows() != nu_)
      throw std::invalid_argument("mpc: weight dimensions mismatch");
    // (Q^{1/2}, A) observable: rank of the stacked observability matrix.
    {
      const Matrix C = Matrix(w_.Q.llt().matrixL()).transpose();
      Matrix obs(nx_ * nx_, nx_);
      Matrix CAk = C;
      for (Eigen::Index i = 0; i < nx_; ++i) {
        obs.middleRows(i * nx_, nx_) = CAk;
        CAk = CAk * model.A;
      }
      if (Eigen::ColPivHouseholderQR<Matrix>(obs).rank() < nx_)
        throw std::invalid_argument("mpc: (Q^1/2, A) not observable");
    }
    // Terminal cost must satisfy the Lyapunov identity for A - B K_bar.
    const Matrix Abar = model.A - model.B * gains.K_bar;
    const Matrix lyap_res = Abar.transpose() * gains.P * Abar - gains.P + w_.Q +
                            gains.K_bar.transpose() * w_.R * gains.K_bar;
    if (lyap_res.cwiseAbs().maxCoeff() > 1e-6 * (1.0 + gains.P.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("mpc: terminal cost fails the Lyapunov identity");
    if (sets.X_f.dim() != 2 * nx_ + nu_)
      throw std::invalid_argument("mpc: terminal set dimension mismatch");

    n_ = nx_ * (N_ + 1) + nu_ * N_ + nx_ + nu_;
    build_hessian();
    build_structures(build_relaxed);
  }

  const LtiModel& model() const { return model_; }
  Eigen::Index nx() const { return nx_; }
  Eigen::Index nu() const { return nu_; }
  int horizon() const { return N_; }
  const GainSet& gains() const { return gains_; }
  const SetSuite& sets() const { return sets_; }

  // Initial state enters as the equality x(0) = x_hat.
  MpcSolution solve_pinned(const Vector& x_hat, const Vector& x_r) const {
    Vector b_eq = Vector::Zero(nx_ * (N_ + 1) + nx_);
    b_eq.head(nx_) = x_hat;
    return run(*pinned_, b_eq, pinned_rhs(), x_r);
  }

  // Initial state enters through the tube rows; requires build_relaxed=true.
  MpcSolution solve_relaxed(const Vector& x_hat, const Vector& x_r) const {
    if (!relaxed_)
      throw std::logic_error("mpc: relaxed structure was not built");
    Vector b_eq = Vector::Zero(nx_ * N_ + nx_);
    Vector b_ineq = relaxed_rhs_base_;
    b_ineq.head(sets_.Z_K.rows()) -= sets_.Z_K.H() * x_hat;
    return run(*relaxed_, b_eq, b_ineq, x_r);
  }

 private:
  void build_hessian() {
    H_ = Matrix::Zero(n_, n_);
    const Eigen::Index ix_bar = nx_ * (N_ + 1) + nu_ * N_;
    const Eigen::Index iu_bar = ix_bar + nx_;
    auto couple = [&](Eigen::Index a, Eigen::Index b, Eigen::Index d, const Matrix& Wt) {
      H_.block(a, a, d, d) += 2.0 * Wt;
      H_.block(a, b, d, d) -= 2.0 * Wt;
      H_.block(b, a, d, d) -= 2.0 * Wt;
      H_.block(b, b, d, d) += 2.0 * Wt;
    };
    for (int i = 0; i < N_; ++i) {
      couple(nx_ * i, ix_bar, nx_, w_.Q);
      couple(nx_ * (N_ + 1) + nu_ * i, iu_bar, nu_, w_.R);
    }
    couple(nx_ * N_, ix_bar, nx_, gains_.P);
    H_.block(ix_bar, ix_bar, nx_, nx_) += 2.0 * w_.T;
  }

  // Equality rows shared by both structures: dynamics then steady-state.
  void append_common_equalities(Matrix& A_eq, Eigen::Index row0) const {
    const Eigen::Index iu0 = nx_ * (N_ + 1);
    const Eigen::Index ix_bar = iu0 + nu_ * N_;
    for (int i = 0; i < N_; ++i) {
      const Eigen::Index r = row0 + nx_ * i;
      A_eq.block(r, nx_ * (i + 1), nx_, nx_).setIdentity();
      A_eq.block(r, nx_ * i, nx_, nx_) = -model_.A;
      A_eq.block(r, iu0 + nu_ * i, nx_, nu_) = -model_.B;
    }
    const Eigen::Index rs = row0 + nx_ * N_;
    A_eq.block(rs, ix_bar, nx_, nx_) = model_.A - Matrix::Identity(nx_, nx_);
    A_eq.block(rs, ix_bar + nx_, nx_, nu_) = model_.B;
  }

  // Inequality rows: states in X_c for i in [i_first, N), inputs in U_c for
  // all stages, then the terminal rows over (x(N), x_bar, u_bar).
  void append_stage_and_terminal(Matrix& A_ineq, Vector& b_ineq, Eigen::Index row0,
                                 int i_first) const {
    const Eigen::Index mx = sets_.X_c.rows();
    const Eigen::Index mu = sets_.U_c.rows();
    const Eigen::Index iu0 = nx_ * (N_ + 1);
    const Eigen::Index ix_bar = iu0 + nu_ * N_;
    Eigen::Index r = row0;
    for (int i = i_first; i < N_; ++i, r += mx) {
      A_ineq.block(r, nx_ * i, mx, nx_) = sets_.X_c.H();
      b_ineq.segment(r, mx) = sets_.X_c.h();
    }
    for (int i = 0; i < N_; ++i, r += mu) {
      A_ineq.block(r, iu0 + nu_ * i, mu, nu_) = sets_.U_c.H();
      b_ineq.segment(r, mu) = sets_.U_c.h();
    }
    const Eigen::Index mf = sets_.X_f.rows();
    A_ineq.block(r, nx_ * N_, mf, nx_) = sets_.X_f.H().leftCols(nx_);
    A_ineq.block(r, ix_bar, mf, nx_ + nu_) = sets_.X_f.H().rightCols(nx_ + nu_);
    b_ineq.segment(r, mf) = sets_.X_f.h();
  }

  void build_structures(bool build_relaxed) {
    const Eigen::Index mx = sets_.X_c.rows();
    const Eigen::Index mu = sets_.U_c.rows();
    const Eigen::Index mf = sets_.X_f.rows();

    {
      Matrix A_eq = Matrix::Zero(nx_ + nx_ * N_ + nx_, n_);
      A_eq.topLeftCorner(nx_, nx_).setIdentity();  // x(0) = x_hat
      append_common_equalities(A_eq, nx_);
      const Eigen::Index mi = mx * N_ + mu * N_ + mf;
      Matrix A_ineq = Matrix::Zero(mi, n_);
      pinned_rhs_base_ = Vector::Zero(mi);
      // x(0) is fixed by equality but must also lie in X_c: with a
      // plant-state estimate this pair is what renders the problem
      // infeasible once the estimate leaves the state set.
      append_stage_and_terminal(A_ineq, pinned_rhs_base_, 0, 0);
      pinned_ = std::make_unique<QpPrefactored>(H_, A_eq, A_ineq, /*validate_psd=*/true);
    }

    if (build_relaxed) {
      const Eigen::Index mz = sets_.Z_K.rows();
      if (sets_.w_support_on_Z_rows.size() != mz)
        throw std::invalid_argument("mpc: w_support_on_Z_rows size mismatch");
      Matrix A_eq = Matrix::Zero(nx_ * N_ + nx_, n_);
      append_common_equalities(A_eq, 0);
      const Eigen::Index mi = mz + mx * N_ + mu * N_ + mf;
      Matrix A_ineq = Matrix::Zero(mi, n_);
      relaxed_rhs_base_ = Vector::Zero(mi);
      // H_Z (x_hat - x(0)) <= h_Z - sup_W rows  =>  -H_Z x(0) <= rhs - H_Z x_hat
      A_ineq.topLeftCorner(mz, nx_) = -sets_.Z_K.H();
      relaxed_rhs_base_.head(mz) = sets_.Z_K.h() - sets_.w_support_on_Z_rows;
      append_stage_and_terminal(A_ineq, relaxed_rhs_base_, mz, 0);
      relaxed_ = std::make_unique<QpPrefactored>(H_, A_eq, A_ineq, /*validate_psd=*/false);
    }
  }

  const Vector& pinned_rhs() const { return pinned_rhs_base_; }

  MpcSolution run(const QpPrefactored& pre, const Vector& b_eq, const Vector& b_ineq,
                  const Vector& x_r) const {
    Vector g = Vector::Zero(n_);
    const Eigen::Index ix_bar = nx_ * (N_ + 1) + nu_ * N_;
    g.segment(ix_bar, nx_) = -2.0 * w_.T * x_r;
    SolverOptions opt;
    opt.validate_psd = false;  // validated when the structure was factored
    const SolveStatus st = pre.solve(g, b_eq, b_ineq, opt);
    MpcSolution sol;
    sol.tag = st.tag;
    sol.iterations = st.iterations;
    if (!st.optimal()) return sol;
    sol.x_traj = Matrix(nx_, N_ + 1);
    for (int i = 0; i <= N_; ++i) sol.x_traj.col(i) = st.point.segment(nx_ * i, nx_);
    sol.u_traj = Matrix(nu_, N_);
    const Eigen::Index iu0 = nx_ * (N_ + 1);
    for (int i = 0; i < N_; ++i) sol.u_traj.col(i) = st.point.segment(iu0 + nu_ * i, nu_);
    sol.x_bar = st.point.segment(ix_bar, nx_);
    sol.u_bar = st.point.segment(ix_bar + nx_, nu_);
    // st.value omits the constant x_r' T x_r of the offset term; restore it.
    sol.cost = st.value + x_r.dot(w_.T * x_r);
    return sol;
  }

  LtiModel model_;
  GainSet gains_;
  SetSuite sets_;
  MpcWeights w_;
  Eigen::Index nx_ = 0, nu_ = 0, n_ = 0;
  int N_ = 0;
  Matrix H_;
  std::unique_ptr<QpPrefactored> pinned_, relaxed_;
  Vector pinned_rhs_base_, relaxed_rhs_base_;
};

inline ControllerPacket make_controller_packet(const MpcSolution& sol, const Matrix& K_bar,
                                               long q, long k_sent, bool include_x0) {
  ControllerPacket pkt;
  pkt.u_traj = sol.u_traj;
  pkt.steady_input_affine = sol.u_bar + K_bar * sol.x_bar;
  pkt.q = q;
  pkt.k_sent = k_sent;
  pkt.has_x0 = include_x0;
  if (include_x0) pkt.x0_opt = sol.x_traj.col(0);
  return pkt;
}

}  // namespace rtmpc
