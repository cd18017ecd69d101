// Dense LP and convex-QP kernels used by the set computations and the MPC.
//
// LP:  maximize c'x  s.t.  A_ineq x <= b_ineq, A_eq x = b_eq  (x free).
//      Solved through the dual in standard form with a two-phase simplex,
//      which keeps the simplex row count at the (small) primal dimension
//      even when the polytopes carry hundreds of rows.
// QP:  minimize 0.5 x'P x + q'x under the same constraint types.
//      Equalities are eliminated through an orthonormal nullspace basis and
//      the reduced strictly convex problem is solved with the dual
//      active-set method of Goldfarb and Idnani. Infeasibility is detected
//      affirmatively (dual ray), never by timeout.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtmpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LinearProgram {
  Vector c;        // objective, maximized
  Matrix A_ineq;   // A_ineq x <= b_ineq
  Vector b_ineq;
  Matrix A_eq;     // A_eq x = b_eq (may be 0x0)
  Vector b_eq;
};

struct QuadraticProgram {
  Matrix P_obj;    // symmetric PSD, objective 0.5 x'P x + q'x, minimized
  Vector q_obj;
  Matrix A_ineq;
  Vector b_ineq;
  Matrix A_eq;
  Vector b_eq;
};

enum class SolveTag { Optimal, Infeasible, Unbounded, MaxIterations };

struct SolveStatus {
  SolveTag tag = SolveTag::MaxIterations;
  Vector point;          // valid when Optimal
  double value = std::numeric_limits<double>::quiet_NaN();
  double dual_value = std::numeric_limits<double>::quiet_NaN();  // LP only
  Vector ineq_multipliers;  // QP only, one per A_ineq row, >= 0
  int iterations = 0;

  bool optimal() const { return tag == SolveTag::Optimal; }
};

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-6;
  int max_iter = 50000;
  bool validate_psd = true;   // symmetric eigenvalue check on P_obj
};

namespace detail {

inline void check_lp_dims(const LinearProgram& lp) {
  const Eigen::Index n = lp.c.size();
  if (lp.A_ineq.rows() != lp.b_ineq.size())
    throw std::invalid_argument("lp: A_ineq rows != b_ineq size");
  if (lp.A_ineq.size() > 0 && lp.A_ineq.cols() != n)
    throw std::invalid_argument("lp: A_ineq cols != c size");
  if (lp.A_eq.rows() != lp.b_eq.size())
    throw std::invalid_argument("lp: A_eq rows != b_eq size");
  if (lp.A_eq.size() > 0 && lp.A_eq.cols() != n)
    throw std::invalid_argument("lp: A_eq cols != c size");
}

// Two-phase tableau simplex for  min g'w  s.t.  M w = r, w >= 0.
// Dantzig pricing with lowest-index tie breaking, switching to Bland's rule
// after a fixed iteration count so termination is guaranteed. Deterministic.
struct StandardFormResult {
  SolveTag tag = SolveTag::MaxIterations;
  Vector w;
  Vector row_multipliers;  // pi with pi = g_B' B^{-1}; dual of the rows
  double value = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

inline StandardFormResult simplex_standard_form(const Matrix& M, const Vector& r,
                                                const Vector& g, int max_iter) {
  constexpr double kPivotTol = 1e-9;   // smallest admissible pivot element
  constexpr double kPriceTol = 1e-10;  // reduced-cost significance threshold
  const Eigen::Index n_rows = M.rows();
  const Eigen::Index n_struct = M.cols();
  const Eigen::Index n_total = n_struct + n_rows;  // structural + artificial

  // Tableau: rows of [M | I] with rhs, artificial basis start. Rows with
  // negative rhs are negated so the artificial start is feasible.
  Matrix T(n_rows, n_total + 1);
  T.setZero();
  T.block(0, 0, n_rows, n_struct) = M;
  T.col(n_total) = r;
  std::vector<double> row_sign(static_cast<size_t>(n_rows), 1.0);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    if (T(i, n_total) < 0.0) {
      T.row(i) = -T.row(i);
      row_sign[static_cast<size_t>(i)] = -1.0;
    }
    T(i, n_struct + i) = 1.0;
  }
  std::vector<Eigen::Index> basis(static_cast<size_t>(n_rows));
  for (Eigen::Index i = 0; i < n_rows; ++i) basis[static_cast<size_t>(i)] = n_struct + i;

  StandardFormResult res;
  int iter_total = 0;
  const int bland_switch = 2000;

  auto run_phase = [&](const Vector& cost, Eigen::Index n_cols) -> SolveTag {
    // Reduced costs maintained from scratch each pricing step via the basis
    // multipliers; tableau rows are kept in basis-inverse form.
    while (true) {
      if (iter_total >= max_iter) return SolveTag::MaxIterations;
      // multipliers y' = c_B' (rows already expressed in B^{-1} form, so the
      // reduced cost of column j is c_j - c_B' T_j)
      Vector cb(n_rows);
      for (Eigen::Index i = 0; i < n_rows; ++i) cb(i) = cost(basis[static_cast<size_t>(i)]);
      Eigen::Index enter = -1;
      double best = -kPriceTol;
      const bool bland = iter_total >= bland_switch;
      for (Eigen::Index j = 0; j < n_cols; ++j) {
        const double rc = cost(j) - cb.dot(T.col(j));
        if (bland) {
          if (rc < -kPriceTol) { enter = j; break; }
        } else if (rc < best - 1e-15) {
          best = rc;
          enter = j;
        }
      }
      if (enter < 0) return SolveTag::Optimal;
      // Ratio test. In Bland mode the leaving row is the exact argmin with
      // the smallest basis index on exact ties (the anti-cycling guarantee
      // needs the unfuzzed rule); otherwise ties within a small band prefer
      // the larger pivot element for stability.
      Eigen::Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n_rows; ++i) {
        const double a = T(i, enter);
        if (a > kPivotTol) {
          const double ratio = T(i, n_total) / a;
          if (bland) {
            if (ratio < best_ratio ||
                (ratio == best_ratio && leave >= 0 &&
                 basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)])) {
              best_ratio = ratio;
              leave = i;
            }
          } else if (ratio < best_ratio - 1e-12) {
            best_ratio = ratio;
            leave = i;
          } else if (ratio < best_ratio + 1e-12 && leave >= 0 &&
                     a > T(leave, enter)) {
            leave = i;
          }
        }
      }
      if (leave < 0) return SolveTag::Unbounded;
      // pivot
      const double piv = T(leave, enter);
      T.row(leave) /= piv;
      for (Eigen::Index i = 0; i < n_rows; ++i) {
        if (i == leave) continue;
        const double f = T(i, enter);
        if (f != 0.0) T.row(i) -= f * T.row(leave);
      }
      basis[static_cast<size_t>(leave)] = enter;
      ++iter_total;
    }
  };

  // Phase 1: minimize artificial sum.
  Vector cost1 = Vector::Zero(n_total);
  cost1.tail(n_rows).setOnes();
  SolveTag t1 = run_phase(cost1, n_total);
  res.iterations = iter_total;
  if (t1 == SolveTag::MaxIterations) { res.tag = t1; return res; }
  double art_sum = 0.0;
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    if (basis[static_cast<size_t>(i)] >= n_struct) art_sum += T(i, n_total);
  }
  if (art_sum > 1e-8) {
    res.tag = SolveTag::Infeasible;
    res.iterations = iter_total;
    return res;
  }
  // Drive leftover artificials out of the basis where possible; rows whose
  // artificial cannot leave are redundant and harmless at zero level.
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    if (basis[static_cast<size_t>(i)] < n_struct) continue;
    for (Eigen::Index j = 0; j < n_struct; ++j) {
      if (std::abs(T(i, j)) > 1e-9) {
        const double piv = T(i, j);
        T.row(i) /= piv;
        for (Eigen::Index k = 0; k < n_rows; ++k) {
          if (k == i) continue;
          const double f = T(k, j);
          if (f != 0.0) T.row(k) -= f * T.row(i);
        }
        basis[static_cast<size_t>(i)] = j;
        break;
      }
    }
  }

  // Phase 2: artificial columns are priced out by restricting to structurals.
  Vector cost2 = Vector::Zero(n_total);
  cost2.head(n_struct) = g;
  SolveTag t2 = run_phase(cost2, n_struct);
  res.iterations = iter_total;
  if (t2 != SolveTag::Optimal) { res.tag = t2; return res; }

  res.w = Vector::Zero(n_struct);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    if (basis[static_cast<size_t>(i)] < n_struct)
      res.w(basis[static_cast<size_t>(i)]) = T(i, n_total);
  }
  res.value = g.dot(res.w);
  // Row multipliers from the final tableau: pi = c_B' B^{-1}; the artificial
  // columns hold B^{-1} up to the phase-1 row sign flips, which we undo by
  // tracking them through the initial negation (rows were flipped before the
  // identity was written, so columns already account for it).
  Vector cb(n_rows);
  for (Eigen::Index i = 0; i < n_rows; ++i) cb(i) = cost2(basis[static_cast<size_t>(i)]);
  res.row_multipliers = Vector(n_rows);
  for (Eigen::Index i = 0; i < n_rows; ++i)
    res.row_multipliers(i) = row_sign[static_cast<size_t>(i)] * cb.dot(T.col(n_struct + i));
  res.tag = SolveTag::Optimal;
  return res;
}

}  // namespace detail

inline SolveStatus lp_solve(const LinearProgram& lp, double tol = 1e-7,
                            int max_iter = 50000);

namespace detail {

// Feasibility of {A x <= b, E x = f}: phase-1 LP  max -1't  s.t.
// A x - t <= b, E x - t <= f, -E x - t <= -f, t >= 0 (scalar t), which is
// always feasible and bounded, so the dual-simplex route cannot hit the
// ambiguous both-infeasible branch.
inline bool primal_feasible(const Matrix& A, const Vector& b, const Matrix& E,
                            const Vector& f, double tol) {
  const Eigen::Index n = (A.size() > 0) ? A.cols() : E.cols();
  const Eigen::Index m = A.rows();
  const Eigen::Index p = E.rows();
  LinearProgram ph;
  ph.c = Vector::Zero(n + 1);
  ph.c(n) = -1.0;
  ph.A_ineq = Matrix::Zero(m + 2 * p + 1, n + 1);
  ph.b_ineq = Vector::Zero(m + 2 * p + 1);
  if (m > 0) {
    ph.A_ineq.block(0, 0, m, n) = A;
    ph.A_ineq.block(0, n, m, 1).setConstant(-1.0);
    ph.b_ineq.head(m) = b;
  }
  if (p > 0) {
    ph.A_ineq.block(m, 0, p, n) = E;
    ph.A_ineq.block(m, n, p, 1).setConstant(-1.0);
    ph.b_ineq.segment(m, p) = f;
    ph.A_ineq.block(m + p, 0, p, n) = -E;
    ph.A_ineq.block(m + p, n, p, 1).setConstant(-1.0);
    ph.b_ineq.segment(m + p, p) = -f;
  }
  ph.A_ineq(m + 2 * p, n) = -1.0;  // t >= 0
  ph.b_ineq(m + 2 * p) = 0.0;
  SolveStatus st = lp_solve(ph, tol);
  return st.optimal() && st.value > -tol;
}

}  // namespace detail

// Maximize c'x subject to A_ineq x <= b_ineq and A_eq x = b_eq.
inline SolveStatus lp_solve(const LinearProgram& lp, double tol, int max_iter) {
  detail::check_lp_dims(lp);
  if (tol <= 0.0) throw std::invalid_argument("lp_solve: tol must be positive");
  const Eigen::Index n = lp.c.size();
  const Eigen::Index m = lp.A_ineq.rows();
  const Eigen::Index p = lp.A_eq.rows();

  // Dual standard form: min b'y + f'(z+ - z-)  s.t.  A'y + E'(z+ - z-) = c,
  // y, z+, z- >= 0. The row multipliers of the optimum recover the primal x.
  Matrix M(n, m + 2 * p);
  if (m > 0) M.block(0, 0, n, m) = lp.A_ineq.transpose();
  if (p > 0) {
    M.block(0, m, n, p) = lp.A_eq.transpose();
    M.block(0, m + p, n, p) = -lp.A_eq.transpose();
  }
  Vector g(m + 2 * p);
  if (m > 0) g.head(m) = lp.b_ineq;
  if (p > 0) {
    g.segment(m, p) = lp.b_eq;
    g.segment(m + p, p) = -lp.b_eq;
  }

  detail::StandardFormResult dual = detail::simplex_standard_form(M, lp.c, g, max_iter);

  SolveStatus st;
  st.iterations = dual.iterations;
  switch (dual.tag) {
    case SolveTag::Optimal:
      st.tag = SolveTag::Optimal;
      st.point = dual.row_multipliers;
      st.value = lp.c.dot(st.point);
      st.dual_value = dual.value;
      break;
    case SolveTag::Unbounded:
      // dual unbounded => primal infeasible
      st.tag = SolveTag::Infeasible;
      break;
    case SolveTag::Infeasible:
      // dual infeasible => primal unbounded or infeasible; disambiguate.
      st.tag = detail::primal_feasible(lp.A_ineq, lp.b_ineq, lp.A_eq, lp.b_eq, tol)
                   ? SolveTag::Unbounded
                   : SolveTag::Infeasible;
      break;
    case SolveTag::MaxIterations:
      st.tag = SolveTag::MaxIterations;
      break;
  }
  return st;
}

namespace detail {

// Goldfarb-Idnani dual active-set method for
//   min 0.5 y'G y + a'y   s.t.   C y >= d   (C is m x n),
// with G symmetric positive definite given through its LLT factor.
// Infeasibility is certified by an unbounded dual ray (no primal step and
// no droppable active constraint), never by a timeout.
struct GiResult {
  SolveTag tag = SolveTag::MaxIterations;
  Vector y;
  Vector lambda;  // multipliers for the m inequality rows (>= 0)
  int iterations = 0;
};

inline GiResult goldfarb_idnani(const Eigen::LLT<Matrix>& llt, const Vector& a,
                                const Matrix& C, const Vector& d, int max_iter) {
  const Eigen::Index n = a.size();
  const Eigen::Index m = C.rows();
  GiResult res;

  Vector y = -llt.solve(a);
  if (m == 0) {
    res.tag = SolveTag::Optimal;
    res.y = y;
    res.lambda = Vector::Zero(0);
    return res;
  }

  // J = L^{-T}, so G^{-1} = J J'. Maintained such that J' N_active = [R; 0]
  // with R upper triangular over the active columns.
  Matrix J = Matrix::Identity(n, n);
  llt.matrixL().transpose().solveInPlace(J);
  Matrix R = Matrix::Zero(n, n);
  std::vector<Eigen::Index> active;
  Vector u = Vector::Zero(n + 1);

  const double dmax = (d.size() > 0) ? d.cwiseAbs().maxCoeff() : 0.0;
  const double ctol = 1e-10 * (1.0 + dmax);

  // Rotate components (j, j+1): v_j <- c v_j + s v_{j+1}, v_{j+1} <- -s v_j + c v_{j+1},
  // applied consistently to R rows and J columns.
  auto rotate = [&](Eigen::Index j, double c, double s, Eigen::Index r_cols) {
    for (Eigen::Index col = 0; col < r_cols; ++col) {
      const double r1 = R(j, col), r2 = R(j + 1, col);
      R(j, col) = c * r1 + s * r2;
      R(j + 1, col) = -s * r1 + c * r2;
    }
    const Vector j1 = J.col(j), j2 = J.col(j + 1);
    J.col(j) = c * j1 + s * j2;
    J.col(j + 1) = -s * j1 + c * j2;
  };

  auto drop_constraint = [&](Eigen::Index l) {
    const Eigen::Index q = static_cast<Eigen::Index>(active.size());
    active.erase(active.begin() + l);
    for (Eigen::Index i = l; i + 1 < q; ++i) u(i) = u(i + 1);
    for (Eigen::Index col = l; col + 1 < q; ++col) R.col(col) = R.col(col + 1);
    R.col(q - 1).setZero();
    // re-triangularize: R now has one subdiagonal entry per column l..q-2
    for (Eigen::Index j = l; j + 1 < q; ++j) {
      const double r1 = R(j, j), r2 = R(j + 1, j);
      if (r2 == 0.0) continue;
      const double norm = std::hypot(r1, r2);
      rotate(j, r1 / norm, r2 / norm, q - 1);
    }
  };

  int iter = 0;
  while (true) {
    if (++iter > max_iter) {
      res.tag = SolveTag::MaxIterations;
      res.iterations = iter;
      return res;
    }
    // most violated inactive constraint, lowest index on ties
    Vector s = C * y - d;
    for (size_t i = 0; i < active.size(); ++i) s(active[i]) = 0.0;
    Eigen::Index p = -1;
    double worst = -ctol;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (s(i) < worst - 1e-15) {
        worst = s(i);
        p = i;
      }
    }
    if (p < 0) {
      res.tag = SolveTag::Optimal;
      res.y = y;
      res.lambda = Vector::Zero(m);
      for (size_t i = 0; i < active.size(); ++i)
        res.lambda(active[i]) = u(static_cast<Eigen::Index>(i));
      res.iterations = iter;
      return res;
    }

    const Vector np = C.row(p).transpose();
    double u_cand = 0.0;
    double s_p = s(p);

    while (true) {
      if (++iter > max_iter) {
        res.tag = SolveTag::MaxIterations;
        res.iterations = iter;
        return res;
      }
      const Eigen::Index q = static_cast<Eigen::Index>(active.size());
      const Vector dvec = J.transpose() * np;
      Vector z = Vector::Zero(n);
      if (q < n) z = J.rightCols(n - q) * dvec.tail(n - q);
      Vector rstep = Vector::Zero(q);
      if (q > 0)
        rstep = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(dvec.head(q));

      double t1 = std::numeric_limits<double>::infinity();
      Eigen::Index l = -1;
      for (Eigen::Index i = 0; i < q; ++i) {
        if (rstep(i) > 1e-13) {
          const double t = u(i) / rstep(i);
          if (t < t1 - 1e-15) {
            t1 = t;
            l = i;
          }
        }
      }

      const bool primal_step = z.squaredNorm() > 1e-22;
      double t2 = std::numeric_limits<double>::infinity();
      if (primal_step) t2 = -s_p / z.dot(np);

      if (!primal_step && !std::isfinite(t1)) {
        res.tag = SolveTag::Infeasible;
        res.iterations = iter;
        return res;
      }
      const double t = std::min(t1, t2);

      if (primal_step) {
        y += t * z;
        s_p = np.dot(y) - d(p);
      }
      if (q > 0) u.head(q) -= t * rstep;
      u_cand += t;

      if (t == t2 && t2 <= t1) {
        // full step: activate p
        Vector dv = dvec;
        for (Eigen::Index i = n - 1; i > q; --i) {
          const double v1 = dv(i - 1), v2 = dv(i);
          if (v2 == 0.0) continue;
          const double norm = std::hypot(v1, v2);
          const double c = v1 / norm, sg = v2 / norm;
          dv(i - 1) = norm;
          dv(i) = 0.0;
          rotate(i - 1, c, sg, q);
        }
        R.col(q).head(q + 1) = dv.head(q + 1);
        u(q) = u_cand;
        active.push_back(p);
        break;
      }
      // partial step: drop blocking constraint and retry the same candidate
      drop_constraint(l);
    }
  }
}

}  // namespace detail

// Structure-reusing convex QP solver: the matrices (P_obj, A_eq, A_ineq) are
// factored once; solve() accepts fresh right-hand sides. qp_solve below is
// the one-shot convenience wrapper.
class QpPrefactored {
 public:
  QpPrefactored(const Matrix& P, const Matrix& A_eq, const Matrix& A_ineq,
                bool validate_psd = true) {
    n_ = P.rows();
    if (P.cols() != n_) throw std::invalid_argument("qp: P not square");
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("qp: P not symmetric");
    if (validate_psd) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::invalid_argument("qp: P not positive semidefinite");
    }
    if (A_eq.size() > 0 && A_eq.cols() != n_)
      throw std::invalid_argument("qp: A_eq cols mismatch");
    if (A_ineq.size() > 0 && A_ineq.cols() != n_)
      throw std::invalid_argument("qp: A_ineq cols mismatch");
    P_ = P;
    A_eq_ = A_eq;
    A_ineq_ = A_ineq;
    p_ = A_eq.rows();

    if (p_ > 0) {
      qr_.compute(A_eq_.transpose());
      rank_ = qr_.rank();
      Matrix Qfull = qr_.householderQ();
      range_ = Qfull.leftCols(rank_);
      null_ = Qfull.rightCols(n_ - rank_);
      R1_ = qr_.matrixR().topLeftCorner(rank_, rank_).triangularView<Eigen::Upper>();
    } else {
      rank_ = 0;
      null_ = Matrix::Identity(n_, n_);
    }
    const Eigen::Index r = n_ - rank_;
    Matrix Gred = null_.transpose() * P_ * null_;
    // Jitter only if the reduced Hessian is not numerically PD.
    double jitter = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      llt_.compute(Gred + jitter * Matrix::Identity(r, r));
      if (llt_.info() == Eigen::Success) break;
      jitter = (jitter == 0.0) ? 1e-12 * (1.0 + Gred.diagonal().cwiseAbs().maxCoeff())
                               : jitter * 100.0;
    }
    if (llt_.info() != Eigen::Success)
      throw std::invalid_argument("qp: reduced Hessian not positive definite");
    C_red_ = (A_ineq_.size() > 0) ? Matrix(-A_ineq_ * null_) : Matrix(0, r);
  }

  SolveStatus solve(const Vector& q, const Vector& b_eq, const Vector& b_ineq,
                    const SolverOptions& opt = {}) const {
    SolveStatus st;
    Vector x_part = Vector::Zero(n_);
    if (p_ > 0) {
      // Min-norm solution of A_eq x = b_eq from the QR of A_eq':
      // A_eq' P = Q R  =>  x = Q_1 R_1^{-T} (P' b).head(rank)
      const Vector t = qr_.colsPermutation().transpose() * b_eq;
      const Vector w =
          R1_.transpose().triangularView<Eigen::Lower>().solve(t.head(rank_));
      x_part = range_ * w;
      if ((A_eq_ * x_part - b_eq).cwiseAbs().maxCoeff() > 1e2 * opt.feasibility_tol) {
        st.tag = SolveTag::Infeasible;  // inconsistent equalities
        return st;
      }
    }
    const Vector a_red = null_.transpose() * (P_ * x_part + q);
    Vector d_red;
    if (A_ineq_.rows() > 0) d_red = -(b_ineq - A_ineq_ * x_part);
    else d_red = Vector::Zero(0);

    detail::GiResult gi =
        detail::goldfarb_idnani(llt_, a_red, C_red_, d_red, opt.max_iter);
    st.iterations = gi.iterations;
    st.tag = gi.tag;
    if (gi.tag != SolveTag::Optimal) return st;
    st.ineq_multipliers = gi.lambda;
    st.point = x_part + null_ * gi.y;
    st.value = 0.5 * st.point.dot(P_ * st.point) + q.dot(st.point);
    return st;
  }

  const Matrix& P() const { return P_; }

 private:
  Eigen::Index n_ = 0, p_ = 0, rank_ = 0;
  Matrix P_, A_eq_, A_ineq_;
  Eigen::ColPivHouseholderQR<Matrix> qr_;
  Matrix range_, null_, C_red_, R1_;
  Eigen::LLT<Matrix> llt_;
};

inline SolveStatus qp_solve(const QuadraticProgram& qp, const SolverOptions& opt = {}) {
  QpPrefactored pre(qp.P_obj, qp.A_eq, qp.A_ineq, opt.validate_psd);
  return pre.solve(qp.q_obj, qp.b_eq, qp.b_ineq, opt);
}

}  // namespace rtmpc
