// H-representation polytopes and the set calculus used throughout:
// support functions, Pontryagin difference, Minkowski-sum support,
// inclusion and membership tests, and template outer approximation.
// Every operation reduces to support LPs; no vertex representation is
// kept anywhere.

#pragma once

#include "rtmpc/optimization.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>

namespace rtmpc {

constexpr double kGeomTol = 1e-8;  // default membership/inclusion tolerance

class HPolytope {
 public:
  HPolytope() = default;

  HPolytope(Matrix H, Vector h) : H_(std::move(H)), h_(std::move(h)) {
    if (H_.rows() < 1) throw std::invalid_argument("HPolytope: needs >= 1 row");
    if (H_.rows() != h_.size())
      throw std::invalid_argument("HPolytope: H rows != h size");
    if (!H_.allFinite() || !h_.allFinite())
      throw std::invalid_argument("HPolytope: non-finite entries");
    for (Eigen::Index i = 0; i < H_.rows(); ++i) {
      if (H_.row(i).cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("HPolytope: all-zero row");
    }
  }

  const Matrix& H() const { return H_; }
  const Vector& h() const { return h_; }
  Eigen::Index rows() const { return H_.rows(); }
  Eigen::Index dim() const { return H_.cols(); }

  bool is_empty() const {
    if (!empty_cache_) {
      LinearProgram lp;
      lp.c = Vector::Zero(dim());
      lp.A_ineq = H_;
      lp.b_ineq = h_;
      lp.A_eq = Matrix(0, dim());
      lp.b_eq = Vector(0);
      empty_cache_ = !lp_solve(lp).optimal();
    }
    return *empty_cache_;
  }

  // Scaling by alpha >= 0 of a set containing the origin: {Hx <= alpha h}.
  HPolytope scaled(double alpha) const { return HPolytope(H_, alpha * h_); }

 private:
  Matrix H_;
  Vector h_;
  mutable std::optional<bool> empty_cache_;
};

// Axis-aligned box, losslessly convertible to 2n half-spaces.
struct Box {
  Vector center;
  Vector half_widths;

  Box() = default;
  Box(Vector c, Vector hw) : center(std::move(c)), half_widths(std::move(hw)) {
    if (center.size() != half_widths.size())
      throw std::invalid_argument("Box: dimension mismatch");
    if (half_widths.minCoeff() < 0.0)
      throw std::invalid_argument("Box: negative half width");
  }

  HPolytope to_hpolytope() const {
    const Eigen::Index n = center.size();
    Matrix H = Matrix::Zero(2 * n, n);
    Vector h(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      H(2 * i, i) = 1.0;
      h(2 * i) = center(i) + half_widths(i);
      H(2 * i + 1, i) = -1.0;
      h(2 * i + 1) = -center(i) + half_widths(i);
    }
    return HPolytope(H, h);
  }
};

// h_P(d) = max_{x in P} d'x
inline double support(const HPolytope& P, const Vector& d) {
  if (d.size() != P.dim()) throw std::invalid_argument("support: dim mismatch");
  LinearProgram lp;
  lp.c = d;
  lp.A_ineq = P.H();
  lp.b_ineq = P.h();
  lp.A_eq = Matrix(0, P.dim());
  lp.b_eq = Vector(0);
  SolveStatus st = lp_solve(lp);
  if (st.tag == SolveTag::Infeasible)
    throw std::runtime_error("support: polytope is empty");
  if (st.tag == SolveTag::Unbounded)
    throw std::runtime_error("support: polytope unbounded in direction");
  if (!st.optimal()) throw std::runtime_error("support: LP did not converge");
  return st.value;
}

inline bool contains_point(const HPolytope& P, const Vector& x,
                           double tol = kGeomTol) {
  if (x.size() != P.dim())
    throw std::invalid_argument("contains_point: dim mismatch");
  return ((P.H() * x - P.h()).array() <= tol).all();
}

// P (-) Q with rows of P kept: h'_i = h_i - support(Q, row_i). The result may
// be empty; callers decide (synthesis aborts on an empty tightened set).
inline HPolytope pontryagin_diff(const HPolytope& P, const HPolytope& Q) {
  if (P.dim() != Q.dim())
    throw std::invalid_argument("pontryagin_diff: dim mismatch");
  Vector h_new(P.rows());
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    h_new(i) = P.h()(i) - support(Q, P.H().row(i).transpose());
  return HPolytope(P.H(), h_new);
}

// P subseteq Q iff support(P, row_i of Q) <= h_i + tol for every row.
// An empty P is vacuously contained.
inline bool inclusion_check(const HPolytope& P, const HPolytope& Q,
                            double tol = kGeomTol) {
  if (P.dim() != Q.dim())
    throw std::invalid_argument("inclusion_check: dim mismatch");
  if (P.is_empty()) return true;
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    if (support(P, Q.H().row(i).transpose()) > Q.h()(i) + tol) return false;
  }
  return true;
}

// Same test with the left-hand set given only through its support function
// (e.g. a linear image or a Minkowski sum that has no H-representation here).
using SupportFn = std::function<double(const Vector&)>;

inline bool inclusion_check(const SupportFn& support_P, const HPolytope& Q,
                            double tol = kGeomTol) {
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    if (support_P(Q.H().row(i).transpose()) > Q.h()(i) + tol) return false;
  }
  return true;
}

inline double minkowski_support(const HPolytope& P, const HPolytope& Q,
                                const Vector& d) {
  return support(P, d) + support(Q, d);
}

// Membership x in {c} (+) Z  <=>  x - c in Z.
inline bool sum_contains(const HPolytope& Z, const Vector& c, const Vector& x,
                         double tol = kGeomTol) {
  return contains_point(Z, x - c, tol);
}

// Outer approximation {d'x <= s(d) : d in D} of the set inducing s.
// D must positively span R^n, otherwise the result is unbounded and rejected.
inline HPolytope template_outer(const SupportFn& support_fn,
                                const std::vector<Vector>& D) {
  if (D.empty()) throw std::invalid_argument("template_outer: empty template");
  const Eigen::Index n = D.front().size();
  Matrix H(static_cast<Eigen::Index>(D.size()), n);
  Vector h(static_cast<Eigen::Index>(D.size()));
  for (size_t i = 0; i < D.size(); ++i) {
    if (D[i].size() != n)
      throw std::invalid_argument("template_outer: inconsistent direction dim");
    H.row(static_cast<Eigen::Index>(i)) = D[i].transpose();
    h(static_cast<Eigen::Index>(i)) = support_fn(D[i]);
  }
  HPolytope result(H, h);
  // boundedness check: finite support in +/- every axis direction
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    for (double sgn : {1.0, -1.0}) {
      e(i) = sgn;
      LinearProgram lp{e, result.H(), result.h(), Matrix(0, n), Vector(0)};
      if (!lp_solve(lp).optimal())
        throw std::invalid_argument("template_outer: degenerate template (unbounded)");
    }
    e(i) = 0.0;
  }
  return result;
}

}  // namespace rtmpc
