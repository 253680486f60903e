#pragma once

#include <functional>
#include <string>
#include <utility>

#include "ocsolve/grid.hpp"

namespace ocsolve {

/// J(x(T)) with its first and second derivatives. J is assumed convex; the
/// Hessian is checked for positive semidefiniteness where it is evaluated.
struct TerminalCost {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
};

/// l(x, u) with derivatives. `hessian_xu` is the n x m block d^2 l / dx du.
struct IncrementalCost {
  std::function<double(const Vec&, const Vec&)> value;
  std::function<Vec(const Vec&, const Vec&)> gradient_x;
  std::function<Vec(const Vec&, const Vec&)> gradient_u;
  std::function<Mat(const Vec&, const Vec&)> hessian_xx;
  std::function<Mat(const Vec&, const Vec&)> hessian_uu;
  std::function<Mat(const Vec&, const Vec&)> hessian_xu;
};

/// Path constraints c(x, u) <= 0 with p components.
///
/// `jacobian_x` returns the p x n matrix whose rows are the gradients of the
/// components, `jacobian_u` the p x m analogue. Per-component Hessians take
/// the component index as third argument; `hessian_xu` is n x m.
struct ConstraintSet {
  int count = 0;
  std::function<Vec(const Vec&, const Vec&)> value;
  std::function<Mat(const Vec&, const Vec&)> jacobian_x;
  std::function<Mat(const Vec&, const Vec&)> jacobian_u;
  std::function<Mat(const Vec&, const Vec&, int)> hessian_xx;
  std::function<Mat(const Vec&, const Vec&, int)> hessian_uu;
  std::function<Mat(const Vec&, const Vec&, int)> hessian_xu;
};

/// Finite-horizon problem
///   min J(x(T)) + int_0^T l(x, u) dt  s.t.  x' = A x + B u,  x(0) = x0,  c(x, u) <= 0.
///
/// Callbacks must be reentrant. Linear independence and controllability
/// qualifications on the constraints cannot be checked from this data and are
/// the caller's responsibility.
struct OcpProblem {
  std::string name;
  Mat A;
  Mat B;
  Vec x0;
  double horizon = 1.0;
  TerminalCost terminal;
  IncrementalCost incremental;
  ConstraintSet constraints;

  [[nodiscard]] int state_dim() const { return static_cast<int>(A.rows()); }
  [[nodiscard]] int input_dim() const { return static_cast<int>(B.cols()); }
  [[nodiscard]] int constraint_count() const { return constraints.count; }

  void validate() const {
    const auto n = A.rows();
    require(n > 0 && A.cols() == n, ErrorCode::DimensionMismatch, "A must be square and non-empty");
    require(B.rows() == n && B.cols() > 0, ErrorCode::DimensionMismatch, "B must be n x m with m > 0");
    require(x0.size() == n, ErrorCode::DimensionMismatch, "x0 must have length n");
    require(A.allFinite() && B.allFinite() && x0.allFinite(), ErrorCode::InvalidArgument,
            "A, B, x0 must be finite");
    require(std::isfinite(horizon) && horizon > 0.0, ErrorCode::InvalidArgument, "horizon must be > 0");
    require(terminal.value && terminal.gradient && terminal.hessian, ErrorCode::InvalidArgument,
            "terminal cost callbacks missing");
    require(incremental.value && incremental.gradient_x && incremental.gradient_u &&
                incremental.hessian_xx && incremental.hessian_uu && incremental.hessian_xu,
            ErrorCode::InvalidArgument, "incremental cost callbacks missing");
    require(constraints.count >= 0, ErrorCode::InvalidArgument, "constraint count must be >= 0");
    if (constraints.count > 0) {
      require(constraints.value && constraints.jacobian_x && constraints.jacobian_u &&
                  constraints.hessian_xx && constraints.hessian_uu && constraints.hessian_xu,
              ErrorCode::InvalidArgument, "constraint callbacks missing");
    }
  }
};

// ---------------------------------------------------------------------------
// Builders for the linear-quadratic case.

/// J(x) = 1/2 x'Px + p'x.
inline TerminalCost quadratic_terminal_cost(Mat P, Vec p) {
  require(P.rows() == P.cols() && p.size() == P.rows(), ErrorCode::DimensionMismatch,
          "quadratic_terminal_cost: P must be n x n and p of length n");
  TerminalCost J;
  J.value = [P, p](const Vec& x) { return 0.5 * x.dot(P * x) + p.dot(x); };
  J.gradient = [P, p](const Vec& x) -> Vec { return P * x + p; };
  J.hessian = [P](const Vec&) -> Mat { return P; };
  return J;
}

inline TerminalCost quadratic_terminal_cost(const Mat& P) {
  return quadratic_terminal_cost(P, Vec::Zero(P.rows()));
}

/// l(x,u) = 1/2 x'Qx + x'Su + 1/2 u'Ru + q'x + r'u, with S of shape n x m.
inline IncrementalCost quadratic_incremental_cost(Mat Q, Mat R, Mat S, Vec q, Vec r) {
  const auto n = Q.rows();
  const auto m = R.rows();
  require(Q.cols() == n && R.cols() == m && S.rows() == n && S.cols() == m && q.size() == n &&
              r.size() == m,
          ErrorCode::DimensionMismatch, "quadratic_incremental_cost: inconsistent shapes");
  IncrementalCost l;
  l.value = [=](const Vec& x, const Vec& u) {
    return 0.5 * x.dot(Q * x) + x.dot(S * u) + 0.5 * u.dot(R * u) + q.dot(x) + r.dot(u);
  };
  l.gradient_x = [=](const Vec& x, const Vec& u) -> Vec { return Q * x + S * u + q; };
  l.gradient_u = [=](const Vec& x, const Vec& u) -> Vec { return S.transpose() * x + R * u + r; };
  l.hessian_xx = [Q](const Vec&, const Vec&) -> Mat { return Q; };
  l.hessian_uu = [R](const Vec&, const Vec&) -> Mat { return R; };
  l.hessian_xu = [S](const Vec&, const Vec&) -> Mat { return S; };
  return l;
}

inline IncrementalCost quadratic_incremental_cost(const Mat& Q, const Mat& R) {
  return quadratic_incremental_cost(Q, R, Mat::Zero(Q.rows(), R.rows()), Vec::Zero(Q.rows()),
                                    Vec::Zero(R.rows()));
}

inline ConstraintSet no_constraints(int n, int m) {
  ConstraintSet c;
  c.count = 0;
  c.value = [](const Vec&, const Vec&) -> Vec { return Vec(0); };
  c.jacobian_x = [n](const Vec&, const Vec&) -> Mat { return Mat(0, n); };
  c.jacobian_u = [m](const Vec&, const Vec&) -> Mat { return Mat(0, m); };
  c.hessian_xx = [n](const Vec&, const Vec&, int) -> Mat { return Mat::Zero(n, n); };
  c.hessian_uu = [m](const Vec&, const Vec&, int) -> Mat { return Mat::Zero(m, m); };
  c.hessian_xu = [n, m](const Vec&, const Vec&, int) -> Mat { return Mat::Zero(n, m); };
  return c;
}

/// C x + D u + e <= 0.
inline ConstraintSet affine_constraints(Mat C, Mat D, Vec e) {
  const auto p = C.rows();
  require(D.rows() == p && e.size() == p, ErrorCode::DimensionMismatch,
          "affine_constraints: C, D, e must have the same row count");
  const auto n = static_cast<int>(C.cols());
  const auto m = static_cast<int>(D.cols());
  ConstraintSet c;
  c.count = static_cast<int>(p);
  c.value = [=](const Vec& x, const Vec& u) -> Vec { return C * x + D * u + e; };
  c.jacobian_x = [C](const Vec&, const Vec&) -> Mat { return C; };
  c.jacobian_u = [D](const Vec&, const Vec&) -> Mat { return D; };
  c.hessian_xx = [n](const Vec&, const Vec&, int) -> Mat { return Mat::Zero(n, n); };
  c.hessian_uu = [m](const Vec&, const Vec&, int) -> Mat { return Mat::Zero(m, m); };
  c.hessian_xu = [n, m](const Vec&, const Vec&, int) -> Mat { return Mat::Zero(n, m); };
  return c;
}

/// Stacks two constraint sets; components of `b` follow those of `a`.
inline ConstraintSet concat_constraints(ConstraintSet a, ConstraintSet b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  const int pa = a.count;
  ConstraintSet c;
  c.count = a.count + b.count;
  c.value = [a, b](const Vec& x, const Vec& u) -> Vec {
    Vec out(a.count + b.count);
    out << a.value(x, u), b.value(x, u);
    return out;
  };
  c.jacobian_x = [a, b](const Vec& x, const Vec& u) -> Mat {
    Mat ja = a.jacobian_x(x, u);
    Mat out(a.count + b.count, ja.cols());
    out << ja, b.jacobian_x(x, u);
    return out;
  };
  c.jacobian_u = [a, b](const Vec& x, const Vec& u) -> Mat {
    Mat ja = a.jacobian_u(x, u);
    Mat out(a.count + b.count, ja.cols());
    out << ja, b.jacobian_u(x, u);
    return out;
  };
  c.hessian_xx = [a, b, pa](const Vec& x, const Vec& u, int i) -> Mat {
    return i < pa ? a.hessian_xx(x, u, i) : b.hessian_xx(x, u, i - pa);
  };
  c.hessian_uu = [a, b, pa](const Vec& x, const Vec& u, int i) -> Mat {
    return i < pa ? a.hessian_uu(x, u, i) : b.hessian_uu(x, u, i - pa);
  };
  c.hessian_xu = [a, b, pa](const Vec& x, const Vec& u, int i) -> Mat {
    return i < pa ? a.hessian_xu(x, u, i) : b.hessian_xu(x, u, i - pa);
  };
  return c;
}

/// Description of an LQ problem with affine constraints; this is what the
/// problem-file format carries. Callback problems are built in code.
struct LqProblemData {
  std::string name = "lq";
  Mat A, B;
  Vec x0;
  double horizon = 1.0;
  int grid_intervals = 0;  // 0: use the solver configuration
  Mat Q, R, S;
  Vec q, r;
  Mat P_terminal;
  Vec p_terminal;
  Mat C, D;
  Vec e;
};

inline OcpProblem make_lq_problem(const LqProblemData& d) {
  const auto n = static_cast<int>(d.A.rows());
  const auto m = static_cast<int>(d.B.cols());
  auto or_zero_mat = [](const Mat& M, int rows, int cols) -> Mat {
    return M.size() == 0 ? Mat::Zero(rows, cols) : M;
  };
  auto or_zero_vec = [](const Vec& v, int len) -> Vec { return v.size() == 0 ? Vec::Zero(len) : v; };

  OcpProblem prob;
  prob.name = d.name;
  prob.A = d.A;
  prob.B = d.B;
  prob.x0 = d.x0;
  prob.horizon = d.horizon;
  prob.incremental = quadratic_incremental_cost(or_zero_mat(d.Q, n, n), or_zero_mat(d.R, m, m),
                                                or_zero_mat(d.S, n, m), or_zero_vec(d.q, n),
                                                or_zero_vec(d.r, m));
  prob.terminal = quadratic_terminal_cost(or_zero_mat(d.P_terminal, n, n), or_zero_vec(d.p_terminal, n));
  if (d.C.rows() > 0) {
    prob.constraints = affine_constraints(d.C, or_zero_mat(d.D, static_cast<int>(d.C.rows()), m),
                                          or_zero_vec(d.e, static_cast<int>(d.C.rows())));
  } else {
    prob.constraints = no_constraints(n, m);
  }
  prob.validate();
  return prob;
}

}  // namespace ocsolve
