#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <string>
#include <vector>

#include "ocsolve/iterate.hpp"
#include "ocsolve/ncp.hpp"
#include "ocsolve/ode.hpp"
#include "ocsolve/problem.hpp"

namespace ocsolve {

/// Reweighted LQR coefficients of the Newton-step subproblem
///
///   -lam+' = Q x~ + S u~ + A' lam+ + q,   0 = S' x~ + R u~ + B' lam+ + r,
///
/// sampled on the refined grid (iterate nodes at even indices, interval
/// midpoints at odd indices), which is where the RK4 stages look them up.
///
/// S is n x m. Alongside the weights we keep the NCP data (phi, alpha, beta),
/// the constraint Jacobians needed to recover the multiplier step, the
/// vector sum_i alpha_i grad_x c_i used by the stopping test, and the Cholesky
/// factor of R at every sample.
struct WeightSignals {
  int n = 0;
  int m = 0;
  int p = 0;
  GridSignal Q, R, S, q, r;
  GridSignal phi, alpha, beta;
  GridSignal cx, cu;
  GridSignal alpha_grad_x;
  std::vector<Eigen::LLT<Mat>> r_factor;

  [[nodiscard]] const TimeGrid& grid() const { return Q.grid(); }

  [[nodiscard]] Eigen::Map<const Mat> Q_at(int k) const { return Q.matrix(k, n, n); }
  [[nodiscard]] Eigen::Map<const Mat> R_at(int k) const { return R.matrix(k, m, m); }
  [[nodiscard]] Eigen::Map<const Mat> S_at(int k) const { return S.matrix(k, n, m); }
  [[nodiscard]] Eigen::Map<const Mat> cx_at(int k) const { return cx.matrix(k, p, n); }
  [[nodiscard]] Eigen::Map<const Mat> cu_at(int k) const { return cu.matrix(k, p, m); }
};

/// Backward-pass solution: P(t) (flattened n x n, symmetric) and p(t).
struct RiccatiSolution {
  GridSignal P;
  GridSignal p;
};

enum class ConstraintTerms { Include, Drop };

namespace detail {

// Cubic midpoint clamped to the range of its stencil. Used for the L-infinity
// signals (u, mu), which may jump between nodes.
inline Vec limited_half(const GridSignal& s, int k) {
  if (k % 2 == 0) return s[k / 2];
  const int i = k / 2;
  Vec v = s.midpoint(i);
  const int last = s.grid().intervals();
  const int lo = std::max(0, std::min(i - 1, last - 3));
  const int hi = std::min(last, lo + 3);
  for (int d = 0; d < s.dim(); ++d) {
    double vmin = s[lo](d);
    double vmax = vmin;
    for (int j = lo + 1; j <= hi; ++j) {
      vmin = std::min(vmin, s[j](d));
      vmax = std::max(vmax, s[j](d));
    }
    v(d) = std::clamp(v(d), vmin, vmax);
  }
  return v;
}

inline Vec flatten(const Mat& M) { return Eigen::Map<const Vec>(M.data(), M.size()); }

inline void check_terminal_hessian(const Mat& H) {
  const int n = static_cast<int>(H.rows());
  const double scale = 1.0 + H.norm();
  require(H.rows() == H.cols() && H.allFinite(), ErrorCode::NonConvexTerminal,
          "terminal Hessian must be a finite square matrix");
  require((H - H.transpose()).norm() <= 1e-10 * scale, ErrorCode::NonConvexTerminal,
          "terminal Hessian is not symmetric");
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -1e-10 * scale, ErrorCode::NonConvexTerminal,
            "terminal Hessian is not positive semidefinite");
  }
}

}  // namespace detail

/// Evaluates the reweighted coefficients at iterate z. With
/// ConstraintTerms::Drop every constraint contribution is omitted (mu, alpha,
/// beta treated as zero), which is the unconstrained problem.
/// Throws IndefiniteR when R fails its Cholesky factorization at any sample.
inline WeightSignals assemble_weights(const OcpProblem& prob, const Iterate& z, NcpKind kind,
                                      double delta,
                                      ConstraintTerms terms = ConstraintTerms::Include) {
  check_iterate(prob, z);
  require(delta > 0.0, ErrorCode::InvalidArgument, "assemble_weights: delta must be > 0");
  const int n = prob.state_dim();
  const int m = prob.input_dim();
  const int p = terms == ConstraintTerms::Include ? prob.constraint_count() : 0;
  const TimeGrid fine = z.grid().refined();
  const int samples = fine.nodes();

  WeightSignals w;
  w.n = n;
  w.m = m;
  w.p = p;
  w.Q = GridSignal(fine, n * n);
  w.R = GridSignal(fine, m * m);
  w.S = GridSignal(fine, n * m);
  w.q = GridSignal(fine, n);
  w.r = GridSignal(fine, m);
  w.phi = GridSignal(fine, p);
  w.alpha = GridSignal(fine, p);
  w.beta = GridSignal(fine, p);
  w.cx = GridSignal(fine, p * n);
  w.cu = GridSignal(fine, p * m);
  w.alpha_grad_x = GridSignal(fine, n);
  w.r_factor.resize(static_cast<std::size_t>(samples));

  const auto& l = prob.incremental;
  const auto& cons = prob.constraints;

  // Constraint contributions are formed at the iterate nodes only. A midpoint
  // takes the average of its two neighbours, so that the weights vanish
  // wherever the node values of phi do and a converged iterate is a fixed
  // point of the step.
  struct NodeTerms {
    Mat Q, R, S;
    Vec q, r, agx, phi, alpha, beta, cx, cu;
  };
  std::vector<NodeTerms> node_terms;
  if (p > 0) {
    const TimeGrid& grid = z.grid();
    node_terms.resize(static_cast<std::size_t>(grid.nodes()));
    for (int j = 0; j < grid.nodes(); ++j) {
      const Vec x = z.x[j];
      const Vec u = z.u[j];
      const Vec mu = z.mu[j];
      const Vec c = cons.value(x, u);
      const Mat Jx = cons.jacobian_x(x, u);
      const Mat Ju = cons.jacobian_u(x, u);
      NodeTerms& t = node_terms[static_cast<std::size_t>(j)];
      t.Q = Mat::Zero(n, n);
      t.R = Mat::Zero(m, m);
      t.S = Mat::Zero(n, m);
      t.q = Vec::Zero(n);
      t.r = Vec::Zero(m);
      t.agx = Vec::Zero(n);
      t.phi.resize(p);
      t.alpha.resize(p);
      t.beta.resize(p);
      for (int i = 0; i < p; ++i) {
        const double ph = phi(kind, mu(i), c(i));
        const AlphaBeta ab = alpha_beta(ph, jacobian_element(kind, mu(i), c(i)), delta);
        t.phi(i) = ph;
        t.alpha(i) = ab.alpha;
        t.beta(i) = ab.beta;

        const Vec gx = Jx.row(i).transpose();
        const Vec gu = Ju.row(i).transpose();
        if (mu(i) != 0.0) {
          t.Q += mu(i) * cons.hessian_xx(x, u, i);
          t.R += mu(i) * cons.hessian_uu(x, u, i);
          t.S += mu(i) * cons.hessian_xu(x, u, i);
        }
        if (ab.beta != 0.0) {
          t.Q += ab.beta * gx * gx.transpose();
          t.R += ab.beta * gu * gu.transpose();
          t.S += ab.beta * gx * gu.transpose();
        }
        t.q += (mu(i) + ab.alpha) * gx;
        t.r += (mu(i) + ab.alpha) * gu;
        t.agx += ab.alpha * gx;
      }
      t.cx = detail::flatten(Jx);
      t.cu = detail::flatten(Ju);
    }
  }

  for (int k = 0; k < samples; ++k) {
    const Vec x = z.x.half(k);
    const Vec u = detail::limited_half(z.u, k);

    Mat Q = l.hessian_xx(x, u);
    Mat R = l.hessian_uu(x, u);
    Mat S = l.hessian_xu(x, u);
    Vec q = l.gradient_x(x, u);
    Vec r = l.gradient_u(x, u);
    Vec agx = Vec::Zero(n);

    if (p > 0) {
      const NodeTerms& a = node_terms[static_cast<std::size_t>(k / 2)];
      const NodeTerms& b = node_terms[static_cast<std::size_t>((k + 1) / 2)];
      Q += 0.5 * (a.Q + b.Q);
      R += 0.5 * (a.R + b.R);
      S += 0.5 * (a.S + b.S);
      q += 0.5 * (a.q + b.q);
      r += 0.5 * (a.r + b.r);
      agx = 0.5 * (a.agx + b.agx);
      w.phi[k] = 0.5 * (a.phi + b.phi);
      w.alpha[k] = 0.5 * (a.alpha + b.alpha);
      w.beta[k] = 0.5 * (a.beta + b.beta);
      w.cx[k] = 0.5 * (a.cx + b.cx);
      w.cu[k] = 0.5 * (a.cu + b.cu);
    }

    Q = 0.5 * (Q + Q.transpose());
    R = 0.5 * (R + R.transpose());
    auto& llt = w.r_factor[static_cast<std::size_t>(k)];
    llt.compute(R);
    if (llt.info() != Eigen::Success || !R.allFinite()) {
      throw Error(ErrorCode::IndefiniteR,
                  "R(t) is not positive definite at t=" + std::to_string(fine.time(k)));
    }
    w.Q[k] = detail::flatten(Q);
    w.R[k] = detail::flatten(R);
    w.S[k] = detail::flatten(S);
    w.q[k] = q;
    w.r[k] = r;
    w.alpha_grad_x[k] = agx;
  }
  return w;
}

/// Integrates the stacked Riccati system
///   -P' = Q + A'P + PA - (PB + S) R^-1 (B'P + S'),
///   -p' = q + A'p - (PB + S) R^-1 (B'p + r),
/// backward from P(T) = hess J(xT), p(T) = grad J(xT). P is re-symmetrized
/// after every step.
inline RiccatiSolution solve_riccati(const OcpProblem& prob, const WeightSignals& w, const Vec& xT) {
  const int n = prob.state_dim();
  const Mat& A = prob.A;
  const Mat& B = prob.B;
  const TimeGrid fine = w.grid();
  const TimeGrid grid(fine.t_start(), fine.t_end(), fine.intervals() / 2);

  const Mat PT = prob.terminal.hessian(xT);
  const Vec pT = prob.terminal.gradient(xT);
  require(PT.rows() == n && pT.size() == n, ErrorCode::DimensionMismatch,
          "terminal cost derivatives have the wrong shape");
  detail::check_terminal_hessian(PT);

  Vec y(n * n + n);
  y.head(n * n) = detail::flatten(0.5 * (PT + PT.transpose()));
  y.tail(n) = pT;

  auto rhs = [&](double t, const Vec& yv) -> Vec {
    const int k = grid.half_index(t);
    Eigen::Map<const Mat> P(yv.data(), n, n);
    const auto pv = yv.tail(n);
    const auto& llt = w.r_factor[static_cast<std::size_t>(k)];
    const Mat M = P * B + w.S_at(k);  // n x m
    const Mat K = llt.solve(M.transpose());  // m x n
    const Vec kff = llt.solve(B.transpose() * pv + w.r[k]);
    Vec out(n * n + n);
    Eigen::Map<Mat> dP(out.data(), n, n);
    dP = -(w.Q_at(k) + A.transpose() * P + P * A - M * K);
    out.tail(n) = -(w.q[k] + A.transpose() * pv - M * kff);
    return out;
  };
  auto symmetrize = [n](Vec& yv) {
    Eigen::Map<Mat> P(yv.data(), n, n);
    const Mat sym = 0.5 * (P + P.transpose());
    P = sym;
  };

  GridSignal stacked = integrate(rhs, y, grid, Direction::Backward, symmetrize);
  RiccatiSolution sol{GridSignal(grid, n * n), GridSignal(grid, n)};
  sol.P.values() = stacked.values().topRows(n * n);
  sol.p.values() = stacked.values().bottomRows(n);
  return sol;
}

/// Forward closed-loop sweep
///   x~' = (A - B R^-1 (B'P + S')) x~ - B R^-1 (B'p + r),  x~(0) = x0 - x_at_0,
/// followed by nodewise recovery of lam+ = P x~ + p, the control step
/// u~ = -R^-1 (r + B' lam+ + S' x~) and the multiplier step
/// mu~_i = alpha_i + beta_i (grad_x c_i' x~ + grad_u c_i' u~).
inline NewtonStep forward_sweep(const OcpProblem& prob, const WeightSignals& w,
                                const RiccatiSolution& ric, const Vec& x_at_0) {
  const int n = prob.state_dim();
  const int m = prob.input_dim();
  const int p = w.p;
  const Mat& A = prob.A;
  const Mat& B = prob.B;
  const TimeGrid& grid = ric.P.grid();

  auto riccati_at = [&](int k, Mat& P, Vec& pv) {
    if (k % 2 == 0) {
      P = ric.P.matrix(k / 2, n, n);
      pv = ric.p[k / 2];
    } else {
      const Vec Pm = ric.P.midpoint(k / 2);
      P = Eigen::Map<const Mat>(Pm.data(), n, n);
      P = 0.5 * (P + P.transpose()).eval();
      pv = ric.p.midpoint(k / 2);
    }
  };

  auto control = [&](int k, const Mat& P, const Vec& pv, const Vec& dx) -> Vec {
    const auto& llt = w.r_factor[static_cast<std::size_t>(k)];
    return -llt.solve(w.r[k] + B.transpose() * (P * dx + pv) + w.S_at(k).transpose() * dx);
  };

  Mat P(n, n);
  Vec pv(n);
  auto rhs = [&](double t, const Vec& dx) -> Vec {
    const int k = grid.half_index(t);
    riccati_at(k, P, pv);
    return A * dx + B * control(k, P, pv, dx);
  };

  const Vec dx0 = prob.x0 - x_at_0;
  NewtonStep s;
  s.dx = integrate(rhs, dx0, grid, Direction::Forward);
  s.du = GridSignal(grid, m);
  s.lam_plus = GridSignal(grid, n);
  s.dmu = GridSignal(grid, prob.constraint_count());
  s.dxdot = GridSignal(grid, n);
  for (int i = 0; i < grid.nodes(); ++i) {
    const int k = 2 * i;
    const Vec dx = s.dx[i];
    const Eigen::Map<const Mat> Pn = ric.P.matrix(i, n, n);
    const Vec lam_plus = Pn * dx + ric.p[i];
    const Vec du = -w.r_factor[static_cast<std::size_t>(k)].solve(
        w.r[k] + B.transpose() * lam_plus + w.S_at(k).transpose() * dx);
    s.lam_plus[i] = lam_plus;
    s.du[i] = du;
    s.dxdot[i] = A * dx + B * du;
    if (p > 0) {
      const Vec dc = w.cx_at(k) * dx + w.cu_at(k) * du;
      s.dmu[i] = w.alpha[k] + w.beta[k].cwiseProduct(dc);
    }
  }
  require(s.du.all_finite() && s.lam_plus.all_finite() && s.dmu.all_finite(),
          ErrorCode::NonFiniteState, "forward_sweep produced non-finite values");
  return s;
}

struct NewtonUpdate {
  NewtonStep step;
  WeightSignals weights;
  RiccatiSolution riccati;
};

/// One semi-smooth Newton direction at z: weights, backward Riccati pass,
/// forward sweep. z must be dynamically feasible; the dynamics residual is
/// checked against 100 * dynamics_tol.
inline NewtonUpdate newton_update(const OcpProblem& prob, const Iterate& z, NcpKind kind,
                                  double delta, double dynamics_tol,
                                  ConstraintTerms terms = ConstraintTerms::Include) {
  check_iterate(prob, z);
  const double defect = dynamics_residual(prob, z);
  if (!(defect <= 100.0 * dynamics_tol)) {
    throw Error(ErrorCode::InfeasibleIterate,
                "dynamics residual " + std::to_string(defect) + " exceeds 100 x dynamics_tol");
  }
  NewtonUpdate out;
  out.weights = assemble_weights(prob, z, kind, delta, terms);
  const int last = z.grid().intervals();
  out.riccati = solve_riccati(prob, out.weights, z.x[last]);
  out.step = forward_sweep(prob, out.weights, out.riccati, z.x[0]);
  if (terms == ConstraintTerms::Drop && prob.constraint_count() > 0) {
    out.step.dmu = GridSignal(z.grid(), prob.constraint_count());
  }
  return out;
}

}  // namespace ocsolve
