#pragma once

#include <algorithm>

#include "ocsolve/grid.hpp"
#include "ocsolve/problem.hpp"

namespace ocsolve {

/// Primal-dual trajectory z = (x, u, lambda, mu) on one shared grid.
///
/// `xdot` is the state derivative at the nodes as produced by the forward
/// sweep that generated x; it is what the dynamics residual is measured
/// against. The multiplier signal `mu` exists (with zero rows) even when the
/// problem has no constraints.
struct Iterate {
  GridSignal x;
  GridSignal u;
  GridSignal lam;
  GridSignal mu;
  GridSignal xdot;

  [[nodiscard]] const TimeGrid& grid() const { return x.grid(); }
};

/// Newton direction. `lam_plus` is the new costate itself, not an increment.
struct NewtonStep {
  GridSignal dx;
  GridSignal du;
  GridSignal lam_plus;
  GridSignal dmu;
  GridSignal dxdot;
};

inline Iterate zero_iterate(const TimeGrid& grid, int n, int m, int p) {
  return {GridSignal(grid, n), GridSignal(grid, m), GridSignal(grid, n), GridSignal(grid, p),
          GridSignal(grid, n)};
}

/// Second-order finite-difference derivative of a grid signal: central at
/// interior nodes, one-sided at the ends. Requires at least 3 nodes.
inline GridSignal finite_difference(const GridSignal& f) {
  const int n = f.grid().intervals();
  require(n >= 2, ErrorCode::InvalidArgument, "finite_difference needs at least 3 nodes");
  const double h = f.grid().step();
  GridSignal d(f.grid(), f.dim());
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (int i = 1; i < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[n] = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * h);
  return d;
}

/// Builds an iterate from externally supplied signals, estimating xdot by
/// finite differences.
inline Iterate make_iterate(GridSignal x, GridSignal u, GridSignal lam, GridSignal mu) {
  GridSignal xdot = finite_difference(x);
  return {std::move(x), std::move(u), std::move(lam), std::move(mu), std::move(xdot)};
}

inline void check_iterate(const OcpProblem& prob, const Iterate& z) {
  const auto& g = z.x.grid();
  require(z.x.dim() == prob.state_dim() && z.u.dim() == prob.input_dim() &&
              z.lam.dim() == prob.state_dim() && z.mu.dim() == prob.constraint_count() &&
              z.xdot.dim() == prob.state_dim(),
          ErrorCode::DimensionMismatch, "iterate dimensions do not match the problem");
  require(z.u.grid() == g && z.lam.grid() == g && z.mu.grid() == g && z.xdot.grid() == g,
          ErrorCode::DimensionMismatch, "iterate signals must share one grid");
}

/// z+ = z + gamma * step, nodewise. The costate moves toward lam_plus:
/// lam+ = lam + gamma (lam_plus - lam).
inline Iterate apply_step(const Iterate& z, const NewtonStep& s, double gamma) {
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::InvalidArgument, "apply_step: gamma must be in (0, 1]");
  require_same_grid(z.x, s.dx, "apply_step: dx does not match x");
  require_same_grid(z.u, s.du, "apply_step: du does not match u");
  require_same_grid(z.lam, s.lam_plus, "apply_step: lam_plus does not match lam");
  require_same_grid(z.mu, s.dmu, "apply_step: dmu does not match mu");
  require_same_grid(z.xdot, s.dxdot, "apply_step: dxdot does not match xdot");
  Iterate out = z;
  out.x.values() += gamma * s.dx.values();
  out.u.values() += gamma * s.du.values();
  out.mu.values() += gamma * s.dmu.values();
  out.xdot.values() += gamma * s.dxdot.values();
  if (gamma == 1.0) {
    out.lam = s.lam_plus;
  } else {
    out.lam.values() += gamma * (s.lam_plus.values() - z.lam.values());
  }
  return out;
}

/// max over nodes of ||xdot - A x - B u||.
inline double dynamics_residual(const OcpProblem& prob, const Iterate& z) {
  const Mat defect = z.xdot.values() - prob.A * z.x.values() - prob.B * z.u.values();
  return defect.cols() == 0 ? 0.0 : defect.colwise().norm().maxCoeff();
}

/// Default feasibility tolerance: ten times an RK4 truncation estimate,
/// 10 h^4 ||A|| max||x||, floored at a round-off level for the node sums.
inline double default_dynamics_tol(const OcpProblem& prob, const Iterate& z) {
  const double h = z.grid().step();
  const double a = prob.A.norm();
  const double xmax = z.x.max_norm();
  const double umax = z.u.max_norm();
  const double truncation = 10.0 * h * h * h * h * a * xmax;
  const double roundoff = 1e-10 * (1.0 + a * xmax + prob.B.norm() * umax);
  return std::max(truncation, roundoff);
}

}  // namespace ocsolve
