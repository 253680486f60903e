#pragma once

#include <cmath>
#include <optional>

#include "ocsolve/iterate.hpp"
#include "ocsolve/ncp.hpp"
#include "ocsolve/ode.hpp"
#include "ocsolve/riccati_step.hpp"

namespace ocsolve {

/// Squared L2 norms of the tracked residual blocks. The initial-state,
/// terminal-costate and dynamics blocks vanish by construction for
/// solver-produced iterates and are not stored.
///
/// r4 is the costate equation, r5 stationarity in u, r6 complementarity.
/// `r4_direct_sq`, when present, is r4 evaluated straight from its definition
/// with a finite-difference costate derivative, kept for comparison.
struct ResidualNorms {
  double r4_sq = 0.0;
  double r5_sq = 0.0;
  double r6_sq = 0.0;
  double total = 0.0;
  std::optional<double> r4_direct_sq;

  static ResidualNorms from_parts(double r4_sq, double r5_sq, double r6_sq) {
    ResidualNorms out;
    out.r4_sq = r4_sq;
    out.r5_sq = r5_sq;
    out.r6_sq = r6_sq;
    out.total = std::sqrt(r4_sq + r5_sq + r6_sq);
    return out;
  }
};

/// grad_x H = grad_x l + A' lam + sum_i mu_i grad_x c_i.
inline Vec hamiltonian_grad_x(const OcpProblem& prob, const Vec& x, const Vec& u, const Vec& lam,
                              const Vec& mu) {
  Vec g = prob.incremental.gradient_x(x, u) + prob.A.transpose() * lam;
  if (prob.constraint_count() > 0) g += prob.constraints.jacobian_x(x, u).transpose() * mu;
  return g;
}

/// grad_u H = grad_u l + B' lam + sum_i mu_i grad_u c_i.
inline Vec hamiltonian_grad_u(const OcpProblem& prob, const Vec& x, const Vec& u, const Vec& lam,
                              const Vec& mu) {
  Vec g = prob.incremental.gradient_u(x, u) + prob.B.transpose() * lam;
  if (prob.constraint_count() > 0) g += prob.constraints.jacobian_u(x, u).transpose() * mu;
  return g;
}

namespace detail {

struct NodeResiduals {
  GridSignal r5;
  GridSignal r6;
};

inline NodeResiduals stationarity_and_complementarity(const OcpProblem& prob, const Iterate& z,
                                                       NcpKind kind) {
  const auto& g = z.grid();
  const int p = prob.constraint_count();
  NodeResiduals out{GridSignal(g, prob.input_dim()), GridSignal(g, p)};
  for (int i = 0; i < g.nodes(); ++i) {
    const Vec x = z.x[i];
    const Vec u = z.u[i];
    const Vec mu = z.mu[i];
    out.r5[i] = hamiltonian_grad_u(prob, x, u, z.lam[i], mu);
    if (p > 0) {
      const Vec c = prob.constraints.value(x, u);
      for (int j = 0; j < p; ++j) out.r6[i](j) = phi(kind, mu(j), c(j));
    }
  }
  return out;
}

inline double direct_r4_sq(const OcpProblem& prob, const Iterate& z) {
  const auto& g = z.grid();
  const GridSignal lam_dot = finite_difference(z.lam);
  GridSignal r4(g, prob.state_dim());
  for (int i = 0; i < g.nodes(); ++i) {
    r4[i] = hamiltonian_grad_x(prob, z.x[i], z.u[i], z.lam[i], z.mu[i]) + lam_dot[i];
  }
  return quadrature_l2sq(r4);
}

}  // namespace detail

/// Residual straight from the first-order system: r4 = grad_x H + lam' with a
/// finite-difference lam', r5 = grad_u H, r6 = phi(mu, -c). Needs >= 3 nodes.
inline ResidualNorms residual_direct(const OcpProblem& prob, const Iterate& z, NcpKind kind) {
  check_iterate(prob, z);
  require(z.grid().intervals() >= 2, ErrorCode::InvalidArgument, "residual_direct needs >= 3 nodes");
  const auto nodal = detail::stationarity_and_complementarity(prob, z, kind);
  const double r4 = detail::direct_r4_sq(prob, z);
  ResidualNorms out = ResidualNorms::from_parts(r4, quadrature_l2sq(nodal.r5), quadrature_l2sq(nodal.r6));
  out.r4_direct_sq = r4;
  return out;
}

/// Stopping-test residual at the post-step iterate z.
///
/// With a cached step and the weights of the iterate that generated it,
///   ||r4||^2 = int || Q x~ + S u~ + sum_i alpha_i grad_x c_i ||^2 dt,
/// otherwise (first iteration) r4 falls back to the direct evaluation. r5 and
/// r6 are always evaluated at z. The direct r4 is reported alongside.
inline ResidualNorms residual_norms(const OcpProblem& prob, const Iterate& z, NcpKind kind,
                                    const NewtonStep* step, const WeightSignals* weights) {
  check_iterate(prob, z);
  if (step == nullptr && weights == nullptr) {
    require(z.grid().intervals() >= 2, ErrorCode::MissingStepCache,
            "no cached step and the grid is too coarse for the direct evaluator");
    return residual_direct(prob, z, kind);
  }
  require(step != nullptr && weights != nullptr, ErrorCode::MissingStepCache,
          "residual_norms needs both the cached step and its weights");
  require(step->dx.grid() == z.grid() && weights->grid() == z.grid().refined(),
          ErrorCode::DimensionMismatch, "cached step is not on the iterate grid");

  const auto& g = z.grid();
  const int n = prob.state_dim();
  GridSignal r4(g, n);
  for (int i = 0; i < g.nodes(); ++i) {
    const int k = 2 * i;
    r4[i] = weights->Q_at(k) * step->dx[i] + weights->S_at(k) * step->du[i] +
            weights->alpha_grad_x[k];
  }
  const auto nodal = detail::stationarity_and_complementarity(prob, z, kind);
  ResidualNorms out =
      ResidualNorms::from_parts(quadrature_l2sq(r4), quadrature_l2sq(nodal.r5), quadrature_l2sq(nodal.r6));
  if (g.intervals() >= 2) out.r4_direct_sq = detail::direct_r4_sq(prob, z);
  return out;
}

}  // namespace ocsolve
