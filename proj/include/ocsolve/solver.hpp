#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ocsolve/iterate.hpp"
#include "ocsolve/kkt.hpp"
#include "ocsolve/ncp.hpp"
#include "ocsolve/riccati_step.hpp"

namespace ocsolve {

enum class Damping { FullStep, MeritBacktracking };

[[nodiscard]] inline const char* to_string(Damping d) {
  return d == Damping::FullStep ? "full" : "merit";
}

struct SolverConfig {
  NcpKind ncp_kind = NcpKind::FischerBurmeister;
  std::optional<double> delta;  // defaults per NCP kind
  double eps_t = 1e-6;
  int max_iters = 100;
  int n_intervals = 2000;
  Damping damping = Damping::FullStep;
  double backtrack_factor = 0.5;
  double min_gamma = 1.0 / 1024.0;
  double dynamics_tol = 0.0;  // <= 0: derived from the grid and the iterate
  // Asymptote detection: stop when each of the last `plateau_window`
  // iterations changed the residual by less than `plateau_improvement`
  // (relative, in either direction).
  int plateau_window = 3;
  double plateau_improvement = 0.1;
  std::vector<int> snapshot_iterations;
  bool keep_riccati = false;

  [[nodiscard]] double effective_delta() const { return delta.value_or(default_delta(ncp_kind)); }

  void validate() const {
    require(eps_t > 0.0, ErrorCode::InvalidArgument, "eps_t must be > 0");
    require(effective_delta() > 0.0, ErrorCode::InvalidArgument, "delta must be > 0");
    require(max_iters > 0, ErrorCode::InvalidArgument, "max_iters must be > 0");
    require(n_intervals >= 2, ErrorCode::InvalidArgument, "n_intervals must be >= 2");
    require(backtrack_factor > 0.0 && backtrack_factor < 1.0, ErrorCode::InvalidArgument,
            "backtrack_factor must be in (0, 1)");
    require(min_gamma > 0.0 && min_gamma <= 1.0, ErrorCode::InvalidArgument,
            "min_gamma must be in (0, 1]");
    require(plateau_window >= 1 && plateau_improvement >= 0.0 && plateau_improvement < 1.0,
            ErrorCode::InvalidArgument, "invalid plateau settings");
  }
};

enum class SolverStatus { Converged, Asymptote, MaxIters, Failed };

[[nodiscard]] inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged:
      return "converged";
    case SolverStatus::Asymptote:
      return "asymptote";
    case SolverStatus::MaxIters:
      return "max_iters";
    case SolverStatus::Failed:
      return "failed";
  }
  return "unknown";
}

struct SolverReport {
  SolverStatus status = SolverStatus::Failed;
  std::string message;
  int iterations = 0;
  std::vector<ResidualNorms> residual_history;  // iterations + 1 entries
  std::vector<double> step_norm_history;
  std::vector<double> step_size_history;
  std::vector<double> contraction_ratios;  // total_{k+1} / total_k
  std::optional<double> floor_value;
  std::vector<std::string> warnings;
  double wall_time = 0.0;
  Iterate final_iterate;
  std::vector<std::pair<int, Iterate>> snapshots;
  std::optional<RiccatiSolution> last_riccati;
};

/// Unconstrained LQR solve linearized at the zero trajectory with mu = 0 and
/// all constraint terms dropped. The result satisfies x(0) = x0 exactly and is
/// dynamically feasible by construction.
inline Iterate initialize(const OcpProblem& prob, const SolverConfig& cfg) {
  prob.validate();
  const TimeGrid grid(0.0, prob.horizon, cfg.n_intervals);
  const Iterate zero =
      zero_iterate(grid, prob.state_dim(), prob.input_dim(), prob.constraint_count());
  NewtonUpdate upd = newton_update(prob, zero, cfg.ncp_kind, cfg.effective_delta(),
                                   std::numeric_limits<double>::infinity(), ConstraintTerms::Drop);
  return {std::move(upd.step.dx), std::move(upd.step.du), std::move(upd.step.lam_plus),
          GridSignal(grid, prob.constraint_count()), std::move(upd.step.dxdot)};
}

/// Squared residual norm used for globalization. Uses the direct evaluator,
/// since a trial point has no step of its own.
inline double merit(const OcpProblem& prob, const Iterate& z, NcpKind kind) {
  const double t = residual_direct(prob, z, kind).total;
  return t * t;
}

namespace detail {

inline double step_norm(const NewtonStep& s, const Iterate& z) {
  GridSignal dlam(z.grid(), z.lam.dim());
  dlam.values() = s.lam_plus.values() - z.lam.values();
  return std::sqrt(quadrature_l2sq(s.dx) + quadrature_l2sq(s.du) + quadrature_l2sq(dlam) +
                   quadrature_l2sq(s.dmu));
}

inline bool on_plateau(const std::vector<ResidualNorms>& h, int window, double improvement) {
  if (static_cast<int>(h.size()) < window + 1) return false;
  for (std::size_t k = h.size() - static_cast<std::size_t>(window); k < h.size(); ++k) {
    const double prev = h[k - 1].total;
    if (!(std::abs(h[k].total - prev) < improvement * prev)) return false;
  }
  return true;
}

}  // namespace detail

/// Semi-smooth Newton iteration: initialize, then Newton direction + update
/// until the residual drops below eps_t, an asymptote is detected, or
/// max_iters is reached. Numerical failures are reported as status Failed.
inline SolverReport solve(const OcpProblem& prob, const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  SolverReport report;
  const NcpKind kind = cfg.ncp_kind;
  auto wants_snapshot = [&](int k) {
    for (int s : cfg.snapshot_iterations)
      if (s == k) return true;
    return false;
  };

  try {
    cfg.validate();
    const double delta = cfg.effective_delta();
    Iterate z = initialize(prob, cfg);
    ResidualNorms res = residual_direct(prob, z, kind);
    report.residual_history.push_back(res);
    if (wants_snapshot(0)) report.snapshots.emplace_back(0, z);

    while (true) {
      if (!std::isfinite(res.total)) {
        report.status = SolverStatus::Failed;
        report.message = "non-finite residual";
        break;
      }
      if (res.total < cfg.eps_t) {
        report.status = SolverStatus::Converged;
        break;
      }
      if (detail::on_plateau(report.residual_history, cfg.plateau_window, cfg.plateau_improvement)) {
        report.status = SolverStatus::Asymptote;
        break;
      }
      if (report.iterations >= cfg.max_iters) {
        report.status = SolverStatus::MaxIters;
        break;
      }

      const double tol = cfg.dynamics_tol > 0.0 ? cfg.dynamics_tol : default_dynamics_tol(prob, z);
      NewtonUpdate upd = newton_update(prob, z, kind, delta, tol);

      double gamma = 1.0;
      Iterate next = apply_step(z, upd.step, 1.0);
      std::optional<ResidualNorms> damped_res;
      if (cfg.damping == Damping::MeritBacktracking) {
        const double m0 = merit(prob, z, kind);
        ResidualNorms trial = residual_direct(prob, next, kind);
        while (!(trial.total * trial.total < m0)) {
          gamma *= cfg.backtrack_factor;
          if (gamma < cfg.min_gamma) {
            gamma = 1.0;
            next = apply_step(z, upd.step, 1.0);
            report.warnings.push_back("iteration " + std::to_string(report.iterations + 1) +
                                      ": no merit decrease down to min_gamma, took the full step");
            break;
          }
          next = apply_step(z, upd.step, gamma);
          trial = residual_direct(prob, next, kind);
        }
        if (gamma < 1.0) damped_res = trial;
      }

      report.step_norm_history.push_back(detail::step_norm(upd.step, z));
      report.step_size_history.push_back(gamma);
      z = std::move(next);
      ++report.iterations;

      res = damped_res ? *damped_res : residual_norms(prob, z, kind, &upd.step, &upd.weights);
      if (res.r4_direct_sq) {
        const double a = res.r4_sq;
        const double b = *res.r4_direct_sq;
        if (std::abs(a - b) > std::max(1e-6, 0.05 * std::max(a, b))) {
          report.warnings.push_back("iteration " + std::to_string(report.iterations) +
                                    ": r4 stopping-test value " + std::to_string(a) +
                                    " differs from direct value " + std::to_string(b));
        }
      }
      const double prev = report.residual_history.back().total;
      report.contraction_ratios.push_back(prev > 0.0 ? res.total / prev : 0.0);
      report.residual_history.push_back(res);
      if (wants_snapshot(report.iterations)) report.snapshots.emplace_back(report.iterations, z);
      if (cfg.keep_riccati) report.last_riccati = std::move(upd.riccati);
    }
    report.final_iterate = std::move(z);
  } catch (const Error& e) {
    report.status = SolverStatus::Failed;
    report.message = e.what();
  }

  if (report.status == SolverStatus::Asymptote || report.status == SolverStatus::MaxIters) {
    double floor = std::numeric_limits<double>::infinity();
    for (const auto& r : report.residual_history) floor = std::min(floor, r.total);
    report.floor_value = floor;
  }
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace ocsolve
