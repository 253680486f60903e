// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ocsolve/ocsolve.hpp"
#include "oracle/transcription_qp.hpp"
#include "support/double_integrator.hpp"
#include "support/generators.hpp"

using namespace ocsolve;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared runs: the double-integrator solve feeds criteria 3, 5 and 7; the
// lane-change solves feed 4 and 5.
struct Runs {
  SolverReport di;
  double di_seconds = 0.0;
  SolverReport lane_fb;
  SolverReport lane_min;
  double lane_seconds = 0.0;
  OcpProblem lane_problem;
};

SolverConfig di_config() {
  SolverConfig cfg;
  cfg.n_intervals = 1000;
  cfg.eps_t = 1e-6;
  return cfg;
}

SolverConfig lane_config(NcpKind kind, double delta) {
  SolverConfig cfg;
  cfg.ncp_kind = kind;
  cfg.delta = delta;
  cfg.eps_t = 1e-6;
  cfg.n_intervals = 2000;
  return cfg;
}

Runs& runs() {
  static Runs r = [] {
    Runs out;
    auto t0 = Clock::now();
    out.di = solve(di::problem(), di_config());
    out.di_seconds = seconds_since(t0);
    out.lane_problem = lane_change_problem(LaneChangeParams{}, 3.5);
    t0 = Clock::now();
    out.lane_fb = solve(out.lane_problem, lane_config(NcpKind::FischerBurmeister, 1e-2));
    out.lane_min = solve(out.lane_problem, lane_config(NcpKind::Min, 1e-1));
    out.lane_seconds = seconds_since(t0);
    return out;
  }();
  return r;
}

// 1. Scalar Riccati equation against tanh.
Outcome analytic_riccati() {
  const auto t0 = Clock::now();
  const OcpProblem prob = scalar_lqr_problem(2.0, 1.0, 0.0);
  const TimeGrid g(0.0, 2.0, 2000);
  const auto w = assemble_weights(prob, zero_iterate(g, 1, 1, 0), NcpKind::Min, 0.1);
  const auto ric = solve_riccati(prob, w, Vec::Zero(1));
  const double dt = seconds_since(t0);
  const double err = std::abs(ric.P[0](0) - std::tanh(2.0));
  return {err <= 1e-6 && dt < 0.1, fmt("|P(0) - tanh(2)| = %.3e, %.4f s", err, dt)};
}

// 2. Unconstrained problems converge right after initialization.
Outcome unconstrained_exactness() {
  gen::Rng rng(2);
  int worst_iters = 0;
  double worst_total = 0.0;
  bool ok = true;
  constexpr int kTrials = 20;
  for (int trial = 0; trial < kTrials; ++trial) {
    const OcpProblem prob = make_lq_problem(gen::random_lq(rng, rng.integer(1, 5), rng.integer(1, 3)));
    SolverConfig cfg;
    cfg.n_intervals = 2000;
    cfg.eps_t = 1e-8;
    const auto rep = solve(prob, cfg);
    const double total = rep.residual_history.empty() ? INFINITY : rep.residual_history.back().total;
    ok = ok && rep.status == SolverStatus::Converged && rep.iterations <= 1 && total < 1e-8;
    worst_iters = std::max(worst_iters, rep.iterations);
    worst_total = std::max(worst_total, total);
  }
  return {ok, fmt("%d random problems, max iterations %d, max final residual %.3e", kTrials, worst_iters,
                  worst_total)};
}

std::vector<bool> dilate(const std::vector<bool>& s, int radius) {
  std::vector<bool> out(s.size(), false);
  const int n = static_cast<int>(s.size());
  for (int i = 0; i < n; ++i) {
    if (!s[static_cast<std::size_t>(i)]) continue;
    for (int j = std::max(0, i - radius); j <= std::min(n - 1, i + radius); ++j) out[static_cast<std::size_t>(j)] = true;
  }
  return out;
}

// 3. Double integrator against the transcription oracle.
Outcome oracle_equivalence() {
  const auto& R = runs();
  const auto sol = di::oracle_solution(1000);
  if (R.di.status != SolverStatus::Converged) return {false, "solver status " + std::string(to_string(R.di.status))};
  const Iterate& z = R.di.final_iterate;
  const double ex = (z.x.values() - sol.x).colwise().norm().maxCoeff();
  const double eu = (z.u.values() - sol.u).colwise().norm().maxCoeff();

  // Component 0 bounds u from above, component 1 from below.
  int mismatches = 0;
  for (int side = 0; side < 2; ++side) {
    std::vector<bool> oracle_active(static_cast<std::size_t>(z.u.nodes()));
    std::vector<bool> solver_active(oracle_active.size());
    for (int i = 0; i < z.u.nodes(); ++i) {
      const double b = sol.bound(0, i);
      oracle_active[static_cast<std::size_t>(i)] = side == 0 ? b > 0.0 : b < 0.0;
      solver_active[static_cast<std::size_t>(i)] = z.mu[i](side) > 1e-6;
    }
    const auto oracle_near = dilate(oracle_active, 2);
    const auto solver_near = dilate(solver_active, 2);
    for (std::size_t i = 0; i < oracle_active.size(); ++i) {
      if (oracle_active[i] && !solver_near[i]) ++mismatches;
      if (solver_active[i] && !oracle_near[i]) ++mismatches;
    }
  }
  const bool ok = ex <= 1e-3 && eu <= 1e-3 && mismatches == 0 && R.di_seconds < 5.0;
  return {ok, fmt("max |x err| %.3e, max |u err| %.3e, active-set nodes off by > 2 cells: %d, %.3f s", ex, eu,
                  mismatches, R.di_seconds)};
}

std::string lane_summary(const char* name, const SolverReport& rep, bool& ok) {
  const auto& h = rep.residual_history;
  if (h.empty()) {
    ok = false;
    return std::string(name) + ": no residuals (" + rep.message + ")";
  }
  double best10 = h[0].total;
  for (std::size_t k = 1; k < h.size() && k <= 10; ++k) best10 = std::min(best10, h[k].total);
  const double drop = h[0].total / best10;
  const bool plateau = rep.status == SolverStatus::Asymptote;
  ok = ok && drop >= 1e4 && plateau;
  return fmt("%s: r0 %.3e, best within 10 iterations %.3e (drop %.1fx), status %s after %d iterations", name,
             h[0].total, best10, drop, to_string(rep.status), rep.iterations);
}

// 4. Lane-change residual decay and plateau.
Outcome lane_change_decay() {
  const auto& R = runs();
  bool ok = R.lane_seconds < 60.0;
  std::string d = lane_summary("fb", R.lane_fb, ok);
  d += "; " + lane_summary("min", R.lane_min, ok);
  d += fmt("; %.1f s", R.lane_seconds);
  return {ok, d};
}

// Ratios total_{k+1} / total_k over the last three steps that end at least a
// factor 10 above the smallest residual of the run.
bool ratios_decreasing(const SolverReport& rep, std::string& detail) {
  const auto& h = rep.residual_history;
  if (h.size() < 2) {
    detail = "too few iterations";
    return false;
  }
  double floor = INFINITY;
  for (const auto& r : h) floor = std::min(floor, r.total);
  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < h.size(); ++k) {
    if (h[k + 1].total >= 10.0 * floor && h[k].total > 0.0) ratios.push_back(h[k + 1].total / h[k].total);
  }
  if (ratios.size() < 3) {
    detail = fmt("only %zu ratios above the floor", ratios.size());
    return false;
  }
  const std::size_t s = ratios.size() - 3;
  detail = fmt("last ratios %.3f %.3f %.3f", ratios[s], ratios[s + 1], ratios[s + 2]);
  return ratios[s] > ratios[s + 1] && ratios[s + 1] > ratios[s + 2];
}

// 5. Superlinear rate.
Outcome superlinear_rate() {
  const auto& R = runs();
  std::string a, b, c;
  const bool ok_di = ratios_decreasing(R.di, a);
  const bool ok_fb = ratios_decreasing(R.lane_fb, b);
  const bool ok_min = ratios_decreasing(R.lane_min, c);
  return {ok_di && ok_fb && ok_min,
          "double-integrator " + a + "; lane-change fb " + b + "; lane-change min " + c};
}

// 6. Invariant suites.
Outcome invariant_suites() {
  std::vector<std::string> failed;
  auto check = [&](bool cond, const char* what) {
    if (!cond) failed.emplace_back(what);
  };

  bool ncp_equiv = true, circle = true, beta_nonneg = true;
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j <= 200; ++j) {
      const double a = -10.0 + 0.1 * i;
      const double b = -10.0 + 0.1 * j;
      const bool comp = a >= 0.0 && b >= 0.0 && std::abs(a * b) <= 1e-12;
      for (NcpKind kind : {NcpKind::Min, NcpKind::FischerBurmeister}) {
        ncp_equiv = ncp_equiv && ((std::abs(phi(kind, a, -b)) <= 1e-12) == comp);
        const auto e = jacobian_element(kind, a, -b);
        for (double delta : {1e-3, 1e-2, 1e-1})
          beta_nonneg = beta_nonneg && alpha_beta(phi(kind, a, -b), e, delta).beta >= 0.0;
        if (kind == NcpKind::FischerBurmeister && (a != 0.0 || b != 0.0))
          circle = circle && std::abs(std::pow(1.0 - e.eta, 2) + std::pow(1.0 + e.gamma, 2) - 1.0) <= 1e-12;
      }
    }
  }
  check(ncp_equiv, "ncp-equivalence");
  check(circle, "fb-circle");
  check(beta_nonneg, "beta>=0");

  gen::Rng rng(6);
  double asym = 0.0, stat = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.integer(1, 5);
    const int m = rng.integer(1, 3);
    const OcpProblem prob = make_lq_problem(gen::random_lq(rng, n, m));
    const TimeGrid g(0.0, prob.horizon, 400);
    const Iterate z = zero_iterate(g, n, m, 0);
    const auto upd = newton_update(prob, z, NcpKind::Min, 0.1, 1.0);
    for (int i = 0; i < g.nodes(); ++i) {
      const Mat P = upd.riccati.P.matrix(i, n, n);
      asym = std::max(asym, (P - P.transpose()).cwiseAbs().maxCoeff());
      const int k = 2 * i;
      const Vec s = upd.weights.S_at(k).transpose() * upd.step.dx[i] + upd.weights.R_at(k) * upd.step.du[i] +
                    prob.B.transpose() * upd.step.lam_plus[i] + upd.weights.r[k];
      stat = std::max(stat, s.norm());
    }
  }
  // Constrained case: stationarity with active multiplier terms.
  {
    const OcpProblem prob = di::problem();
    SolverConfig cfg;
    cfg.n_intervals = 500;
    Iterate z = initialize(prob, cfg);
    for (int it = 0; it < 3; ++it) {
      const auto upd = newton_update(prob, z, NcpKind::FischerBurmeister, 0.01, default_dynamics_tol(prob, z));
      for (int i = 0; i < z.grid().nodes(); ++i) {
        const int k = 2 * i;
        const Vec s = upd.weights.S_at(k).transpose() * upd.step.dx[i] + upd.weights.R_at(k) * upd.step.du[i] +
                      prob.B.transpose() * upd.step.lam_plus[i] + upd.weights.r[k];
        stat = std::max(stat, s.norm());
      }
      z = apply_step(z, upd.step, 1.0);
    }
  }
  check(asym <= 1e-12, "P-symmetry");
  check(stat <= 1e-10, "stationarity");

  bool feasible = true;
  {
    const OcpProblem prob = di::problem();
    SolverConfig cfg;
    cfg.n_intervals = 500;
    for (double gamma : {0.25, 0.5, 1.0}) {
      Iterate z = initialize(prob, cfg);
      for (int it = 0; it < 4; ++it) {
        const auto upd = newton_update(prob, z, NcpKind::Min, 0.1, default_dynamics_tol(prob, z));
        z = apply_step(z, upd.step, gamma);
        feasible = feasible && dynamics_residual(prob, z) <= default_dynamics_tol(prob, z);
      }
    }
  }
  check(feasible, "dynamics-preservation");

  bool quad = true;
  for (int trial = 0; trial < 100; ++trial) {
    const double T = rng.uniform(0.1, 10.0);
    const TimeGrid g(0.0, T, rng.integer(2, 300));
    const auto f = gen::random_signal(rng, g, rng.integer(1, 4));
    quad = quad && quadrature_l2sq(f) <= T * f.max_norm() * f.max_norm() * (1.0 + 1e-14);
  }
  check(quad, "quadrature-bound");

  std::string d = fmt("P asymmetry %.2e, stationarity %.2e", asym, stat);
  for (const auto& f : failed) d += "; failed " + f;
  return {failed.empty(), d};
}

// 7. Stopping-test r4 against the direct evaluation.
Outcome residual_cross_check() {
  const auto& h = runs().di.residual_history;
  int bad = 0;
  double worst = 0.0;
  std::string first_bad;
  for (std::size_t k = 2; k < h.size(); ++k) {
    if (!h[k].r4_direct_sq) {
      ++bad;
      continue;
    }
    const double a = h[k].r4_sq;
    const double b = *h[k].r4_direct_sq;
    const double tol = std::max(1e-6, 0.05 * std::max(a, b));
    worst = std::max(worst, std::abs(a - b) / tol);
    if (std::abs(a - b) > tol) {
      if (bad == 0) first_bad = fmt(" (iteration %zu: %.3e vs %.3e)", k, a, b);
      ++bad;
    }
  }
  const bool ok = h.size() > 2 && bad == 0;
  return {ok, fmt("%d of %zu iterations outside tolerance, worst |diff|/tol %.2f", bad,
                  h.size() > 2 ? h.size() - 2 : 0, worst) +
                  first_bad};
}

// 8. Lane-change constraint derivatives against central differences.
Outcome derivative_check() {
  const LaneChangeParams p;
  const auto c = lane_change_constraints(p);
  const Vec u = Vec::Zero(1);
  gen::Rng rng(8);
  auto fd = [](const std::function<Vec(const Vec&)>& f, const Vec& x) {
    const double h = 1e-6;
    const Vec f0 = f(x);
    Mat J(f0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      Vec xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return J;
  };
  auto rel = [](const Mat& a, const Mat& ref) { return (a - ref).norm() / std::max(ref.norm(), 1e-12); };
  double worst_j = 0.0, worst_h = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vec x(5);
    x << rng.uniform(-5, 5), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-1.0, 1.0),
        rng.uniform(-0.5, 0.5);
    worst_j = std::max(worst_j, rel(c.jacobian_x(x, u), fd([&](const Vec& y) { return c.value(y, u); }, x)));
    for (int i = 0; i < c.count; ++i) {
      const Mat Hfd = fd([&](const Vec& y) -> Vec { return c.jacobian_x(y, u).row(i).transpose(); }, x);
      worst_h = std::max(worst_h, rel(c.hessian_xx(x, u, i), Hfd));
    }
  }
  return {worst_j <= 1e-6 && worst_h <= 1e-6,
          fmt("20 states, max relative error: jacobian %.2e, hessian %.2e", worst_j, worst_h)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 analytic-riccati", analytic_riccati},
      {"2 unconstrained-exactness", unconstrained_exactness},
      {"3 oracle-equivalence", oracle_equivalence},
      {"4 lane-change-decay", lane_change_decay},
      {"5 superlinear-rate", superlinear_rate},
      {"6 invariant-suites", invariant_suites},
      {"7 residual-cross-check", residual_cross_check},
      {"8 derivative-check", derivative_check},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }

  // Informational: final constraint satisfaction on the lane-change runs.
  const auto& R = runs();
  for (const auto* rep : {&R.lane_fb, &R.lane_min}) {
    const Iterate& z = rep->final_iterate;
    double cmax = -INFINITY;
    for (int i = 0; i < z.x.nodes(); ++i)
      cmax = std::max(cmax, R.lane_problem.constraints.value(z.x[i], z.u[i]).maxCoeff());
    std::printf("INFO  lane-change %s final max constraint value %.3e rad, residuals:",
                rep == &R.lane_fb ? "fb " : "min", cmax);
    for (const auto& r : rep->residual_history) std::printf(" %.2e", r.total);
    std::printf("\n");
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
