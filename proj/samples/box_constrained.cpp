#include <cstdio>

#include "ocsolve/ocsolve.hpp"

// Double integrator with |u| <= 0.5, solved with both NCP functions.
int main() {
  using namespace ocsolve;
  const OcpProblem prob = double_integrator_problem(0.5, (Vec(2) << 1.0, 0.0).finished(), 5.0);

  for (NcpKind kind : {NcpKind::FischerBurmeister, NcpKind::Min}) {
    SolverConfig cfg;
    cfg.ncp_kind = kind;
    cfg.n_intervals = 1000;
    const SolverReport report = solve(prob, cfg);
    const auto& z = report.final_iterate;
    std::printf("%-3s %s after %d iterations, residual %.3e, max |u| %.4f, %.3f s\n", to_string(kind),
                to_string(report.status), report.iterations, report.residual_history.back().total,
                z.u.values().cwiseAbs().maxCoeff(), report.wall_time);
  }
  return 0;
}
