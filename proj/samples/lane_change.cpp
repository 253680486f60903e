#include <cstdio>

#include "ocsolve/ocsolve.hpp"

int main() {
  using namespace ocsolve;
  const LaneChangeParams params;
  const OcpProblem prob = lane_change_problem(params, 3.5);

  SolverConfig cfg;
  cfg.ncp_kind = NcpKind::FischerBurmeister;
  cfg.delta = 1e-2;
  const SolverReport report = solve(prob, cfg);

  std::printf("status %s after %d iterations\n", to_string(report.status), report.iterations);
  for (std::size_t k = 0; k < report.residual_history.size(); ++k) {
    std::printf("%3zu  %.3e\n", k, report.residual_history[k].total);
  }
  return report.status == SolverStatus::Failed ? 1 : 0;
}
