// Command-line front end: ocsolve solve --problem ... --out <dir>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ocsolve/ocsolve.hpp"

namespace fs = std::filesystem;
using namespace ocsolve;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitMaxIters = 2;
constexpr int kExitUsage = 64;

void configure_logging() {
  const char* env = std::getenv("OCSOLVE_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::set_level(spdlog::level::info);
  spdlog::set_pattern("[%l] %v");
}

struct SolveArgs {
  std::string problem = "double-integrator";
  std::string ncp;
  std::optional<double> delta;
  std::optional<double> tol;
  std::optional<int> grid;
  std::optional<int> max_iters;
  std::string damping;
  std::string out = ".";
  double s0 = 3.5;
  std::optional<double> terminal_dare;
  std::string config;
  bool dump_riccati = false;
  std::vector<int> snapshots;
};

struct BuiltProblem {
  OcpProblem prob;
  int grid_intervals = 0;
  std::optional<LaneChangeParams> lane;
};

BuiltProblem build_problem(const SolveArgs& a) {
  BuiltProblem b;
  if (a.problem == "scalar-lqr") {
    b.prob = scalar_lqr_problem();
  } else if (a.problem == "double-integrator") {
    b.prob = double_integrator_problem(0.5, (Vec(2) << 1.0, 0.0).finished(), 5.0);
  } else if (a.problem == "lane-change") {
    b.lane = LaneChangeParams{};
    b.prob = lane_change_problem(*b.lane, a.s0, a.terminal_dare);
  } else if (a.problem.rfind("file:", 0) == 0) {
    const LqProblemData d = io::lq_problem_from_json(io::read_json_file(a.problem.substr(5)));
    b.grid_intervals = d.grid_intervals;
    b.prob = make_lq_problem(d);
  } else {
    throw CLI::ValidationError("--problem", "unknown problem '" + a.problem + "'");
  }
  return b;
}

SolverConfig build_config(const SolveArgs& a, int problem_grid) {
  SolverConfig cfg;
  if (problem_grid > 0) cfg.n_intervals = problem_grid;
  if (!a.config.empty()) io::apply_config_json(io::read_json_file(a.config), cfg);
  if (!a.ncp.empty()) cfg.ncp_kind = parse_ncp_kind(a.ncp);
  if (a.delta) cfg.delta = *a.delta;
  if (a.tol) cfg.eps_t = *a.tol;
  if (a.grid) cfg.n_intervals = *a.grid;
  if (a.max_iters) cfg.max_iters = *a.max_iters;
  if (a.damping == "full") cfg.damping = Damping::FullStep;
  else if (a.damping == "merit") cfg.damping = Damping::MeritBacktracking;
  cfg.snapshot_iterations = a.snapshots;
  cfg.keep_riccati = a.dump_riccati;
  return cfg;
}

std::string outputs_csv(const LaneChangeParams& p, const Iterate& z) {
  std::ostringstream os;
  os << "# angles in degrees\n";
  os << "t,alpha_f,alpha_r,delta_f,alpha_f_bound,delta_f_bound\n";
  const double sb = rad2deg(p.slip_bound);
  const double db = rad2deg(p.steer_bound);
  for (int k = 0; k < z.grid().nodes(); ++k) {
    const Vec y = lane_change_outputs(p, z.x[k]);
    os << io::format_double(z.grid().time(k)) << ',' << io::format_double(rad2deg(y(0))) << ','
       << io::format_double(rad2deg(y(1))) << ',' << io::format_double(rad2deg(y(2))) << ','
       << io::format_double(sb) << ',' << io::format_double(db) << "\n";
  }
  return os.str();
}

int exit_code(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged:
    case SolverStatus::Asymptote:
      return kExitOk;
    case SolverStatus::MaxIters:
      return kExitMaxIters;
    case SolverStatus::Failed:
      return kExitFailed;
  }
  return kExitFailed;
}

int run_solve(const SolveArgs& a) {
  BuiltProblem built = build_problem(a);
  const SolverConfig cfg = build_config(a, built.grid_intervals);
  spdlog::info("problem {}: n={} m={} p={} T={} grid={} ncp={} delta={}", built.prob.name,
               built.prob.state_dim(), built.prob.input_dim(), built.prob.constraint_count(),
               built.prob.horizon, cfg.n_intervals, to_string(cfg.ncp_kind), cfg.effective_delta());

  const SolverReport report = solve(built.prob, cfg);
  for (std::size_t k = 0; k < report.residual_history.size(); ++k) {
    const auto& r = report.residual_history[k];
    spdlog::debug("iter {:3d}  total {:.6e}  r4 {:.3e}  r5 {:.3e}  r6 {:.3e}", k, r.total, r.r4_sq,
                  r.r5_sq, r.r6_sq);
  }
  for (const auto& w : report.warnings) spdlog::debug("warning: {}", w);

  const fs::path out(a.out);
  fs::create_directories(out);
  io::write_file_atomic(out / "report.json", io::report_to_json(report, cfg).dump(2) + "\n");
  io::write_file_atomic(out / "residuals.csv", io::residuals_csv(report));
  if (report.final_iterate.x.nodes() > 0) {
    io::write_file_atomic(out / "trajectory.csv", io::trajectory_csv(report.final_iterate));
    if (built.lane) {
      io::write_file_atomic(out / "outputs.csv", outputs_csv(*built.lane, report.final_iterate));
    }
  }
  for (const auto& [k, z] : report.snapshots) {
    const std::string suffix = "_iter" + std::to_string(k) + ".csv";
    io::write_file_atomic(out / ("trajectory" + suffix), io::trajectory_csv(z));
    if (built.lane) io::write_file_atomic(out / ("outputs" + suffix), outputs_csv(*built.lane, z));
  }
  if (report.last_riccati) {
    io::write_file_atomic(out / "riccati.csv", io::riccati_csv(*report.last_riccati));
  }

  const double final_res =
      report.residual_history.empty() ? 0.0 : report.residual_history.back().total;
  if (report.status == SolverStatus::Failed) {
    spdlog::error("failed after {} iterations: {}", report.iterations, report.message);
  } else {
    spdlog::info("{} after {} iterations, residual {:.3e}, {:.3f} s", to_string(report.status),
                 report.iterations, final_res, report.wall_time);
  }
  return exit_code(report.status);
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Constrained LQ optimal control via semi-smooth Newton and Riccati sweeps"};
  app.require_subcommand(1);

  SolveArgs a;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a benchmark or file-defined problem");
  solve_cmd->add_option("--problem", a.problem,
                        "scalar-lqr | double-integrator | lane-change | file:<path>")
      ->capture_default_str();
  solve_cmd->add_option("--ncp", a.ncp, "NCP function")->check(CLI::IsMember({"min", "fb"}));
  solve_cmd->add_option("--delta", a.delta, "NCP regularization")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--tol", a.tol, "residual tolerance")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--grid", a.grid, "number of grid intervals")->check(CLI::Range(2, 100000000));
  solve_cmd->add_option("--max-iters", a.max_iters, "iteration limit")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--damping", a.damping, "step policy")->check(CLI::IsMember({"full", "merit"}));
  solve_cmd->add_option("--out", a.out, "output directory")->capture_default_str();
  solve_cmd->add_option("--s0", a.s0, "lane-change initial lateral offset [m]")->capture_default_str();
  solve_cmd->add_option("--terminal-dare", a.terminal_dare,
                        "lane-change terminal weight from the discrete ARE with this step [s]")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--config", a.config, "JSON solver configuration")->check(CLI::ExistingFile);
  solve_cmd->add_flag("--dump-riccati", a.dump_riccati, "write riccati.csv from the last step");
  solve_cmd->add_option("--snapshots", a.snapshots, "iterations to export as extra CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    return run_solve(a);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitFailed;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailed;
  }
}
