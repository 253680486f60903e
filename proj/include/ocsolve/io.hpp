#pragma once

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ocsolve/problem.hpp"
#include "ocsolve/solver.hpp"

namespace ocsolve::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Problem files (LQ with affine constraints). Matrices are arrays of rows.
//
// {
//   "name": "...", "A": [[...]], "B": [[...]], "x0": [...], "horizon": 5.0,
//   "grid": 1000,                                  (optional)
//   "cost": {"Q": .., "R": .., "S": .., "q": .., "r": .., "P_terminal": .., "p_terminal": ..},
//   "constraints": {"C": .., "D": .., "e": ..}     (optional; C x + D u + e <= 0)
// }

inline Mat matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::Io, what + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Mat(0, 0);
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Mat M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::Io, what + ": ragged matrix");
    }
    for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return M;
}

inline Vec vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::Io, what + ": expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

inline json matrix_to_json(const Mat& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline LqProblemData lq_problem_from_json(const json& j) {
  try {
    LqProblemData d;
    d.name = j.value("name", std::string("file"));
    d.A = matrix_from_json(j.at("A"), "A");
    d.B = matrix_from_json(j.at("B"), "B");
    d.x0 = vector_from_json(j.at("x0"), "x0");
    d.horizon = j.at("horizon").get<double>();
    d.grid_intervals = j.value("grid", 0);
    const json& cost = j.at("cost");
    auto opt_mat = [&](const json& obj, const char* key) {
      return obj.contains(key) ? matrix_from_json(obj.at(key), key) : Mat();
    };
    auto opt_vec = [&](const json& obj, const char* key) {
      return obj.contains(key) ? vector_from_json(obj.at(key), key) : Vec();
    };
    d.Q = opt_mat(cost, "Q");
    d.R = matrix_from_json(cost.at("R"), "R");
    d.S = opt_mat(cost, "S");
    d.q = opt_vec(cost, "q");
    d.r = opt_vec(cost, "r");
    d.P_terminal = opt_mat(cost, "P_terminal");
    d.p_terminal = opt_vec(cost, "p_terminal");
    if (j.contains("constraints")) {
      const json& c = j.at("constraints");
      d.C = matrix_from_json(c.at("C"), "C");
      d.D = opt_mat(c, "D");
      d.e = opt_vec(c, "e");
    }
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("problem file: ") + e.what());
  }
}

inline json lq_problem_to_json(const LqProblemData& d) {
  json j;
  j["name"] = d.name;
  j["A"] = matrix_to_json(d.A);
  j["B"] = matrix_to_json(d.B);
  j["x0"] = vector_to_json(d.x0);
  j["horizon"] = d.horizon;
  if (d.grid_intervals > 0) j["grid"] = d.grid_intervals;
  json cost;
  if (d.Q.size()) cost["Q"] = matrix_to_json(d.Q);
  cost["R"] = matrix_to_json(d.R);
  if (d.S.size()) cost["S"] = matrix_to_json(d.S);
  if (d.q.size()) cost["q"] = vector_to_json(d.q);
  if (d.r.size()) cost["r"] = vector_to_json(d.r);
  if (d.P_terminal.size()) cost["P_terminal"] = matrix_to_json(d.P_terminal);
  if (d.p_terminal.size()) cost["p_terminal"] = vector_to_json(d.p_terminal);
  j["cost"] = cost;
  if (d.C.rows() > 0) {
    json c;
    c["C"] = matrix_to_json(d.C);
    if (d.D.size()) c["D"] = matrix_to_json(d.D);
    if (d.e.size()) c["e"] = vector_to_json(d.e);
    j["constraints"] = c;
  }
  return j;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Solver configuration. Keys mirror the CLI flags; all are optional.

inline void apply_config_json(const json& j, SolverConfig& cfg) {
  try {
    if (j.contains("ncp")) cfg.ncp_kind = parse_ncp_kind(j.at("ncp").get<std::string>());
    if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
    if (j.contains("tol")) cfg.eps_t = j.at("tol").get<double>();
    if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<int>();
    if (j.contains("grid")) cfg.n_intervals = j.at("grid").get<int>();
    if (j.contains("damping")) {
      const auto d = j.at("damping").get<std::string>();
      if (d == "full") cfg.damping = Damping::FullStep;
      else if (d == "merit") cfg.damping = Damping::MeritBacktracking;
      else throw Error(ErrorCode::Io, "config: unknown damping '" + d + "'");
    }
    if (j.contains("backtrack_factor")) cfg.backtrack_factor = j.at("backtrack_factor").get<double>();
    if (j.contains("min_gamma")) cfg.min_gamma = j.at("min_gamma").get<double>();
    if (j.contains("dynamics_tol")) cfg.dynamics_tol = j.at("dynamics_tol").get<double>();
    if (j.contains("plateau_window")) cfg.plateau_window = j.at("plateau_window").get<int>();
    if (j.contains("plateau_improvement")) cfg.plateau_improvement = j.at("plateau_improvement").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::Io, std::string("config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports and CSV.

inline json residuals_to_json(int iter, const ResidualNorms& r) {
  json j{{"iter", iter}, {"r4_sq", r.r4_sq}, {"r5_sq", r.r5_sq}, {"r6_sq", r.r6_sq}, {"total", r.total}};
  if (r.r4_direct_sq) j["r4_direct_sq"] = *r.r4_direct_sq;
  return j;
}

inline json signal_to_json(const GridSignal& s) {
  json rows = json::array();
  for (int i = 0; i < s.nodes(); ++i) rows.push_back(vector_to_json(s[i]));
  return rows;
}

inline json report_to_json(const SolverReport& r, const SolverConfig& cfg) {
  json j;
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["iterations"] = r.iterations;
  j["wall_time"] = r.wall_time;
  j["config"] = {{"ncp", to_string(cfg.ncp_kind)},   {"delta", cfg.effective_delta()},
                 {"tol", cfg.eps_t},                 {"max_iters", cfg.max_iters},
                 {"grid", cfg.n_intervals},          {"damping", to_string(cfg.damping)}};
  json hist = json::array();
  for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
    hist.push_back(residuals_to_json(static_cast<int>(k), r.residual_history[k]));
  }
  j["residual_history"] = hist;
  j["step_norm_history"] = r.step_norm_history;
  j["step_size_history"] = r.step_size_history;
  j["contraction_ratios"] = r.contraction_ratios;
  j["floor_value"] = r.floor_value ? json(*r.floor_value) : json(nullptr);
  j["warnings"] = r.warnings;
  const auto& z = r.final_iterate;
  if (z.x.nodes() > 0) {
    json t = json::array();
    for (int i = 0; i < z.grid().nodes(); ++i) t.push_back(z.grid().time(i));
    j["final_iterate"] = {{"t", t},
                          {"x", signal_to_json(z.x)},
                          {"u", signal_to_json(z.u)},
                          {"lam", signal_to_json(z.lam)},
                          {"mu", signal_to_json(z.mu)}};
  }
  return j;
}

/// Shortest-round-trip formatting is not needed; 17 significant digits
/// reproduce every double exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes via a temporary file in the same directory, then renames.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp);
    out << contents;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "rename to " + path.string() + " failed: " + ec.message());
}

inline std::string trajectory_csv(const Iterate& z) {
  std::ostringstream os;
  os << "t";
  for (int i = 0; i < z.x.dim(); ++i) os << ",x" << i + 1;
  for (int i = 0; i < z.u.dim(); ++i) os << ",u" << i + 1;
  for (int i = 0; i < z.lam.dim(); ++i) os << ",lam" << i + 1;
  for (int i = 0; i < z.mu.dim(); ++i) os << ",mu" << i + 1;
  os << "\n";
  for (int k = 0; k < z.grid().nodes(); ++k) {
    os << format_double(z.grid().time(k));
    for (const GridSignal* s : {&z.x, &z.u, &z.lam, &z.mu}) {
      for (int i = 0; i < s->dim(); ++i) os << ',' << format_double((*s)[k](i));
    }
    os << "\n";
  }
  return os.str();
}

inline std::string residuals_csv(const SolverReport& r) {
  std::ostringstream os;
  os << "iter,r4_sq,r5_sq,r6_sq,total\n";
  for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
    const auto& h = r.residual_history[k];
    os << k << ',' << format_double(h.r4_sq) << ',' << format_double(h.r5_sq) << ','
       << format_double(h.r6_sq) << ',' << format_double(h.total) << "\n";
  }
  return os.str();
}

/// Node values of P (row-major entries P11, P12, ...) and p.
inline std::string riccati_csv(const RiccatiSolution& ric) {
  const int n = ric.p.dim();
  std::ostringstream os;
  os << "t";
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) os << ",P" << i + 1 << "_" << k + 1;
  for (int i = 0; i < n; ++i) os << ",p" << i + 1;
  os << "\n";
  for (int j = 0; j < ric.P.nodes(); ++j) {
    os << format_double(ric.P.grid().time(j));
    const auto P = ric.P.matrix(j, n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) os << ',' << format_double(P(i, k));
    for (int i = 0; i < n; ++i) os << ',' << format_double(ric.p[j](i));
    os << "\n";
  }
  return os.str();
}

/// Parsed trajectory.csv: times plus the four signals (xdot is not stored).
struct TrajectoryTable {
  std::vector<double> t;
  Mat x, u, lam, mu;  // dim x nodes
};

inline TrajectoryTable parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "trajectory.csv: empty");
  int nx = 0, nu = 0, nl = 0, nm = 0;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("lam", 0) == 0) ++nl;
      else if (col.rfind("mu", 0) == 0) ++nm;
      else if (col.rfind("x", 0) == 0) ++nx;
      else if (col.rfind("u", 0) == 0) ++nu;
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) throw Error(ErrorCode::Io, "trajectory.csv: bad number '" + cell + "'");
      row.push_back(v);
    }
    if (static_cast<int>(row.size()) != 1 + nx + nu + nl + nm) {
      throw Error(ErrorCode::Io, "trajectory.csv: wrong column count");
    }
    rows.push_back(std::move(row));
  }
  const auto N = static_cast<Eigen::Index>(rows.size());
  TrajectoryTable tab;
  tab.x.resize(nx, N);
  tab.u.resize(nu, N);
  tab.lam.resize(nl, N);
  tab.mu.resize(nm, N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    tab.t.push_back(r[0]);
    int c = 1;
    for (int i = 0; i < nx; ++i) tab.x(i, k) = r[static_cast<std::size_t>(c++)];
    for (int i = 0; i < nu; ++i) tab.u(i, k) = r[static_cast<std::size_t>(c++)];
    for (int i = 0; i < nl; ++i) tab.lam(i, k) = r[static_cast<std::size_t>(c++)];
    for (int i = 0; i < nm; ++i) tab.mu(i, k) = r[static_cast<std::size_t>(c++)];
  }
  return tab;
}

}  // namespace ocsolve::io
