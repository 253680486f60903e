#pragma once

// Shared setup for the constrained double-integrator comparisons against the
// transcription oracle.

#include <algorithm>

#include "ocsolve/ocsolve.hpp"
#include "oracle/transcription_qp.hpp"

namespace di {

inline constexpr double kUmax = 0.5;
inline constexpr double kHorizon = 5.0;

inline ocsolve::Vec x0() { return (ocsolve::Vec(2) << 1.0, 0.0).finished(); }

inline ocsolve::OcpProblem problem() { return ocsolve::double_integrator_problem(kUmax, x0(), kHorizon); }

inline oracle::TranscriptionSolution oracle_solution(int intervals) {
  oracle::BoxLqInstance in;
  in.A = ocsolve::Mat::Zero(2, 2);
  in.A(0, 1) = 1.0;
  in.B = ocsolve::Mat::Zero(2, 1);
  in.B(1, 0) = 1.0;
  in.Q = ocsolve::Mat::Identity(2, 2);
  in.R = ocsolve::Mat::Ones(1, 1);
  in.P_terminal = ocsolve::Mat::Identity(2, 2);
  in.x0 = x0();
  in.horizon = kHorizon;
  in.intervals = intervals;
  in.umax = kUmax;
  return oracle::solve_box_lq(in);
}

/// Primal-dual iterate built from the oracle primal solution: the costate by
/// backward integration of -lam' = x + A'lam from lam(T) = x(T), multipliers
/// from stationarity u + B'lam + mu_1 - mu_2 = 0 split by sign.
inline ocsolve::Iterate iterate_from_oracle(const ocsolve::OcpProblem& prob,
                                            const oracle::TranscriptionSolution& sol) {
  using namespace ocsolve;
  const int N = static_cast<int>(sol.x.cols()) - 1;
  const TimeGrid g(0.0, kHorizon, N);
  GridSignal x(g, sol.x);
  GridSignal u(g, sol.u);
  const Vec lamT = prob.terminal.gradient(x[N]);
  GridSignal lam = integrate(
      [&](double t, const Vec& l) -> Vec { return -(x.eval(t) + prob.A.transpose() * l); }, lamT, g,
      Direction::Backward);
  GridSignal mu(g, 2);
  for (int i = 0; i <= N; ++i) {
    const double s = u[i](0) + lam[i](1);
    mu[i](0) = std::max(0.0, -s);
    mu[i](1) = std::max(0.0, s);
  }
  return make_iterate(std::move(x), std::move(u), std::move(lam), std::move(mu));
}

}  // namespace di
