#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "ocsolve/care.hpp"
#include "ocsolve/problem.hpp"

namespace ocsolve {

[[nodiscard]] constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
[[nodiscard]] constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Scalar LQR: x' = u, l = 1/2 (x^2 + u^2), J = 1/2 terminal_weight x^2.
inline OcpProblem scalar_lqr_problem(double horizon = 1.0, double x0 = 1.0, double terminal_weight = 0.0) {
  OcpProblem prob;
  prob.name = "scalar-lqr";
  prob.A = Mat::Zero(1, 1);
  prob.B = Mat::Ones(1, 1);
  prob.x0 = Vec::Constant(1, x0);
  prob.horizon = horizon;
  prob.incremental = quadratic_incremental_cost(Mat::Ones(1, 1), Mat::Ones(1, 1));
  prob.terminal = quadratic_terminal_cost(Mat::Constant(1, 1, terminal_weight));
  prob.constraints = no_constraints(1, 1);
  prob.validate();
  return prob;
}

/// Double integrator with l = 1/2 (x'x + u^2), J = 1/2 x'x and, for finite
/// umax, the bounds -umax <= u <= umax.
inline OcpProblem double_integrator_problem(double umax, const Vec& x0, double horizon) {
  require(umax > 0.0, ErrorCode::InvalidArgument, "double_integrator_problem: umax must be > 0");
  require(x0.size() == 2, ErrorCode::DimensionMismatch, "double_integrator_problem: x0 must have length 2");
  OcpProblem prob;
  prob.name = "double-integrator";
  prob.A = Mat::Zero(2, 2);
  prob.A(0, 1) = 1.0;
  prob.B = Mat::Zero(2, 1);
  prob.B(1, 0) = 1.0;
  prob.x0 = x0;
  prob.horizon = horizon;
  prob.incremental = quadratic_incremental_cost(Mat::Identity(2, 2), Mat::Ones(1, 1));
  prob.terminal = quadratic_terminal_cost(Mat::Identity(2, 2));
  if (std::isfinite(umax)) {
    Mat C = Mat::Zero(2, 2);
    Mat D(2, 1);
    D << 1.0, -1.0;
    prob.constraints = affine_constraints(C, D, Vec::Constant(2, -umax));
  } else {
    prob.constraints = no_constraints(2, 1);
  }
  prob.validate();
  return prob;
}

/// Linear single-track vehicle model for an emergency lane change.
/// State (s, yaw, sideslip beta, yaw rate omega, steering angle delta_f),
/// input: steering rate. Angles in radians.
struct LaneChangeParams {
  double vx = 30.0;         // m/s
  double lf = 1.56;         // m
  double lr = 1.64;         // m
  double c_alpha = 246994;  // N/rad
  double mass = 2041.0;     // kg
  double izz = 4964.0;      // kg m^2
  double horizon = 4.0;     // s
  Vec q_diag = (Vec(5) << 1.0, 1.0, 0.0, 0.0, 0.0).finished();
  double r = 0.1;
  double slip_bound = deg2rad(8.0);
  double steer_bound = deg2rad(30.0);

  void validate() const {
    require(vx > 0 && lf > 0 && lr > 0 && c_alpha > 0 && mass > 0 && izz > 0 && horizon > 0 && r > 0 &&
                slip_bound > 0 && steer_bound > 0,
            ErrorCode::InvalidArgument, "LaneChangeParams: physical parameters must be positive");
    require(q_diag.size() == 5 && (q_diag.array() >= 0.0).all(), ErrorCode::InvalidArgument,
            "LaneChangeParams: q_diag must be 5 nonnegative weights");
  }
};

inline Mat lane_change_A(const LaneChangeParams& p) {
  const double ca = p.c_alpha;
  Mat A = Mat::Zero(5, 5);
  A(0, 1) = p.vx;
  A(0, 2) = p.vx;
  A(1, 3) = 1.0;
  A(2, 2) = -2.0 * ca / (p.mass * p.vx);
  A(2, 3) = ca * (p.lr - p.lf) / (p.mass * p.vx * p.vx) - 1.0;
  A(3, 2) = ca * (p.lr - p.lf) / p.izz;
  A(3, 3) = -ca * (p.lr * p.lr + p.lf * p.lf) / (p.izz * p.vx);
  return A;
}

inline Mat lane_change_B(const LaneChangeParams& p) {
  Mat B(5, 1);
  B << 0.0, 0.0, p.c_alpha / (p.mass * p.vx), p.c_alpha * p.lf / p.izz, 1.0;
  return B;
}

/// Constrained outputs (alpha_f, alpha_r, delta_f) in radians.
inline Vec lane_change_outputs(const LaneChangeParams& p, const Vec& x) {
  Vec y(3);
  y << x(4) - std::atan(x(2) + (p.lf / p.vx) * x(3)), -std::atan(x(2) - (p.lr / p.vx) * x(3)), x(4);
  return y;
}

/// Six scalar constraints: alpha_f <= b, -alpha_f <= b, alpha_r <= b,
/// -alpha_r <= b, delta_f <= bs, -delta_f <= bs. Only the state enters.
inline ConstraintSet lane_change_constraints(const LaneChangeParams& p) {
  const double a = p.lf / p.vx;
  const double b = p.lr / p.vx;
  const double slip = p.slip_bound;
  const double steer = p.steer_bound;

  ConstraintSet c;
  c.count = 6;
  c.value = [p, slip, steer](const Vec& x, const Vec&) -> Vec {
    const Vec y = lane_change_outputs(p, x);
    Vec out(6);
    out << y(0) - slip, -y(0) - slip, y(1) - slip, -y(1) - slip, y(2) - steer, -y(2) - steer;
    return out;
  };
  c.jacobian_x = [a, b](const Vec& x, const Vec&) -> Mat {
    const double wf = x(2) + a * x(3);
    const double wr = x(2) - b * x(3);
    const double df = 1.0 / (1.0 + wf * wf);
    const double dr = 1.0 / (1.0 + wr * wr);
    Mat J = Mat::Zero(6, 5);
    // alpha_f = delta_f - atan(wf)
    J(0, 2) = -df;
    J(0, 3) = -a * df;
    J(0, 4) = 1.0;
    // alpha_r = -atan(wr)
    J(2, 2) = -dr;
    J(2, 3) = b * dr;
    J(4, 4) = 1.0;
    J.row(1) = -J.row(0);
    J.row(3) = -J.row(2);
    J.row(5) = -J.row(4);
    return J;
  };
  c.jacobian_u = [](const Vec&, const Vec&) -> Mat { return Mat::Zero(6, 1); };
  c.hessian_xx = [a, b](const Vec& x, const Vec&, int i) -> Mat {
    Mat H = Mat::Zero(5, 5);
    if (i >= 4) return H;
    // d^2/dw^2 atan(w) = -2w / (1 + w^2)^2
    double sign = (i % 2 == 0) ? 1.0 : -1.0;
    Vec dir = Vec::Zero(5);
    double w = 0.0;
    if (i < 2) {
      w = x(2) + a * x(3);
      dir(2) = 1.0;
      dir(3) = a;
    } else {
      w = x(2) - b * x(3);
      dir(2) = 1.0;
      dir(3) = -b;
    }
    const double d2 = -2.0 * w / ((1.0 + w * w) * (1.0 + w * w));
    // both alpha_f and alpha_r carry -atan(.)
    H = (-sign * d2) * dir * dir.transpose();
    return H;
  };
  c.hessian_uu = [](const Vec&, const Vec&, int) -> Mat { return Mat::Zero(1, 1); };
  c.hessian_xu = [](const Vec&, const Vec&, int) -> Mat { return Mat::Zero(5, 1); };
  return c;
}

/// Lane-change benchmark: quadratic costs diag(q) / r, terminal weight from
/// the continuous ARE (or, with `dare_dt`, from the discrete ARE of the
/// zero-order-hold model with step dare_dt), x0 = (s0, 0, 0, 0, 0).
inline OcpProblem lane_change_problem(const LaneChangeParams& params, double s0,
                                      std::optional<double> dare_dt = std::nullopt) {
  params.validate();
  OcpProblem prob;
  prob.name = "lane-change";
  prob.A = lane_change_A(params);
  prob.B = lane_change_B(params);
  prob.x0 = Vec::Zero(5);
  prob.x0(0) = s0;
  prob.horizon = params.horizon;
  const Mat Q = params.q_diag.asDiagonal();
  const Mat R = Mat::Constant(1, 1, params.r);
  prob.incremental = quadratic_incremental_cost(Q, R);
  Mat P;
  if (dare_dt) {
    require(*dare_dt > 0.0, ErrorCode::InvalidArgument, "dare_dt must be > 0");
    const auto [Ad, Bd] = zoh_discretize(prob.A, prob.B, *dare_dt);
    P = solve_dare(Ad, Bd, Q * *dare_dt, R * *dare_dt);
  } else {
    P = solve_care(prob.A, prob.B, Q, R);
  }
  prob.terminal = quadratic_terminal_cost(P);
  prob.constraints = lane_change_constraints(params);
  prob.validate();
  return prob;
}

}  // namespace ocsolve
