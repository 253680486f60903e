#pragma once

#include <functional>
#include <string>

#include "ocsolve/grid.hpp"

namespace ocsolve {

enum class Direction { Forward, Backward };

/// Classical fixed-step RK4 over `grid`. Forward integration starts from
/// y_init at the first node; backward integration starts at the last node and
/// steps with -h. Either way node i of the result holds the value at time t_i.
///
/// `post_step(y)` runs after every completed step (e.g. to re-symmetrize a
/// stacked matrix state). Throws Error(NonFiniteState) on any non-finite stage.
template <class Rhs, class PostStep>
GridSignal integrate(Rhs&& rhs, const Vec& y_init, const TimeGrid& grid, Direction direction,
                     PostStep&& post_step) {
  require(y_init.allFinite(), ErrorCode::NonFiniteState, "integrate: non-finite initial value");
  const int n = grid.intervals();
  const double h = grid.step();
  GridSignal out(grid, static_cast<int>(y_init.size()));

  auto check = [](const Vec& v, double t) {
    if (!v.allFinite()) {
      throw Error(ErrorCode::NonFiniteState, "integrate: non-finite value at t=" + std::to_string(t));
    }
  };

  Vec y = y_init;
  if (direction == Direction::Forward) {
    out[0] = y;
    for (int i = 0; i < n; ++i) {
      const double ta = grid.time(i);
      const double tb = grid.time(i + 1);
      const double tm = ta + 0.5 * h;
      const Vec k1 = rhs(ta, y);
      check(k1, ta);
      const Vec k2 = rhs(tm, Vec(y + 0.5 * h * k1));
      check(k2, tm);
      const Vec k3 = rhs(tm, Vec(y + 0.5 * h * k2));
      check(k3, tm);
      const Vec k4 = rhs(tb, Vec(y + h * k3));
      check(k4, tb);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      post_step(y);
      check(y, tb);
      out[i + 1] = y;
    }
  } else {
    out[n] = y;
    for (int i = n; i > 0; --i) {
      const double ta = grid.time(i);
      const double tb = grid.time(i - 1);
      const double tm = ta - 0.5 * h;
      const Vec k1 = rhs(ta, y);
      check(k1, ta);
      const Vec k2 = rhs(tm, Vec(y - 0.5 * h * k1));
      check(k2, tm);
      const Vec k3 = rhs(tm, Vec(y - 0.5 * h * k2));
      check(k3, tm);
      const Vec k4 = rhs(tb, Vec(y - h * k3));
      check(k4, tb);
      y -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      post_step(y);
      check(y, tb);
      out[i - 1] = y;
    }
  }
  return out;
}

template <class Rhs>
GridSignal integrate(Rhs&& rhs, const Vec& y_init, const TimeGrid& grid, Direction direction) {
  return integrate(std::forward<Rhs>(rhs), y_init, grid, direction, [](Vec&) {});
}

/// Composite trapezoidal rule for the integral of ||f(t)||^2 over the grid span.
/// Summation runs in node order, so the result is reproducible bit for bit.
[[nodiscard]] inline double quadrature_l2sq(const GridSignal& f) {
  require(f.all_finite(), ErrorCode::NonFiniteState, "quadrature_l2sq: non-finite signal");
  const int n = f.grid().intervals();
  if (f.dim() == 0) return 0.0;
  double sum = 0.5 * (f[0].squaredNorm() + f[n].squaredNorm());
  for (int i = 1; i < n; ++i) sum += f[i].squaredNorm();
  return sum * f.grid().step();
}

}  // namespace ocsolve
