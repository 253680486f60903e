#include <gtest/gtest.h>

#include <cmath>

#include "ocsolve/grid.hpp"
#include "ocsolve/ode.hpp"
#include "support/generators.hpp"

using namespace ocsolve;

TEST(TimeGrid, NodesAreUniformAndEndExactly) {
  const TimeGrid g(0.0, 3.0, 7);
  EXPECT_EQ(g.nodes(), 8);
  EXPECT_DOUBLE_EQ(g.step(), 3.0 / 7.0);
  EXPECT_EQ(g.time(0), 0.0);
  EXPECT_EQ(g.time(7), 3.0);
  for (int i = 1; i < g.nodes(); ++i) EXPECT_GT(g.time(i), g.time(i - 1));
}

TEST(TimeGrid, RejectsEmptySpan) {
  EXPECT_THROW(TimeGrid(1.0, 1.0, 10), Error);
  EXPECT_THROW(TimeGrid(0.0, 1.0, 0), Error);
}

TEST(GridSignal, EvalIsLinearAndExactAtNodes) {
  const TimeGrid g(0.0, 1.0, 4);
  GridSignal s(g, 1);
  for (int i = 0; i < g.nodes(); ++i) s[i](0) = i * i;
  for (int i = 0; i < g.nodes(); ++i) EXPECT_EQ(s.eval(g.time(i))(0), i * i);
  EXPECT_NEAR(s.eval(0.125)(0), 0.5, 1e-15);
  EXPECT_NEAR(s.eval(0.6)(0), 4.0 + 0.4 * 5.0, 1e-12);
}

TEST(GridSignal, MidpointIsExactForCubics) {
  const TimeGrid g(0.0, 2.0, 10);
  GridSignal s(g, 1);
  auto f = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t - 0.3 * t * t * t; };
  for (int i = 0; i < g.nodes(); ++i) s[i](0) = f(g.time(i));
  for (int i = 0; i < g.intervals(); ++i) {
    EXPECT_NEAR(s.midpoint(i)(0), f(g.time(i) + 0.5 * g.step()), 1e-12) << "interval " << i;
  }
}

TEST(GridSignal, MatrixViewRoundTrips) {
  const TimeGrid g(0.0, 1.0, 2);
  GridSignal s(g, 6);
  Mat M(2, 3);
  M << 1, 2, 3, 4, 5, 6;
  s.matrix(1, 2, 3) = M;
  EXPECT_EQ(Mat(s.matrix(1, 2, 3)), M);
}

TEST(Integrate, ZeroDynamicsKeepsInitialValue) {
  const TimeGrid g(0.0, 5.0, 13);
  const Vec c = (Vec(3) << 1.0, -2.0, 0.5).finished();
  const auto s = integrate([](double, const Vec& y) -> Vec { return Vec::Zero(y.size()); }, c, g,
                           Direction::Forward);
  for (int i = 0; i < g.nodes(); ++i) EXPECT_EQ(Vec(s[i]), c);
}

TEST(Integrate, ExponentialGrowth) {
  const TimeGrid g(0.0, 1.0, 100);
  const auto s = integrate([](double, const Vec& y) -> Vec { return y; }, Vec::Ones(1), g,
                           Direction::Forward);
  EXPECT_NEAR(s[100](0), std::exp(1.0), 1e-8);
}

TEST(Integrate, BackwardScalarRiccatiGivesTanh) {
  const TimeGrid g(0.0, 2.0, 200);
  // dP/dt = -1 + P^2 backward from P(2) = 0 has P(t) = tanh(2 - t).
  const auto s = integrate([](double, const Vec& y) -> Vec { return Vec::Constant(1, -1.0 + y(0) * y(0)); },
                           Vec::Zero(1), g, Direction::Backward);
  EXPECT_EQ(s[200](0), 0.0);
  EXPECT_NEAR(s[0](0), std::tanh(2.0), 1e-8);
}

TEST(Integrate, FourthOrderConvergence) {
  auto err = [](int n) {
    const TimeGrid g(0.0, 1.0, n);
    const auto s = integrate([](double, const Vec& y) -> Vec { return y; }, Vec::Ones(1), g,
                             Direction::Forward);
    return std::abs(s[n](0) - std::exp(1.0));
  };
  for (int n : {5, 10, 20}) EXPECT_GE(err(n) / err(2 * n), 12.0) << "n = " << n;
}

TEST(Integrate, BackwardThenForwardRecoversInitialValue) {
  gen::Rng rng(11);
  const Mat A = rng.matrix(3, 3, 0.5);
  const Vec y0 = rng.vector(3);
  const TimeGrid g(0.0, 2.0, 400);
  auto rhs = [&](double, const Vec& y) -> Vec { return A * y; };
  const auto back = integrate(rhs, y0, g, Direction::Backward);
  const auto fwd = integrate(rhs, Vec(back[0]), g, Direction::Forward);
  EXPECT_LT((fwd[400] - y0).norm(), 1e-8);
}

TEST(Integrate, NonFiniteStateThrows) {
  const TimeGrid g(0.0, 1.0, 10);
  EXPECT_THROW(integrate([](double, const Vec& y) -> Vec { return Vec::Constant(y.size(), NAN); },
                         Vec::Ones(1), g, Direction::Forward),
               Error);
}

TEST(Quadrature, Basics) {
  EXPECT_EQ(quadrature_l2sq(GridSignal(TimeGrid(0.0, 4.0, 10), 1)), 0.0);
  EXPECT_NEAR(quadrature_l2sq(GridSignal::constant(TimeGrid(0.0, 4.0, 10), Vec::Ones(1))), 4.0, 1e-14);
  const TimeGrid g(0.0, 1.0, 1000);
  GridSignal t(g, 1);
  for (int i = 0; i < g.nodes(); ++i) t[i](0) = g.time(i);
  EXPECT_NEAR(quadrature_l2sq(t), 1.0 / 3.0, 1e-6);
}

TEST(QuadratureProperty, BoundedByHorizonTimesSupNormSquared) {
  gen::Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const double T = rng.uniform(0.1, 10.0);
    const TimeGrid g(0.0, T, rng.integer(2, 300));
    const auto f = gen::random_signal(rng, g, rng.integer(1, 4));
    const double sup = f.max_norm();
    EXPECT_LE(quadrature_l2sq(f), T * sup * sup * (1.0 + 1e-14)) << "trial " << trial;
  }
}

TEST(QuadratureProperty, Deterministic) {
  gen::Rng rng(5);
  const TimeGrid g(0.0, 3.0, 1000);
  const auto f = gen::random_signal(rng, g, 3);
  const double a = quadrature_l2sq(f);
  const double b = quadrature_l2sq(f);
  EXPECT_EQ(a, b);
}
