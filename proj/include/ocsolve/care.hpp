#pragma once

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

#include "ocsolve/error.hpp"
#include "ocsolve/grid.hpp"

namespace ocsolve {

/// Residual A'P + PA - P B R^-1 B' P + Q of the continuous algebraic Riccati equation.
inline Mat care_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& P) {
  const Mat G = B * R.llt().solve(B.transpose());
  return A.transpose() * P + P * A - P * G * P + Q;
}

namespace detail {

// Solves F' X + X F = -W through its Kronecker form. A complete orthogonal
// decomposition returns the minimum-norm solution when F has eigenvalue pairs
// summing to zero.
inline Mat solve_lyapunov(const Mat& F, const Mat& W) {
  const auto n = F.rows();
  const Mat I = Mat::Identity(n, n);
  Mat K = Mat::Zero(n * n, n * n);
  // vec(F'X) = (I kron F') vec X, vec(XF) = (F' kron I) vec X
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += I(i, j) * F.transpose();
      K.block(i * n, j * n, n, n) += F(j, i) * I;
    }
  }
  const Vec rhs = -Eigen::Map<const Vec>(W.data(), W.size());
  const Vec x = K.completeOrthogonalDecomposition().solve(rhs);
  Mat X = Eigen::Map<const Mat>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

}  // namespace detail

namespace detail {

// Orthonormal basis of the observable subspace of (Q, A), i.e. the orthogonal
// complement of the largest A-invariant subspace inside ker Q.
inline Mat observable_basis(const Mat& A, const Mat& Q) {
  const auto n = A.rows();
  Mat O(n * n, n);
  Mat blk = Q;
  for (Eigen::Index k = 0; k < n; ++k) {
    O.middleRows(k * n, n) = blk;
    blk = blk * A;
  }
  Eigen::JacobiSVD<Mat> svd(O, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  return svd.matrixV().leftCols(rank);
}

inline Mat solve_care_reduced(const Mat& A, const Mat& B, const Mat& Q, const Eigen::LLT<Mat>& rllt,
                              double tol) {
  const auto n = A.rows();
  const Mat G = B * rllt.solve(B.transpose());
  const Mat R = rllt.reconstructedMatrix();

  // Seed: dP/dtau = Q + A'P + PA - PGP from P = 0 (tau = time-to-go).
  Mat P = Mat::Zero(n, n);
  auto f = [&](const Mat& X) -> Mat { return Q + A.transpose() * X + X * A - X * G * X; };
  double tau = 0.0;
  for (int it = 0; it < 200000 && tau < 1e4; ++it) {
    const double rate = 2.0 * A.norm() + G.norm() * (1.0 + P.norm()) + 1.0;
    const double h = 0.5 / rate;
    const Mat k1 = f(P);
    if (k1.norm() <= 1e-8 * (1.0 + P.norm())) break;
    const Mat k2 = f(P + 0.5 * h * k1);
    const Mat k3 = f(P + 0.5 * h * k2);
    const Mat k4 = f(P + h * k3);
    P += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    P = (0.5 * (P + P.transpose())).eval();
    tau += h;
    if (!P.allFinite()) throw Error(ErrorCode::AreSolveFailed, "solve_care: seed integration diverged");
  }

  for (int it = 0; it < 100; ++it) {
    const Mat res = care_residual(A, B, Q, R, P);
    if (res.norm() <= tol * std::max(1.0, P.norm())) return P;
    const Mat K = rllt.solve(B.transpose() * P);
    const Mat F = A - B * K;
    // Newton correction: F' D + D F = -res
    const Mat D = solve_lyapunov(F, res);
    P += D;
    P = (0.5 * (P + P.transpose())).eval();
    if (!P.allFinite()) break;
  }
  const Mat res = care_residual(A, B, Q, R, P);
  if (res.norm() <= tol * std::max(1.0, P.norm())) return P;
  throw Error(ErrorCode::AreSolveFailed,
              "solve_care: Newton-Kleinman did not converge, residual " + std::to_string(res.norm()));
}

}  // namespace detail

/// Minimal nonnegative solution of A'P + PA - P B R^-1 B' P + Q = 0.
///
/// Modes the cost never observes get zero weight: the equation is solved on
/// the observable subspace of (Q, A) and embedded back. There the solution is
/// seeded by integrating the Riccati differential equation from P = 0 and
/// refined by Newton-Kleinman steps until the Frobenius residual is below
/// tol * max(1, ||P||). Throws AreSolveFailed otherwise.
inline Mat solve_care(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, double tol = 1e-10) {
  const auto n = A.rows();
  require(A.cols() == n && B.rows() == n && Q.rows() == n && Q.cols() == n &&
              R.rows() == B.cols() && R.cols() == B.cols(),
          ErrorCode::DimensionMismatch, "solve_care: inconsistent shapes");
  Eigen::LLT<Mat> rllt(R);
  require(rllt.info() == Eigen::Success, ErrorCode::AreSolveFailed, "solve_care: R is not positive definite");
  const Mat V = detail::observable_basis(A, Q);
  if (V.cols() == 0) return Mat::Zero(n, n);
  const Mat Po = detail::solve_care_reduced(V.transpose() * A * V, V.transpose() * B,
                                            V.transpose() * Q * V, rllt, tol);
  Mat P = V * Po * V.transpose();
  P = (0.5 * (P + P.transpose())).eval();
  const Mat res = care_residual(A, B, Q, R, P);
  if (res.norm() <= 10.0 * tol * std::max(1.0, P.norm())) return P;
  throw Error(ErrorCode::AreSolveFailed,
              "solve_care: embedded solution has residual " + std::to_string(res.norm()));
}

/// Zero-order-hold discretization: Ad = exp(A dt), Bd = int_0^dt exp(A s) ds B.
inline std::pair<Mat, Mat> zoh_discretize(const Mat& A, const Mat& B, double dt) {
  const auto n = A.rows();
  const auto m = B.cols();
  Mat M = Mat::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = A * dt;
  M.topRightCorner(n, m) = B * dt;
  const Mat E = M.exp();
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

/// Residual Q + A'PA - A'PB (R + B'PB)^-1 B'PA - P of the discrete ARE.
inline Mat dare_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& P) {
  const Mat BtPA = B.transpose() * P * A;
  return Q + A.transpose() * P * A - BtPA.transpose() * (R + B.transpose() * P * B).llt().solve(BtPA) - P;
}

/// Discrete algebraic Riccati equation by the structure-preserving doubling
/// algorithm.
inline Mat solve_dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, double tol = 1e-10) {
  const auto n = A.rows();
  Eigen::LLT<Mat> rllt(R);
  require(rllt.info() == Eigen::Success, ErrorCode::AreSolveFailed, "solve_dare: R is not positive definite");
  Mat Ak = A;
  Mat Gk = B * rllt.solve(B.transpose());
  Mat Hk = Q;
  const Mat I = Mat::Identity(n, n);
  for (int it = 0; it < 200; ++it) {
    const Eigen::PartialPivLU<Mat> W(I + Gk * Hk);
    const Mat WA = W.solve(Ak);
    const Mat WG = W.solve(Gk);
    const Mat Hn = Hk + Ak.transpose() * Hk * WA;
    const Mat Gn = Gk + Ak * WG * Ak.transpose();
    const Mat An = Ak * WA;
    const double change = (Hn - Hk).norm();
    Hk = 0.5 * (Hn + Hn.transpose());
    Gk = 0.5 * (Gn + Gn.transpose());
    Ak = An;
    if (!Hk.allFinite()) break;
    if (change <= 1e-14 * std::max(1.0, Hk.norm())) break;
  }
  const Mat res = dare_residual(A, B, Q, R, Hk);
  if (Hk.allFinite() && res.norm() <= tol * std::max(1.0, Hk.norm())) return Hk;
  throw Error(ErrorCode::AreSolveFailed,
              "solve_dare: doubling did not converge, residual " + std::to_string(res.norm()));
}

}  // namespace ocsolve
