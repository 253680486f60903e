#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ocsolve {

/// Complementarity function used to embed mu >= 0, -c >= 0, mu * c = 0.
enum class NcpKind { Min, FischerBurmeister };

[[nodiscard]] inline const char* to_string(NcpKind kind) {
  return kind == NcpKind::Min ? "min" : "fb";
}

[[nodiscard]] inline NcpKind parse_ncp_kind(std::string_view s) {
  if (s == "min") return NcpKind::Min;
  if (s == "fb" || s == "fischer-burmeister") return NcpKind::FischerBurmeister;
  throw std::invalid_argument("unknown NCP kind: " + std::string(s));
}

/// Regularization delta used when none is configured.
[[nodiscard]] inline double default_delta(NcpKind kind) {
  return kind == NcpKind::Min ? 1e-1 : 1e-2;
}

/// Element (eta, gamma) of the generalized Jacobian of phi(mu, -c), taken with
/// respect to (mu, c).
struct NcpJacobianElement {
  double eta = 0.0;
  double gamma = 0.0;
};

/// phi(mu, -c).
[[nodiscard]] inline double phi(NcpKind kind, double mu, double c) {
  const double b = -c;
  if (kind == NcpKind::Min) return std::min(mu, b);
  return mu + b - std::hypot(mu, b);
}

[[nodiscard]] inline NcpJacobianElement jacobian_element(NcpKind kind, double mu, double c) {
  if (kind == NcpKind::Min) {
    // The derivative follows whichever argument attains the min: mu (d/dmu = 1)
    // or -c (d/dc = -1). The kink uses the midpoint of the segment
    // {eta >= 0, gamma <= 0, eta - gamma = 1}.
    if (mu < -c) return {1.0, 0.0};
    if (mu > -c) return {0.0, -1.0};
    return {0.5, -0.5};
  }
  const double rho = std::hypot(mu, c);
  if (rho == 0.0) {
    // Symmetric point of the circle (1 - eta)^2 + (1 + gamma)^2 = 1.
    const double s = 1.0 - 1.0 / std::sqrt(2.0);
    return {s, -s};
  }
  return {1.0 - mu / rho, -1.0 - c / rho};
}

struct AlphaBeta {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Coefficients of the multiplier step mu~ = alpha + beta * (dc), obtained by
/// solving gamma * dc + eta * mu~ = -phi with eta regularized by delta > 0.
[[nodiscard]] inline AlphaBeta alpha_beta(double phi_value, NcpJacobianElement elem, double delta) {
  const double denom = elem.eta + delta;
  return {-phi_value / denom, -elem.gamma / denom};
}

}  // namespace ocsolve
