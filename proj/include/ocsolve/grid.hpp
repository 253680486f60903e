#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "ocsolve/error.hpp"

namespace ocsolve {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Uniform partition of [t_start, t_end] into n_intervals steps.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double t_start, double t_end, int n_intervals)
      : t_start_(t_start), t_end_(t_end), n_(n_intervals) {
    require(std::isfinite(t_start) && std::isfinite(t_end) && t_end > t_start,
            ErrorCode::InvalidArgument, "TimeGrid requires t_end > t_start");
    require(n_intervals > 0, ErrorCode::InvalidArgument, "TimeGrid requires n_intervals > 0");
  }

  [[nodiscard]] double t_start() const noexcept { return t_start_; }
  [[nodiscard]] double t_end() const noexcept { return t_end_; }
  [[nodiscard]] int intervals() const noexcept { return n_; }
  [[nodiscard]] int nodes() const noexcept { return n_ + 1; }
  [[nodiscard]] double span() const noexcept { return t_end_ - t_start_; }
  [[nodiscard]] double step() const noexcept { return span() / n_; }

  [[nodiscard]] double time(int i) const noexcept {
    // The last node is pinned so the span is reproduced exactly.
    return i == n_ ? t_end_ : t_start_ + i * step();
  }

  /// Grid with every interval split in two; node 2i coincides with node i here.
  [[nodiscard]] TimeGrid refined() const { return {t_start_, t_end_, 2 * n_}; }

  /// Index of the nearest half-node (nodes and interval midpoints), in [0, 2n].
  [[nodiscard]] int half_index(double t) const noexcept {
    const auto k = static_cast<int>(std::lround(2.0 * (t - t_start_) / step()));
    return std::clamp(k, 0, 2 * n_);
  }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.t_start_ == b.t_start_ && a.t_end_ == b.t_end_ && a.n_ == b.n_;
  }

 private:
  double t_start_ = 0.0;
  double t_end_ = 1.0;
  int n_ = 1;
};

/// Vector- (or flattened matrix-) valued function of time stored at the nodes
/// of a TimeGrid. Values are columns of a dim x nodes matrix; matrices are
/// flattened column-major.
class GridSignal {
 public:
  GridSignal() = default;
  GridSignal(TimeGrid grid, int dim) : grid_(grid), values_(Mat::Zero(dim, grid.nodes())) {}
  GridSignal(TimeGrid grid, Mat values) : grid_(grid), values_(std::move(values)) {
    require(values_.cols() == grid_.nodes(), ErrorCode::DimensionMismatch,
            "GridSignal value columns must equal the grid node count");
  }

  static GridSignal constant(TimeGrid grid, const Vec& value) {
    GridSignal s(grid, static_cast<int>(value.size()));
    s.values_.colwise() = value;
    return s;
  }

  [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(values_.rows()); }
  [[nodiscard]] int nodes() const noexcept { return static_cast<int>(values_.cols()); }

  [[nodiscard]] auto operator[](int i) const { return values_.col(i); }
  [[nodiscard]] auto operator[](int i) { return values_.col(i); }

  [[nodiscard]] const Mat& values() const noexcept { return values_; }
  [[nodiscard]] Mat& values() noexcept { return values_; }

  /// View of node i reshaped as a rows x cols matrix.
  [[nodiscard]] Eigen::Map<const Mat> matrix(int i, int rows, int cols) const {
    return {values_.col(i).data(), rows, cols};
  }
  [[nodiscard]] Eigen::Map<Mat> matrix(int i, int rows, int cols) {
    return {values_.col(i).data(), rows, cols};
  }

  /// Linear interpolation; exact at nodes, clamped outside the span.
  [[nodiscard]] Vec eval(double t) const {
    const double h = grid_.step();
    const double s = (t - grid_.t_start()) / h;
    if (s <= 0.0) return values_.col(0);
    if (s >= grid_.intervals()) return values_.col(grid_.intervals());
    const int i = static_cast<int>(std::floor(s));
    const double w = s - i;
    if (w == 0.0) return values_.col(i);
    return (1.0 - w) * values_.col(i) + w * values_.col(i + 1);
  }

  /// Four-point cubic estimate of the value halfway between nodes i and i+1.
  /// The stencil is shifted inward at the ends of the grid.
  [[nodiscard]] Vec midpoint(int i) const {
    const int last = grid_.intervals();
    if (last < 3) return 0.5 * (values_.col(i) + values_.col(i + 1));
    if (i == 0) {
      return (5.0 * values_.col(0) + 15.0 * values_.col(1) - 5.0 * values_.col(2) +
              values_.col(3)) / 16.0;
    }
    if (i == last - 1) {
      return (5.0 * values_.col(last) + 15.0 * values_.col(last - 1) -
              5.0 * values_.col(last - 2) + values_.col(last - 3)) / 16.0;
    }
    return (-values_.col(i - 1) + 9.0 * values_.col(i) + 9.0 * values_.col(i + 1) -
            values_.col(i + 2)) / 16.0;
  }

  /// Value at half-node k of the refined grid (even k: node k/2; odd k: midpoint).
  [[nodiscard]] Vec half(int k) const {
    return (k % 2 == 0) ? Vec(values_.col(k / 2)) : midpoint(k / 2);
  }

  [[nodiscard]] bool all_finite() const { return values_.allFinite(); }

  /// max over nodes of the Euclidean norm of the node value.
  [[nodiscard]] double max_norm() const {
    return values_.cols() == 0 || values_.rows() == 0 ? 0.0
                                                      : values_.colwise().norm().maxCoeff();
  }

 private:
  TimeGrid grid_;
  Mat values_;
};

inline void require_same_grid(const GridSignal& a, const GridSignal& b, const std::string& what) {
  require(a.grid() == b.grid() && a.dim() == b.dim(), ErrorCode::DimensionMismatch, what);
}

}  // namespace ocsolve
