#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace alab {

/// Default cap on n*d*(2L/h)^(n*d), the grid bookkeeping estimate.
inline constexpr double kDefaultCubeBudget = 2.0e8;

/// Discretized n-particle open cube C^(n)_L(u) = {x in R^(nd) : |x - u| < L}
/// in the max-norm. Grid points are u - L + j*h for j = 1 .. 2L/h - 1 on
/// every one of the n*d axes, so the Dirichlet boundary sits on |x - u| = L.
/// Axis k*d + a is coordinate a of particle k; axis 0 varies slowest.
class LatticeCube {
 public:
  int particles() const noexcept { return n_; }
  int dim() const noexcept { return d_; }
  int axes() const noexcept { return n_ * d_; }
  const std::vector<int>& center() const noexcept { return center_; }
  double half_side() const noexcept { return half_side_; }
  double spacing() const noexcept { return spacing_; }
  int points_per_axis() const noexcept { return points_; }
  std::size_t size() const noexcept { return size_; }

  /// Continuum volume (2L)^(nd).
  double volume() const;

  /// Interior and outer regions are disjoint only for L > 3.
  bool has_regions() const noexcept { return half_side_ > 3.0; }

  /// Offset of grid line j from the center along any axis.
  double offset(int j) const noexcept { return -half_side_ + (j + 1) * spacing_; }

  std::size_t stride(int axis) const noexcept { return strides_[axis]; }
  int grid_index(std::size_t index, int axis) const noexcept {
    return static_cast<int>((index / strides_[axis]) % static_cast<std::size_t>(points_));
  }
  std::vector<int> multi_index(std::size_t index) const;
  std::size_t linear_index(std::span<const int> multi) const;

  /// Absolute coordinate of a grid point along one axis.
  double coordinate(std::size_t index, int axis) const noexcept {
    return center_[axis] + offset(grid_index(index, axis));
  }
  std::vector<double> point(std::size_t index) const;

  /// Max-norm distance |x - u| from the cube center.
  double distance_from_center(std::size_t index) const noexcept;
  /// Max-norm distance between two grid points.
  double distance(std::size_t a, std::size_t b) const noexcept;

  /// Index of the grid point at absolute coordinates x, if any.
  std::optional<std::size_t> find(std::span<const double> x) const;

 private:
  friend LatticeCube build_cube(int, int, std::vector<int>, double, double, double);

  int n_ = 1;
  int d_ = 1;
  std::vector<int> center_;
  double half_side_ = 0.0;
  double spacing_ = 1.0;
  int points_ = 0;
  std::size_t size_ = 0;
  std::vector<std::size_t> strides_;
};

/// Builds the cube grid. Requires 2L/h to be an integer >= 2 and
/// n*d*(2L/h)^(n*d) <= budget (ResourceError otherwise).
LatticeCube build_cube(int n, int d, std::vector<int> center, double half_side,
                       double spacing, double budget = kDefaultCubeBudget);

enum class RegionKind { Interior, Outer, Point, Full };

/// Selector for a characteristic function on the cube grid.
struct RegionMask {
  RegionKind kind = RegionKind::Full;
  std::size_t point = 0;

  static RegionMask interior() { return {RegionKind::Interior, 0}; }
  static RegionMask outer() { return {RegionKind::Outer, 0}; }
  static RegionMask full() { return {RegionKind::Full, 0}; }
  static RegionMask at(std::size_t index) { return {RegionKind::Point, index}; }
};

/// Sorted grid indices selected by the mask. Interior is |x - u| < L/3,
/// outer is L - 2 <= |x - u| < L; both need L > 3 (DomainError otherwise).
std::vector<std::size_t> mask_indices(const LatticeCube& cube, const RegionMask& mask);

}  // namespace alab
