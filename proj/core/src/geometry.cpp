#include "alab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alab/errors.hpp"

namespace alab {

double LatticeCube::volume() const {
  return std::pow(2.0 * half_side_, axes());
}

std::vector<int> LatticeCube::multi_index(std::size_t index) const {
  std::vector<int> j(axes());
  for (int a = 0; a < axes(); ++a) j[a] = grid_index(index, a);
  return j;
}

std::size_t LatticeCube::linear_index(std::span<const int> multi) const {
  std::size_t index = 0;
  for (int a = 0; a < axes(); ++a) index += static_cast<std::size_t>(multi[a]) * strides_[a];
  return index;
}

std::vector<double> LatticeCube::point(std::size_t index) const {
  std::vector<double> x(axes());
  for (int a = 0; a < axes(); ++a) x[a] = coordinate(index, a);
  return x;
}

double LatticeCube::distance_from_center(std::size_t index) const noexcept {
  double r = 0.0;
  for (int a = 0; a < axes(); ++a) r = std::max(r, std::abs(offset(grid_index(index, a))));
  return r;
}

double LatticeCube::distance(std::size_t lhs, std::size_t rhs) const noexcept {
  int steps = 0;
  for (int a = 0; a < axes(); ++a) {
    steps = std::max(steps, std::abs(grid_index(lhs, a) - grid_index(rhs, a)));
  }
  return steps * spacing_;
}

std::optional<std::size_t> LatticeCube::find(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != axes()) return std::nullopt;
  std::size_t index = 0;
  for (int a = 0; a < axes(); ++a) {
    const double jf = (x[a] - center_[a] + half_side_) / spacing_ - 1.0;
    const double jr = std::round(jf);
    if (std::abs(jf - jr) > 1e-9 || jr < 0 || jr >= points_) return std::nullopt;
    index += static_cast<std::size_t>(jr) * strides_[a];
  }
  return index;
}

LatticeCube build_cube(int n, int d, std::vector<int> center, double half_side,
                       double spacing, double budget) {
  if (n < 1 || d < 1) throw DomainError("cube needs n >= 1 and d >= 1");
  if (static_cast<int>(center.size()) != n * d) {
    throw DomainError("cube center must have n*d coordinates");
  }
  if (!(half_side > 0.0) || !(spacing > 0.0)) {
    throw DomainError("cube half-side L and spacing h must be positive");
  }
  const double cells = 2.0 * half_side / spacing;
  const double cells_rounded = std::round(cells);
  if (std::abs(cells - cells_rounded) > 1e-9 * std::max(1.0, cells) ||
      cells_rounded < 2.0) {
    std::ostringstream msg;
    msg << "spacing h=" << spacing << " does not divide the cube side 2L="
        << 2.0 * half_side << " into at least two cells";
    throw DomainError(msg.str());
  }

  const int axes = n * d;
  const double estimate = axes * std::pow(cells_rounded, axes);
  if (estimate > budget) {
    std::ostringstream msg;
    msg << "cube grid for n*d = " << axes << " dimensions needs about "
        << estimate << " entries (n*d*(2L/h)^(n*d)), over the budget of " << budget;
    throw ResourceError(msg.str());
  }

  LatticeCube cube;
  cube.n_ = n;
  cube.d_ = d;
  cube.center_ = std::move(center);
  cube.half_side_ = half_side;
  cube.spacing_ = spacing;
  cube.points_ = static_cast<int>(cells_rounded) - 1;
  cube.strides_.assign(axes, 1);
  for (int a = axes - 1; a > 0; --a) {
    cube.strides_[a - 1] = cube.strides_[a] * static_cast<std::size_t>(cube.points_);
  }
  cube.size_ = cube.strides_[0] * static_cast<std::size_t>(cube.points_);
  return cube;
}

std::vector<std::size_t> mask_indices(const LatticeCube& cube, const RegionMask& mask) {
  std::vector<std::size_t> out;
  switch (mask.kind) {
    case RegionKind::Full:
      out.resize(cube.size());
      for (std::size_t i = 0; i < cube.size(); ++i) out[i] = i;
      return out;
    case RegionKind::Point:
      if (mask.point >= cube.size()) throw DomainError("point mask outside the cube grid");
      out.push_back(mask.point);
      return out;
    case RegionKind::Interior:
    case RegionKind::Outer:
      break;
  }
  if (!cube.has_regions()) {
    std::ostringstream msg;
    msg << "interior/outer regions need L > 3 to be disjoint (L = "
        << cube.half_side() << ")";
    throw DomainError(msg.str());
  }
  const double L = cube.half_side();
  for (std::size_t i = 0; i < cube.size(); ++i) {
    const double r = cube.distance_from_center(i);
    const bool keep = mask.kind == RegionKind::Interior ? r < L / 3.0 : r >= L - 2.0;
    if (keep) out.push_back(i);
  }
  return out;
}

}  // namespace alab
