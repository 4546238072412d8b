#include "partshare/lattice.hpp"

#include <array>
#include <cstdio>

namespace partshare {
namespace {

std::int64_t isqrt(std::int64_t v) {
  std::int64_t r = 0;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

}  // namespace

LatticeHierarchy LatticeHierarchy::build(const Extent& base, const Rational& q,
                                         int num_levels) {
  if (q.num <= 0 || q.num >= q.den)
    throw InvalidScale("scale factor q must lie strictly inside (0,1), got " + q.str());
  if (num_levels < 1)
    throw InvalidScale("hierarchy needs at least one level above the base, got H=" +
                       std::to_string(num_levels));
  if (base.cols < 1 || base.rows < 1 || (base.kind == GridKind::OneD && base.rows != 1))
    throw NonDivisibleExtent("degenerate base extent");

  std::int64_t k = 0;
  if (base.kind == GridKind::OneD) {
    if (q.num != 1)
      throw NonDivisibleExtent("1-D subsampling needs q = 1/k, got q = " + q.str());
    k = q.den;
  } else {
    std::int64_t r = isqrt(q.den);
    if (q.num != 1 || r * r != q.den)
      throw NonDivisibleExtent("2-D subsampling needs q = 1/k^2, got q = " + q.str());
    k = r;
  }

  LatticeHierarchy lat;
  lat.base_ = base;
  lat.q_ = q;
  lat.H_ = num_levels;
  lat.k_ = k;
  lat.extents_.reserve(static_cast<std::size_t>(num_levels) + 1);
  lat.strides_.reserve(static_cast<std::size_t>(num_levels) + 1);
  Extent e = base;
  std::int64_t stride = 1;
  lat.extents_.push_back(e);
  lat.strides_.push_back(stride);
  for (int h = 1; h <= num_levels; ++h) {
    if (e.cols % k != 0 || (base.kind == GridKind::TwoD && e.rows % k != 0))
      throw NonDivisibleExtent("extent " + std::to_string(e.rows) + "x" +
                               std::to_string(e.cols) + " not divisible by k=" +
                               std::to_string(k) + " at level " + std::to_string(h));
    e.cols /= k;
    if (base.kind == GridKind::TwoD) e.rows /= k;
    stride *= k;
    lat.extents_.push_back(e);
    lat.strides_.push_back(stride);
  }
  return lat;
}

void LatticeHierarchy::check_level(int h) const {
  if (h < 0 || h > H_)
    throw IndexOutOfRange("level " + std::to_string(h) + " outside [0," +
                          std::to_string(H_) + "]");
}

const Extent& LatticeHierarchy::extent(int h) const {
  check_level(h);
  return extents_[static_cast<std::size_t>(h)];
}

std::int64_t LatticeHierarchy::cells(int h) const { return extent(h).cells(); }

std::int64_t LatticeHierarchy::stride_in_base(int h) const {
  check_level(h);
  return strides_[static_cast<std::size_t>(h)];
}

Coord LatticeHierarchy::cell_coord(int h, std::int64_t index) const {
  const Extent& e = extent(h);
  if (index < 0 || index >= e.cells())
    throw IndexOutOfRange("cell " + std::to_string(index) + " outside level " +
                          std::to_string(h) + " (" + std::to_string(e.cells()) + " cells)");
  return {index / e.cols, index % e.cols};
}

std::int64_t LatticeHierarchy::cell_index(int h, const Coord& c) const {
  const Extent& e = extent(h);
  if (c.row < 0 || c.row >= e.rows || c.col < 0 || c.col >= e.cols)
    throw IndexOutOfRange("coord outside level " + std::to_string(h));
  return c.row * e.cols + c.col;
}

Coord LatticeHierarchy::to_base_coords(int h, std::int64_t index) const {
  Coord c = cell_coord(h, index);
  const std::int64_t s = strides_[static_cast<std::size_t>(h)];
  return {c.row * s, c.col * s};
}

std::int64_t LatticeHierarchy::snap_to_level(const Coord& c, int h) const {
  check_level(h);
  const Extent& base = extents_[0];
  if (c.row < 0 || c.row >= base.rows || c.col < 0 || c.col >= base.cols)
    throw IndexOutOfRange("base coordinate outside D_0");
  const Extent& e = extents_[static_cast<std::size_t>(h)];
  const std::int64_t s = strides_[static_cast<std::size_t>(h)];

  // Per axis only the two bracketing multiples of the stride can be nearest;
  // enumerate the <=4 combinations exactly and break distance ties toward
  // the smaller row-major cell index.
  auto axis_candidates = [&](std::int64_t v, std::int64_t n) {
    std::array<std::int64_t, 2> cand{v / s, -1};
    if (cand[0] + 1 < n) cand[1] = cand[0] + 1;
    return cand;
  };
  auto rows = axis_candidates(c.row, e.rows);
  auto cols = axis_candidates(c.col, e.cols);

  std::int64_t best_index = -1;
  std::int64_t best_dist = -1;
  for (std::int64_t r : rows) {
    if (r < 0) continue;
    for (std::int64_t cc : cols) {
      if (cc < 0) continue;
      const std::int64_t dr = c.row - r * s;
      const std::int64_t dc = c.col - cc * s;
      const std::int64_t dist = dr * dr + dc * dc;
      const std::int64_t index = r * e.cols + cc;
      if (best_index < 0 || dist < best_dist ||
          (dist == best_dist && index < best_index)) {
        best_dist = dist;
        best_index = index;
      }
    }
  }
  return best_index;
}

Rational parse_rational(const std::string& text) {
  std::int64_t num = 0, den = 1;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%ld/%ld %c", &num, &den, &extra) == 2)
    return Rational(num, den);
  if (std::sscanf(text.c_str(), "%ld %c", &num, &extra) == 1)
    return Rational(num, 1);
  throw FormatError("expected rational like 1/4, got '" + text + "'");
}

}  // namespace partshare
