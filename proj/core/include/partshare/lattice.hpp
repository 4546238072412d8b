#pragma once

#include <cstdint>
#include <vector>

#include "partshare/rational.hpp"

namespace partshare {

enum class GridKind { OneD, TwoD };

/// Image-grid coordinate at the base level. 1-D grids keep row == 0.
struct Coord {
  std::int64_t row = 0;
  std::int64_t col = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
  friend auto operator<=>(const Coord&, const Coord&) = default;  // row-major
};

/// Grid shape. 1-D grids are a single row of `cols` cells.
struct Extent {
  GridKind kind = GridKind::OneD;
  std::int64_t rows = 1;
  std::int64_t cols = 0;

  static Extent line(std::int64_t n) { return {GridKind::OneD, 1, n}; }
  static Extent grid(std::int64_t r, std::int64_t c) { return {GridKind::TwoD, r, c}; }
  std::int64_t cells() const { return rows * cols; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// Nested multi-scale lattices D_0..D_H. Level h keeps every k-th point of
/// level h-1 on each axis, anchored at offset 0, so |D_h| = q^h * |D_0|
/// exactly. q must be 1/k for 1-D grids and 1/k^2 for 2-D grids, with k^H
/// dividing every axis of the base extent.
class LatticeHierarchy {
 public:
  /// Throws InvalidScale (q outside (0,1) or H < 1) and NonDivisibleExtent
  /// (q incompatible with the grid kind, or extent not divisible H times).
  static LatticeHierarchy build(const Extent& base, const Rational& q, int num_levels);

  int levels() const { return H_; }                    // H
  Rational scale_factor() const { return q_; }
  GridKind kind() const { return base_.kind; }
  std::int64_t axis_stride() const { return k_; }      // per-level subsample step
  const Extent& extent(int h) const;                   // level-h grid shape
  std::int64_t cells(int h) const;                     // |D_h|
  std::int64_t stride_in_base(int h) const;            // k^h

  /// Representative D_0 coordinate of a level-h cell.
  Coord to_base_coords(int h, std::int64_t index) const;

  /// Nearest level-h cell to a D_0 coordinate (Euclidean for 2-D, absolute
  /// for 1-D); exact integer arithmetic; ties go to the smaller cell index
  /// in row-major order.
  std::int64_t snap_to_level(const Coord& c, int h) const;

  /// Row-major (row, col) of a level-h cell inside the level-h grid.
  Coord cell_coord(int h, std::int64_t index) const;
  std::int64_t cell_index(int h, const Coord& level_coord) const;

 private:
  LatticeHierarchy() = default;
  void check_level(int h) const;

  Extent base_;
  Rational q_;
  int H_ = 0;
  std::int64_t k_ = 1;
  std::vector<Extent> extents_;   // [0..H]
  std::vector<std::int64_t> strides_;  // k^h
};

}  // namespace partshare
