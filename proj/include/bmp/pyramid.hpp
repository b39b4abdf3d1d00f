#pragma once

#include <limits>
#include <vector>

#include "bmp/types.hpp"

namespace bmp {

struct PyramidLevel {
  int stride = 8;
  int grid = 40;
  double scale_lo = 0.0;                                     // inclusive, px
  double scale_hi = std::numeric_limits<double>::infinity();  // exclusive, px
};

struct PyramidConfig {
  std::vector<PyramidLevel> levels;
  double epsilon = 0.2;

  // Five FPN levels P2..P6: strides 8,8,16,32,32; grids 40,36,24,16,12;
  // scale ranges <64, 32-128, 64-256, 128-512, >=256.
  static PyramidConfig standard();

  int num_levels() const { return static_cast<int>(levels.size()); }
  // Throws InvalidConfig.
  void validate() const;
};

// s = sqrt(h w); throws NonPositiveSize.
double compute_scale(double h, double w);

// Levels whose [scale_lo, scale_hi) contains s, in increasing index order.
std::vector<int> assign_levels(double s, const PyramidConfig& config);

struct Cell {
  int i = 0;  // column, from x
  int j = 0;  // row, from y

  auto operator<=>(const Cell&) const = default;
};

// i = clamp(floor(x G / W), 0, G-1), j = clamp(floor(y G / H), 0, G-1)
Cell cell_of(const Vec2& point, ImageSize image, int grid);

}  // namespace bmp
