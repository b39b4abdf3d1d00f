#include "bmp/pyramid.hpp"

#include <algorithm>
#include <cmath>

#include "bmp/error.hpp"

namespace bmp {

PyramidConfig PyramidConfig::standard() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  PyramidConfig c;
  c.levels = {
      {8, 40, 0.0, 64.0},
      {8, 36, 32.0, 128.0},
      {16, 24, 64.0, 256.0},
      {32, 16, 128.0, 512.0},
      {32, 12, 256.0, inf},
  };
  c.epsilon = 0.2;
  return c;
}

void PyramidConfig::validate() const {
  if (levels.empty()) fail(ErrorCode::InvalidConfig, "pyramid needs at least one level");
  if (!(epsilon >= 0.0) || epsilon > 1.0) fail(ErrorCode::InvalidConfig, "epsilon must lie in [0, 1]");
  if (levels.front().scale_lo > 0.0) fail(ErrorCode::InvalidConfig, "scale ranges must start at 0");
  if (levels.back().scale_hi != std::numeric_limits<double>::infinity())
    fail(ErrorCode::InvalidConfig, "last scale range must be unbounded");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto& l = levels[k];
    if (l.grid <= 0 || l.stride <= 0) fail(ErrorCode::InvalidConfig, "grid and stride must be positive");
    if (!(l.scale_lo < l.scale_hi)) fail(ErrorCode::InvalidConfig, "empty scale range");
    if (k > 0) {
      const auto& prev = levels[k - 1];
      if (l.stride < prev.stride) fail(ErrorCode::InvalidConfig, "strides must be non-decreasing");
      if (l.scale_lo > prev.scale_hi) fail(ErrorCode::InvalidConfig, "scale ranges leave a gap");
      if (l.scale_lo < prev.scale_lo || l.scale_hi < prev.scale_hi)
        fail(ErrorCode::InvalidConfig, "scale ranges must be ordered");
      if (k > 1 && l.scale_lo < levels[k - 2].scale_hi)
        fail(ErrorCode::InvalidConfig, "a scale may fall in at most two adjacent ranges");
    }
  }
}

double compute_scale(double h, double w) {
  if (!(h > 0.0) || !(w > 0.0)) fail(ErrorCode::NonPositiveSize, "body size must be positive");
  return std::sqrt(h * w);
}

std::vector<int> assign_levels(double s, const PyramidConfig& config) {
  if (!(s > 0.0)) fail(ErrorCode::NonPositiveScale, "instance scale must be positive");
  std::vector<int> out;
  for (int k = 0; k < config.num_levels(); ++k) {
    const auto& l = config.levels[static_cast<std::size_t>(k)];
    if (s >= l.scale_lo && s < l.scale_hi) out.push_back(k);
  }
  return out;
}

Cell cell_of(const Vec2& point, ImageSize image, int grid) {
  const auto index = [grid](double coord, int extent) {
    const double f = std::floor(coord * grid / extent);
    if (!(f >= 0.0)) return 0;  // also maps NaN to 0
    return f >= grid - 1 ? grid - 1 : static_cast<int>(f);
  };
  return {index(point.x(), image.width), index(point.y(), image.height)};
}

}  // namespace bmp
