#pragma once

#include <optional>

#include "bmp/camera.hpp"
#include "bmp/types.hpp"

namespace bmp {

// One ground-truth person.
struct PersonAnnotation {
  Vec2 center = Vec2::Zero();  // pelvis, px
  double height = 0.0;         // px
  double width = 0.0;          // px
  VecX pose6d;                 // Jm*6
  VecX beta;
  double depth = 0.0;          // m
  Points2 keypoints2d;         // J×2 px
  VecX visibility;             // J, > 0 means visible
  Points3 keypoints3d;         // J×3 m
  // Present for synthetic persons whose generating camera is known.
  std::optional<CameraParams> camera;

  // Throws NonPositiveSize / DimensionMismatch.
  void validate() const;
  double area() const { return height * width; }
};

struct Rect {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;

  double x_lo() const { return cx - 0.5 * width; }
  double x_hi() const { return cx + 0.5 * width; }
  double y_lo() const { return cy - 0.5 * height; }
  double y_hi() const { return cy + 0.5 * height; }
};

// (x^c, y^c, εw, εh)
Rect central_region(const PersonAnnotation& ann, double epsilon);

}  // namespace bmp
