#pragma once

#include "bmp/types.hpp"

namespace bmp {

// Weak-perspective camera π = (s, t_x, t_y) in normalized image units.
struct CameraParams {
  double scale = 1.0;
  double tx = 0.0;
  double ty = 0.0;

  bool operator==(const CameraParams&) const = default;
};

struct CameraGlobals {
  double focal = 1000.0;     // px
  double long_edge = 832.0;  // px, α

  void validate() const;
};

// u = s(x + t_x), v = s(y + t_y); pixel = ((u+1)/2 W, (v+1)/2 H). z is ignored.
Points2 project_weak_perspective(const Points3& joints, const CameraParams& cam, ImageSize image);

struct ProjectionGradient {
  Points3 joints;
  CameraParams camera{0.0, 0.0, 0.0};  // dL/ds, dL/dt_x, dL/dt_y
};

// Reverse-mode pass of project_weak_perspective given dL/dpixels.
ProjectionGradient project_weak_perspective_backward(const Points3& joints, const CameraParams& cam, ImageSize image,
                                                     const Points2& grad_pixels);

// z = 2f / (s α)
double depth_from_camera(const CameraParams& cam, const CameraGlobals& globals);
// dz/ds
double depth_from_camera_derivative(const CameraParams& cam, const CameraGlobals& globals);

// The scale whose recovered depth is `depth`. The result is nudged by a few
// ulps (relative change below 1e-11) so that depth_from_camera(s)·s·α
// reproduces 2f bit-exactly. Some (f, α) admit no such s; the scale is then
// returned unchanged.
double scale_from_depth(double depth, const CameraGlobals& globals);
double snap_scale_for_depth_identity(double scale, const CameraGlobals& globals);

// Camera with the given scale whose projection puts `root` at pixel `center`.
CameraParams camera_at(const Vec2& center, double scale, ImageSize image, const Vec3& root = Vec3::Zero());

// Camera whose projection places a body of 3D extent `body_extent` (meters)
// with apparent horizontal size `s_px` at `center`.
CameraParams camera_for_person(const Vec2& center, double s_px, ImageSize image, double body_extent = 1.0,
                               const Vec3& root = Vec3::Zero());

}  // namespace bmp
