#include "bmp/camera.hpp"

#include <cmath>

#include "bmp/error.hpp"

namespace bmp {

namespace {

void require_positive_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::NonPositiveScale, "camera scale must be positive, got " + std::to_string(s));
}

bool depth_identity_holds(double scale, const CameraGlobals& g) {
  const double z = 2.0 * g.focal / (scale * g.long_edge);
  return z * scale * g.long_edge == 2.0 * g.focal;
}

}  // namespace

void CameraGlobals::validate() const {
  if (!(focal > 0.0) || !(long_edge > 0.0)) fail(ErrorCode::InvalidConfig, "focal and long edge must be positive");
}

Points2 project_weak_perspective(const Points3& joints, const CameraParams& cam, ImageSize image) {
  require_positive_scale(cam.scale);
  Points2 out(joints.rows(), 2);
  for (Eigen::Index k = 0; k < joints.rows(); ++k) {
    const double u = cam.scale * (joints(k, 0) + cam.tx);
    const double v = cam.scale * (joints(k, 1) + cam.ty);
    out(k, 0) = (u + 1.0) * 0.5 * image.width;
    out(k, 1) = (v + 1.0) * 0.5 * image.height;
  }
  return out;
}

ProjectionGradient project_weak_perspective_backward(const Points3& joints, const CameraParams& cam, ImageSize image,
                                                     const Points2& grad_pixels) {
  require_positive_scale(cam.scale);
  ProjectionGradient g;
  g.joints = Points3::Zero(joints.rows(), 3);
  const double hw = 0.5 * image.width;
  const double hh = 0.5 * image.height;
  for (Eigen::Index k = 0; k < joints.rows(); ++k) {
    const double gu = grad_pixels(k, 0) * hw;
    const double gv = grad_pixels(k, 1) * hh;
    g.joints(k, 0) = gu * cam.scale;
    g.joints(k, 1) = gv * cam.scale;
    g.camera.tx += gu * cam.scale;
    g.camera.ty += gv * cam.scale;
    g.camera.scale += gu * (joints(k, 0) + cam.tx) + gv * (joints(k, 1) + cam.ty);
  }
  return g;
}

double depth_from_camera(const CameraParams& cam, const CameraGlobals& globals) {
  require_positive_scale(cam.scale);
  return 2.0 * globals.focal / (cam.scale * globals.long_edge);
}

double depth_from_camera_derivative(const CameraParams& cam, const CameraGlobals& globals) {
  require_positive_scale(cam.scale);
  return -2.0 * globals.focal / (cam.scale * cam.scale * globals.long_edge);
}

double snap_scale_for_depth_identity(double scale, const CameraGlobals& globals) {
  require_positive_scale(scale);
  double lo = scale;
  double hi = scale;
  for (int step = 0; step < (1 << 14); ++step) {
    if (depth_identity_holds(lo, globals)) return lo;
    if (depth_identity_holds(hi, globals)) return hi;
    lo = std::nextafter(lo, 0.0);
    hi = std::nextafter(hi, INFINITY);
  }
  return scale;
}

double scale_from_depth(double depth, const CameraGlobals& globals) {
  if (!(depth > 0.0)) fail(ErrorCode::NonPositiveSize, "depth must be positive");
  return snap_scale_for_depth_identity(2.0 * globals.focal / (depth * globals.long_edge), globals);
}

CameraParams camera_at(const Vec2& center, double scale, ImageSize image, const Vec3& root) {
  require_positive_scale(scale);
  CameraParams cam;
  cam.scale = scale;
  cam.tx = (2.0 * center.x() / image.width - 1.0) / scale - root.x();
  cam.ty = (2.0 * center.y() / image.height - 1.0) / scale - root.y();
  return cam;
}

CameraParams camera_for_person(const Vec2& center, double s_px, ImageSize image, double body_extent, const Vec3& root) {
  if (!(s_px > 0.0)) fail(ErrorCode::NonPositiveScale, "apparent person scale must be positive");
  if (!(body_extent > 0.0)) fail(ErrorCode::NonPositiveScale, "body extent must be positive");
  return camera_at(center, 2.0 * s_px / (image.width * body_extent), image, root);
}

}  // namespace bmp
