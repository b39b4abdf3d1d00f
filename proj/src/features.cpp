#include "bmp/features.hpp"

#include <cmath>

#include "bmp/pyramid.hpp"
#include "bmp/rng.hpp"

namespace bmp {

int feature_dim(int num_keypoints) { return 2 * num_keypoints + 3; }

VecX person_features(const PersonAnnotation& ann, ImageSize image, const FeatureNoise& noise) {
  ann.validate();
  Rng rng(noise.seed);
  const auto J = static_cast<int>(ann.keypoints2d.rows());
  const double s_px = compute_scale(ann.height, ann.width);
  VecX f = VecX::Zero(feature_dim(J));
  for (int k = 0; k < J; ++k) {
    // Draw unconditionally so slot k's noise never depends on other keypoints.
    const double nx = noise.keypoint_sigma_px * rng.normal();
    const double ny = noise.keypoint_sigma_px * rng.normal();
    if (!(ann.visibility[k] > 0.0)) continue;
    f[2 * k] = (ann.keypoints2d(k, 0) + nx - ann.center.x()) / s_px;
    f[2 * k + 1] = (ann.keypoints2d(k, 1) + ny - ann.center.y()) / s_px;
  }
  f[2 * J] = 2.0 * ann.center.x() / image.width - 1.0;
  f[2 * J + 1] = 2.0 * ann.center.y() / image.height - 1.0;
  f[2 * J + 2] = std::log(s_px / 100.0) + noise.scale_sigma * rng.normal();
  return f;
}

}  // namespace bmp
