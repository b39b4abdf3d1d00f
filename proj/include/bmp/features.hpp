#pragma once

#include <cstdint>

#include "bmp/annotation.hpp"
#include "bmp/types.hpp"

namespace bmp {

struct FeatureNoise {
  double keypoint_sigma_px = 2.0;
  double scale_sigma = 0.02;  // on log apparent scale
  std::uint64_t seed = 0;
};

// 2J keypoint offsets from the center in units of the apparent scale
// (zero for invisible keypoints), the center in [-1, 1]², and the log
// apparent scale.
int feature_dim(int num_keypoints);

VecX person_features(const PersonAnnotation& ann, ImageSize image, const FeatureNoise& noise);

}  // namespace bmp
