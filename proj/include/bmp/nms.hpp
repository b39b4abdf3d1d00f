#pragma once

#include <vector>

#include "bmp/encoding.hpp"

namespace bmp {

// Greedy keypoint NMS. Detections are visited by descending score (ties keep
// input order); one is kept iff its OKS against every already-kept detection
// is below `oks_threshold`. OKS uses the kept detection's area and treats all
// projected keypoints as visible. Returns indices into `dets`, in visit order.
std::vector<std::size_t> keypoint_nms(const std::vector<Detection>& dets, const std::vector<Points2>& keypoints2d,
                                      const std::vector<double>& areas, double oks_threshold = 0.5);

}  // namespace bmp
