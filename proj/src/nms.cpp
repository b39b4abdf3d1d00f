#include "bmp/nms.hpp"

#include <algorithm>
#include <numeric>

#include "bmp/error.hpp"
#include "bmp/metrics.hpp"

namespace bmp {

std::vector<std::size_t> keypoint_nms(const std::vector<Detection>& dets, const std::vector<Points2>& keypoints2d,
                                      const std::vector<double>& areas, double oks_threshold) {
  if (keypoints2d.size() != dets.size() || areas.size() != dets.size())
    fail(ErrorCode::LengthMismatch, "keypoint_nms needs keypoints and an area for every detection");
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    const Points2& kp = keypoints2d[idx];
    const VecX visible = VecX::Ones(kp.rows());
    const VecX k = default_oks_constants(static_cast<int>(kp.rows()));
    bool suppressed = false;
    for (std::size_t other : kept) {
      if (oks(kp, keypoints2d[other], visible, areas[other], k) >= oks_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

}  // namespace bmp
