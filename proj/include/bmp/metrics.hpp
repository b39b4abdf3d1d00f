#pragma once

#include <vector>

#include "bmp/types.hpp"

namespace bmp {

struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Points3 apply(const Points3& points) const;
};

// Mean per-joint Euclidean distance. Throws ShapeMismatch.
double mpjpe(const Points3& pred, const Points3& gt);

// Similarity transform minimizing |s R X + t - Y|_F with det R = +1.
// Throws DegenerateConfiguration for fewer than 3 points or coincident X.
SimilarityTransform procrustes_align(const Points3& X, const Points3& Y);

double pa_mpjpe(const Points3& pred, const Points3& gt);

// Mean per-vertex Euclidean distance.
double pve(const Points3& pred, const Points3& gt);

// Fraction of joints within `threshold` (inclusive).
double pck3d(const Points3& pred, const Points3& gt, double threshold = 150.0);
// Mean PCK over thresholds 0, step, ..., max_threshold.
double auc(const Points3& pred, const Points3& gt, double max_threshold = 150.0, double step = 5.0);

// Subtracts row `root` from every row.
Points3 root_align(const Points3& points, int root = 0);

// Per-keypoint OKS constants: COCO sigmas for 17 keypoints, 0.1 otherwise.
VecX default_oks_constants(int num_keypoints);

// sum_i exp(-d_i^2 / (2 area k_i^2)) [v_i > 0] / sum_i [v_i > 0].
// Throws NoVisibleKeypoints, NonPositiveArea, ShapeMismatch.
double oks(const Points2& pred, const Points2& gt, const VecX& visibility, double area, const VecX& k);

// dOKS/dpred for the same formula.
Points2 oks_gradient(const Points2& pred, const Points2& gt, const VecX& visibility, double area, const VecX& k);

// Fraction of unordered pairs whose ordinal relation (threshold T) agrees
// between prediction and ground truth. Throws TooFewPersons, LengthMismatch.
double depth_order_accuracy(const std::vector<double>& pred, const std::vector<double>& gt, double T);

// Counts behind depth_order_accuracy, for pooling over scenes.
struct PairCount {
  long correct = 0;
  long total = 0;
  double fraction() const { return total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};
PairCount depth_order_counts(const std::vector<double>& pred, const std::vector<double>& gt, double T);

// Greedy one-to-one matching by descending OKS; pairs with OKS below
// `min_oks` stay unmatched. Returns, per prediction, the matched GT index or -1.
std::vector<int> greedy_oks_match(const std::vector<Points2>& pred, const std::vector<Points2>& gt,
                                  const std::vector<VecX>& gt_visibility, const std::vector<double>& gt_areas,
                                  double min_oks = 0.0);

}  // namespace bmp
