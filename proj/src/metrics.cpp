#include "bmp/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "bmp/error.hpp"

namespace bmp {

namespace {

void require_same_shape(const Points3& a, const Points3& b) {
  if (a.rows() != b.rows() || a.rows() == 0)
    fail(ErrorCode::ShapeMismatch, "point sets must be non-empty and of equal size (" + std::to_string(a.rows()) + " vs " +
                                        std::to_string(b.rows()) + ")");
}

double mean_distance(const Points3& a, const Points3& b) {
  require_same_shape(a, b);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) sum += (a.row(k) - b.row(k)).norm();
  return sum / static_cast<double>(a.rows());
}

int relation(double dm, double dn, double T) {
  if (dn - dm > T) return 1;
  if (dm - dn > T) return -1;
  return 0;
}

}  // namespace

Points3 SimilarityTransform::apply(const Points3& points) const {
  Points3 out(points.rows(), 3);
  for (Eigen::Index k = 0; k < points.rows(); ++k)
    out.row(k) = (scale * (rotation * points.row(k).transpose()) + translation).transpose();
  return out;
}

double mpjpe(const Points3& pred, const Points3& gt) { return mean_distance(pred, gt); }

double pve(const Points3& pred, const Points3& gt) { return mean_distance(pred, gt); }

SimilarityTransform procrustes_align(const Points3& X, const Points3& Y) {
  require_same_shape(X, Y);
  if (X.rows() < 3) fail(ErrorCode::DegenerateConfiguration, "Procrustes alignment needs at least 3 points");
  const double n = static_cast<double>(X.rows());
  const Vec3 mx = X.colwise().mean().transpose();
  const Vec3 my = Y.colwise().mean().transpose();
  const Points3 Xc = X.rowwise() - mx.transpose();
  const Points3 Yc = Y.rowwise() - my.transpose();
  const double var_x = Xc.squaredNorm() / n;
  if (!(var_x > 1e-12 * std::max(1.0, mx.squaredNorm())))
    fail(ErrorCode::DegenerateConfiguration, "source points are coincident");

  const Mat3 cov = (Yc.transpose() * Xc) / n;
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 S = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) S(2, 2) = -1.0;

  SimilarityTransform t;
  t.rotation = svd.matrixU() * S * svd.matrixV().transpose();
  t.scale = (svd.singularValues().asDiagonal() * S).trace() / var_x;
  t.translation = my - t.scale * t.rotation * mx;
  return t;
}

double pa_mpjpe(const Points3& pred, const Points3& gt) {
  return mpjpe(procrustes_align(pred, gt).apply(pred), gt);
}

double pck3d(const Points3& pred, const Points3& gt, double threshold) {
  require_same_shape(pred, gt);
  long hits = 0;
  for (Eigen::Index k = 0; k < pred.rows(); ++k)
    if ((pred.row(k) - gt.row(k)).norm() <= threshold) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.rows());
}

double auc(const Points3& pred, const Points3& gt, double max_threshold, double step) {
  if (!(step > 0.0)) fail(ErrorCode::InvalidConfig, "AUC step must be positive");
  const int n = static_cast<int>(std::floor(max_threshold / step + 1e-9)) + 1;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += pck3d(pred, gt, i * step);
  return sum / n;
}

Points3 root_align(const Points3& points, int root) {
  if (root < 0 || root >= points.rows()) fail(ErrorCode::ShapeMismatch, "root index out of range");
  return points.rowwise() - points.row(root);
}

VecX default_oks_constants(int num_keypoints) {
  if (num_keypoints == 17) {
    VecX k(17);
    k << .26, .25, .25, .35, .35, .79, .79, .72, .72, .62, .62, 1.07, 1.07, .87, .87, .89, .89;
    return k / 10.0;
  }
  return VecX::Constant(num_keypoints, 0.1);
}

double oks(const Points2& pred, const Points2& gt, const VecX& visibility, double area, const VecX& k) {
  if (pred.rows() != gt.rows() || visibility.size() != gt.rows() || k.size() != gt.rows())
    fail(ErrorCode::ShapeMismatch, "OKS inputs disagree in keypoint count");
  if (!(area > 0.0)) fail(ErrorCode::NonPositiveArea, "OKS area must be positive");
  double sum = 0.0;
  int visible = 0;
  for (Eigen::Index i = 0; i < gt.rows(); ++i) {
    if (!(visibility[i] > 0.0)) continue;
    ++visible;
    const double d2 = (pred.row(i) - gt.row(i)).squaredNorm();
    sum += std::exp(-d2 / (2.0 * area * k[i] * k[i]));
  }
  if (visible == 0) fail(ErrorCode::NoVisibleKeypoints, "OKS needs at least one visible keypoint");
  return sum / visible;
}

Points2 oks_gradient(const Points2& pred, const Points2& gt, const VecX& visibility, double area, const VecX& k) {
  oks(pred, gt, visibility, area, k);  // validates
  int visible = 0;
  for (Eigen::Index i = 0; i < gt.rows(); ++i)
    if (visibility[i] > 0.0) ++visible;
  Points2 g = Points2::Zero(pred.rows(), 2);
  for (Eigen::Index i = 0; i < gt.rows(); ++i) {
    if (!(visibility[i] > 0.0)) continue;
    const double denom = area * k[i] * k[i];
    const double e = std::exp(-(pred.row(i) - gt.row(i)).squaredNorm() / (2.0 * denom));
    g.row(i) = -e * (pred.row(i) - gt.row(i)) / (denom * visible);
  }
  return g;
}

PairCount depth_order_counts(const std::vector<double>& pred, const std::vector<double>& gt, double T) {
  if (pred.size() != gt.size()) fail(ErrorCode::LengthMismatch, "prediction and ground-truth depth counts differ");
  PairCount c;
  for (std::size_t m = 0; m < gt.size(); ++m) {
    for (std::size_t n = m + 1; n < gt.size(); ++n) {
      ++c.total;
      if (relation(pred[m], pred[n], T) == relation(gt[m], gt[n], T)) ++c.correct;
    }
  }
  return c;
}

double depth_order_accuracy(const std::vector<double>& pred, const std::vector<double>& gt, double T) {
  if (gt.size() < 2) fail(ErrorCode::TooFewPersons, "depth ordering needs at least two persons");
  return depth_order_counts(pred, gt, T).fraction();
}

std::vector<int> greedy_oks_match(const std::vector<Points2>& pred, const std::vector<Points2>& gt,
                                  const std::vector<VecX>& gt_visibility, const std::vector<double>& gt_areas,
                                  double min_oks) {
  if (gt_visibility.size() != gt.size() || gt_areas.size() != gt.size())
    fail(ErrorCode::LengthMismatch, "ground-truth visibility/area lists do not match");
  struct Candidate {
    double score;
    std::size_t p, g;
  };
  std::vector<Candidate> cands;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      bool any_visible = (gt_visibility[g].array() > 0.0).any();
      if (!any_visible) continue;
      const double s = oks(pred[p], gt[g], gt_visibility[g], gt_areas[g], default_oks_constants(static_cast<int>(gt[g].rows())));
      if (s >= min_oks) cands.push_back({s, p, g});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  std::vector<int> match(pred.size(), -1);
  std::vector<bool> used(gt.size(), false);
  for (const auto& c : cands) {
    if (match[c.p] != -1 || used[c.g]) continue;
    match[c.p] = static_cast<int>(c.g);
    used[c.g] = true;
  }
  return match;
}

}  // namespace bmp
