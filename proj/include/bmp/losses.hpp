#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bmp/encoding.hpp"
#include "bmp/types.hpp"

namespace bmp {

// R(p_m, p_n): +1 when p_m is closer by more than T, -1 when p_n is closer by
// more than T, 0 otherwise.
enum class OrdinalRelation : std::int8_t { kSecondCloser = -1, kSameDepth = 0, kFirstCloser = 1 };

inline OrdinalRelation negate(OrdinalRelation r) { return static_cast<OrdinalRelation>(-static_cast<int>(r)); }

OrdinalRelation ordinal_relation(double d_m, double d_n, double T);

// Relations for every unordered pair of n persons; get(n, m) = -get(m, n).
class PairRelations {
 public:
  PairRelations() = default;
  explicit PairRelations(int n);
  static PairRelations from_depths(const std::vector<double>& depths, double T);

  int size() const { return n_; }
  void set(int m, int n, OrdinalRelation r);
  std::optional<OrdinalRelation> get(int m, int n) const;

  bool operator==(const PairRelations&) const = default;

 private:
  std::size_t slot(int m, int n) const;
  int n_ = 0;
  std::vector<std::optional<OrdinalRelation>> upper_;
};

struct LossWeights {
  double w3d = 4.0;
  double w2d = 4.0;
  double shape = 0.01;
  double conf = 1.0;
  double adv = 0.01;  // slot only, the adversarial term contributes 0
  double rank = 0.1;

  void validate() const;
};

struct FocalParams {
  double alpha = 0.25;
  double gamma = 2.0;
  double eps = 1e-7;
};

struct PairLoss {
  double loss = 0.0;
  double grad_m = 0.0;
  double grad_n = 0.0;
};

// +1: softplus(z_m - z_n); -1: softplus(z_n - z_m); 0: (z_m - z_n)^2.
PairLoss pair_ordinal_loss(double z_m, double z_n, OrdinalRelation r);

// max(x, 0) + log1p(exp(-|x|))
double softplus(double x);
double sigmoid(double x);

struct ScalarLoss {
  double value = 0.0;
  VecX grad;
};

// (1/N) sum over unordered pairs of c_m c_n L(p_m, p_n); c is held constant.
// Throws MissingRelation, LengthMismatch.
ScalarLoss rank_loss(const std::vector<double>& z, const std::vector<double>& confidence, const PairRelations& relations);

// Mean squared error; throws LengthMismatch.
ScalarLoss depth_loss(const std::vector<double>& pred, const std::vector<double>& gt);

struct MeshPrediction {
  VecX theta;
  VecX beta;
  Points3 keypoints3d;
  Points3 vertices;
  Points2 keypoints2d;
  double confidence = 0.0;
};

struct MeshTarget {
  VecX theta;
  VecX beta;
  Points3 keypoints3d;
  Points3 vertices;
  Points2 keypoints2d;
  VecX visibility;
  double confidence = 0.0;  // OKS of the projected vs GT 2D keypoints
};

using MeshGradient = MeshPrediction;

// Unweighted per-term means plus the weighted total.
struct MeshTerms {
  double pose = 0.0;
  double shape = 0.0;
  double keypoints3d = 0.0;
  double vertices = 0.0;
  double keypoints2d = 0.0;
  double confidence = 0.0;
  double adversarial = 0.0;
  double total = 0.0;
};

struct MeshLossResult {
  MeshTerms terms;
  std::vector<MeshGradient> grads;
};

// L_pose + L_vert + λ3D L_3D + λ2D L_2D + λshape L_shape + λconf L_conf
// (+ λadv · 0), averaged over persons. L_2D is the mean Euclidean distance
// over visible keypoints. Throws DimensionMismatch.
MeshLossResult mesh_loss(const std::vector<MeshPrediction>& pred, const std::vector<MeshTarget>& gt,
                         const LossWeights& weights);

struct FocalLossResult {
  double value = 0.0;
  InstanceMap grad;
};

// Binary focal loss per cell, mean over cells per level, summed over levels.
// Throws ConfigMismatch.
FocalLossResult instance_focal_loss(const InstanceMap& pred, const InstanceMap& gt, const FocalParams& params = {});

// Everything one scene contributes to the training objective.
struct SceneLossInput {
  InstanceMap pred_instance;
  InstanceMap gt_instance;
  std::vector<MeshPrediction> pred_mesh;
  std::vector<MeshTarget> gt_mesh;
  std::vector<double> pred_depth;        // depth channel d
  std::vector<double> gt_depth;
  std::vector<double> rank_depth;        // z recovered from each predicted camera
  std::vector<double> rank_confidence;   // c_m weights
  PairRelations relations;
};

using LossBreakdown = std::vector<std::pair<std::string, double>>;

struct TotalLossResult {
  double value = 0.0;
  LossBreakdown breakdown;  // inst, mesh, depth, [rank], total
  MeshTerms mesh_terms;
  InstanceMap grad_instance;
  std::vector<MeshGradient> grad_mesh;
  VecX grad_depth;
  VecX grad_rank_depth;
};

// L = L_inst + L_mesh + L_depth + rank_weight L_rank, the rank term only for
// scenes with at least two persons.
TotalLossResult total_loss(const SceneLossInput& scene, const LossWeights& weights, const FocalParams& focal = {});

}  // namespace bmp
