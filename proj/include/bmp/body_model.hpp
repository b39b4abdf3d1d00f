#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bmp/types.hpp"

namespace bmp {

inline constexpr int kSmplJoints = 24;
inline constexpr int kShapeDim = 10;

// SMPL-style model: template mesh, linear shape blendshapes, joint regressor,
// skinning weights and a kinematic tree. All lengths are in meters. The y axis
// points down so that weak-perspective projection lands upright in images.
struct BodyModelSpec {
  Points3 template_vertices;          // V×3
  MatX shape_blendshapes;             // (3V)×B; row 3v+c holds coordinate c of vertex v
  MatX joint_regressor;               // Jm×V, rows sum to 1
  MatX skinning_weights;              // V×Jm, rows non-negative, sum to 1
  std::vector<int> parent;            // Jm, root marked -1
  MatX keypoint_regressor;            // J×V
  std::vector<std::array<int, 3>> faces;

  int num_vertices() const { return static_cast<int>(template_vertices.rows()); }
  int num_joints() const { return static_cast<int>(parent.size()); }
  int num_betas() const { return static_cast<int>(shape_blendshapes.cols()); }
  int num_keypoints() const { return static_cast<int>(keypoint_regressor.rows()); }
  int root() const;

  // Throws InvariantViolation / DimensionMismatch.
  void validate() const;
  // Parents before children, starting at the root.
  std::vector<int> topological_order() const;

  bool operator==(const BodyModelSpec&) const = default;
};

// Per-joint local rotations in one of the two supported encodings.
class PoseParams {
 public:
  static PoseParams rest(int num_joints);
  static PoseParams from_rot6d(const VecX& flat);       // Jm*6 entries
  static PoseParams from_axis_angle(const VecX& flat);  // Jm*3 entries

  bool is_rot6d() const { return rot6d_; }
  int num_joints() const;
  const VecX& values() const { return values_; }

  std::vector<Mat3> rotations() const;
  VecX to_rot6d() const;

 private:
  PoseParams(VecX values, bool rot6d) : values_(std::move(values)), rot6d_(rot6d) {}
  VecX values_;
  bool rot6d_ = true;
};

// template + blendshapes · beta
Points3 shape_mesh(const BodyModelSpec& model, const VecX& beta);

struct LbsResult {
  Points3 vertices;                  // posed
  Points3 joints;                    // posed joint locations
  Points3 shaped_vertices;           // rest pose, shaped
  Points3 rest_joints;               // regressed from shaped_vertices
  std::vector<Mat3> local_rotations;
  std::vector<Mat3> world_rotations;
};

LbsResult lbs_forward(const BodyModelSpec& model, const std::vector<Mat3>& rotations, const VecX& beta);
LbsResult lbs_forward(const BodyModelSpec& model, const PoseParams& pose, const VecX& beta);

struct LbsGradient {
  std::vector<Mat3> rotations;  // dL/dR_j for each local rotation
  VecX beta;
};

// Reverse-mode pass through lbs_forward given upstream gradients with respect
// to posed vertices and posed joints (either may be empty).
LbsGradient lbs_backward(const BodyModelSpec& model, const LbsResult& forward,
                         const Points3& grad_vertices, const Points3& grad_joints);

Points3 regress_keypoints(const BodyModelSpec& model, const Points3& vertices);

struct ToyModelConfig {
  int n_vertices = 120;
  int n_joints = kSmplJoints;
  int n_keypoints = 17;  // 0 means one keypoint per joint
  std::uint64_t seed = 0;
};

// Deterministic procedural humanoid satisfying every BodyModelSpec invariant.
// Shape component 0 scales the body uniformly about the root (+10% per unit).
BodyModelSpec make_toy_model(const ToyModelConfig& config);

}  // namespace bmp
