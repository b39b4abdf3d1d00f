#include "bmp/body_model.hpp"

#include <cmath>
#include <string>

#include "bmp/error.hpp"
#include "bmp/rotation.hpp"

namespace bmp {

namespace {

void check_rows_stochastic(const MatX& m, const char* name, bool non_negative) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (!m.row(r).allFinite())
      fail(ErrorCode::InvariantViolation, std::string(name) + " row " + std::to_string(r) + " is not finite");
    if (non_negative && m.row(r).minCoeff() < 0.0)
      fail(ErrorCode::InvariantViolation, std::string(name) + " row " + std::to_string(r) + " has a negative entry");
    if (std::abs(m.row(r).sum() - 1.0) > 1e-6)
      fail(ErrorCode::InvariantViolation, std::string(name) + " row " + std::to_string(r) + " does not sum to 1");
  }
}

}  // namespace

int BodyModelSpec::root() const {
  for (int j = 0; j < num_joints(); ++j)
    if (parent[static_cast<std::size_t>(j)] == -1) return j;
  fail(ErrorCode::InvariantViolation, "kinematic tree has no root");
}

void BodyModelSpec::validate() const {
  const Eigen::Index V = template_vertices.rows();
  const Eigen::Index Jm = static_cast<Eigen::Index>(parent.size());
  if (V < 1 || Jm < 1) fail(ErrorCode::DimensionMismatch, "model needs at least one vertex and one joint");
  if (shape_blendshapes.rows() != 3 * V)
    fail(ErrorCode::DimensionMismatch, "shape_blendshapes must have 3V rows");
  if (joint_regressor.rows() != Jm || joint_regressor.cols() != V)
    fail(ErrorCode::DimensionMismatch, "joint_regressor must be Jm×V");
  if (skinning_weights.rows() != V || skinning_weights.cols() != Jm)
    fail(ErrorCode::DimensionMismatch, "skinning_weights must be V×Jm");
  if (keypoint_regressor.cols() != V) fail(ErrorCode::DimensionMismatch, "keypoint_regressor must be J×V");
  if (!template_vertices.allFinite() || !shape_blendshapes.allFinite())
    fail(ErrorCode::InvariantViolation, "template or blendshapes not finite");

  check_rows_stochastic(skinning_weights, "skinning_weights", true);
  check_rows_stochastic(joint_regressor, "joint_regressor", false);
  if (!keypoint_regressor.allFinite()) fail(ErrorCode::InvariantViolation, "keypoint_regressor not finite");

  int roots = 0;
  for (int j = 0; j < Jm; ++j) {
    const int p = parent[static_cast<std::size_t>(j)];
    if (p == -1) {
      ++roots;
    } else if (p < 0 || p >= Jm || p == j) {
      fail(ErrorCode::InvariantViolation, "parent index out of range at joint " + std::to_string(j));
    }
  }
  if (roots != 1) fail(ErrorCode::InvariantViolation, "kinematic tree must have exactly one root");
  for (int j = 0; j < Jm; ++j) {
    int cur = j;
    for (int steps = 0; cur != -1; ++steps) {
      if (steps > Jm) fail(ErrorCode::InvariantViolation, "kinematic tree has a cycle through joint " + std::to_string(j));
      cur = parent[static_cast<std::size_t>(cur)];
    }
  }
  for (const auto& f : faces)
    for (int idx : f)
      if (idx < 0 || idx >= V) fail(ErrorCode::InvariantViolation, "face index out of range");
}

std::vector<int> BodyModelSpec::topological_order() const {
  const int Jm = num_joints();
  std::vector<std::vector<int>> children(static_cast<std::size_t>(Jm));
  for (int j = 0; j < Jm; ++j) {
    const int p = parent[static_cast<std::size_t>(j)];
    if (p >= 0) children[static_cast<std::size_t>(p)].push_back(j);
  }
  std::vector<int> order{root()};
  for (std::size_t head = 0; head < order.size(); ++head)
    for (int c : children[static_cast<std::size_t>(order[head])]) order.push_back(c);
  if (static_cast<int>(order.size()) != Jm) fail(ErrorCode::InvariantViolation, "kinematic tree is not connected");
  return order;
}

PoseParams PoseParams::rest(int num_joints) {
  VecX v = VecX::Zero(6 * num_joints);
  for (int j = 0; j < num_joints; ++j) {
    v[6 * j] = 1.0;
    v[6 * j + 4] = 1.0;
  }
  return PoseParams(std::move(v), true);
}

PoseParams PoseParams::from_rot6d(const VecX& flat) {
  if (flat.size() % 6 != 0) fail(ErrorCode::DimensionMismatch, "6D pose length must be a multiple of 6");
  return PoseParams(flat, true);
}

PoseParams PoseParams::from_axis_angle(const VecX& flat) {
  if (flat.size() % 3 != 0) fail(ErrorCode::DimensionMismatch, "axis-angle pose length must be a multiple of 3");
  return PoseParams(flat, false);
}

int PoseParams::num_joints() const {
  return static_cast<int>(values_.size() / (rot6d_ ? 6 : 3));
}

std::vector<Mat3> PoseParams::rotations() const {
  std::vector<Mat3> out;
  out.reserve(static_cast<std::size_t>(num_joints()));
  for (int j = 0; j < num_joints(); ++j) {
    if (rot6d_)
      out.push_back(rot6d_to_matrix(values_.segment<6>(6 * j)));
    else
      out.push_back(axis_angle_to_matrix(values_.segment<3>(3 * j)));
  }
  return out;
}

VecX PoseParams::to_rot6d() const {
  if (rot6d_) return values_;
  VecX out(6 * num_joints());
  for (int j = 0; j < num_joints(); ++j)
    out.segment<6>(6 * j) = matrix_to_rot6d(axis_angle_to_matrix(values_.segment<3>(3 * j)));
  return out;
}

Points3 shape_mesh(const BodyModelSpec& model, const VecX& beta) {
  if (beta.size() != model.num_betas())
    fail(ErrorCode::DimensionMismatch, "beta has " + std::to_string(beta.size()) + " entries, model expects " +
                                           std::to_string(model.num_betas()));
  const VecX offsets = model.shape_blendshapes * beta;
  Points3 out = model.template_vertices;
  for (Eigen::Index v = 0; v < out.rows(); ++v)
    for (int c = 0; c < 3; ++c) out(v, c) += offsets[3 * v + c];
  return out;
}

// Skinning is evaluated in displacement form,
//   v = x + sum_j w_j ((Rw_j - I)(x - J_j) + delta_j),   delta_j = posed joint - rest joint,
// which equals standard LBS for unit-sum weights and keeps the rest pose bit-exact.
LbsResult lbs_forward(const BodyModelSpec& model, const std::vector<Mat3>& rotations, const VecX& beta) {
  const int Jm = model.num_joints();
  if (static_cast<int>(rotations.size()) != Jm)
    fail(ErrorCode::DimensionMismatch, "pose has " + std::to_string(rotations.size()) + " joints, model has " +
                                           std::to_string(Jm));
  LbsResult out;
  out.shaped_vertices = shape_mesh(model, beta);
  out.rest_joints = model.joint_regressor * out.shaped_vertices;
  out.local_rotations = rotations;
  out.world_rotations.assign(static_cast<std::size_t>(Jm), Mat3::Identity());
  Points3 delta = Points3::Zero(Jm, 3);

  for (int j : model.topological_order()) {
    const auto ju = static_cast<std::size_t>(j);
    const int p = model.parent[ju];
    if (p < 0) {
      out.world_rotations[ju] = rotations[ju];
      continue;
    }
    const auto pu = static_cast<std::size_t>(p);
    out.world_rotations[ju] = out.world_rotations[pu] * rotations[ju];
    const Vec3 bone = (out.rest_joints.row(j) - out.rest_joints.row(p)).transpose();
    delta.row(j) = ((out.world_rotations[pu] - Mat3::Identity()) * bone).transpose() + delta.row(p);
  }
  out.joints = out.rest_joints + delta;

  std::vector<Mat3> rel(static_cast<std::size_t>(Jm));
  for (int j = 0; j < Jm; ++j) rel[static_cast<std::size_t>(j)] = out.world_rotations[static_cast<std::size_t>(j)] - Mat3::Identity();

  const Eigen::Index V = out.shaped_vertices.rows();
  out.vertices = out.shaped_vertices;
  for (Eigen::Index i = 0; i < V; ++i) {
    const Vec3 x = out.shaped_vertices.row(i).transpose();
    Vec3 disp = Vec3::Zero();
    for (int j = 0; j < Jm; ++j) {
      const double w = model.skinning_weights(i, j);
      if (w == 0.0) continue;
      const Vec3 local = x - out.rest_joints.row(j).transpose();
      disp += w * (rel[static_cast<std::size_t>(j)] * local + delta.row(j).transpose());
    }
    out.vertices.row(i) += disp.transpose();
  }
  return out;
}

LbsResult lbs_forward(const BodyModelSpec& model, const PoseParams& pose, const VecX& beta) {
  return lbs_forward(model, pose.rotations(), beta);
}

LbsGradient lbs_backward(const BodyModelSpec& model, const LbsResult& fwd, const Points3& grad_vertices,
                         const Points3& grad_joints) {
  const int Jm = model.num_joints();
  const Eigen::Index V = fwd.shaped_vertices.rows();
  const bool have_gv = grad_vertices.size() > 0;
  const bool have_gj = grad_joints.size() > 0;
  if (have_gv && grad_vertices.rows() != V) fail(ErrorCode::DimensionMismatch, "vertex gradient has wrong shape");
  if (have_gj && grad_joints.rows() != Jm) fail(ErrorCode::DimensionMismatch, "joint gradient has wrong shape");

  std::vector<Mat3> g_world(static_cast<std::size_t>(Jm), Mat3::Zero());
  // joints = rest_joints + delta
  Points3 g_delta = have_gj ? grad_joints : Points3(Points3::Zero(Jm, 3));
  Points3 g_rest_joints = g_delta;
  Points3 g_shaped = have_gv ? grad_vertices : Points3(Points3::Zero(V, 3));

  if (have_gv) {
    for (Eigen::Index i = 0; i < V; ++i) {
      const Vec3 gv = grad_vertices.row(i).transpose();
      if (gv.isZero(0.0)) continue;
      const Vec3 x = fwd.shaped_vertices.row(i).transpose();
      for (int j = 0; j < Jm; ++j) {
        const double w = model.skinning_weights(i, j);
        if (w == 0.0) continue;
        const auto ju = static_cast<std::size_t>(j);
        const Vec3 local = x - fwd.rest_joints.row(j).transpose();
        g_world[ju] += w * gv * local.transpose();
        g_delta.row(j) += w * gv.transpose();
        const Vec3 back = w * ((fwd.world_rotations[ju] - Mat3::Identity()).transpose() * gv);
        g_shaped.row(i) += back.transpose();
        g_rest_joints.row(j) -= back.transpose();
      }
    }
  }

  LbsGradient out;
  out.rotations.assign(static_cast<std::size_t>(Jm), Mat3::Zero());
  const std::vector<int> order = model.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int j = *it;
    const auto ju = static_cast<std::size_t>(j);
    const int p = model.parent[ju];
    if (p < 0) {
      out.rotations[ju] = g_world[ju];
      continue;
    }
    const auto pu = static_cast<std::size_t>(p);
    const Mat3& Rp = fwd.world_rotations[pu];
    // Rw_j = Rw_p R_j
    g_world[pu] += g_world[ju] * fwd.local_rotations[ju].transpose();
    out.rotations[ju] = Rp.transpose() * g_world[ju];
    // delta_j = (Rw_p - I)(J_j - J_p) + delta_p
    const Vec3 bone = (fwd.rest_joints.row(j) - fwd.rest_joints.row(p)).transpose();
    const Vec3 gd = g_delta.row(j).transpose();
    g_world[pu] += gd * bone.transpose();
    const Vec3 back = (Rp - Mat3::Identity()).transpose() * gd;
    g_rest_joints.row(j) += back.transpose();
    g_rest_joints.row(p) -= back.transpose();
    g_delta.row(p) += gd.transpose();
  }

  g_shaped += model.joint_regressor.transpose() * g_rest_joints;
  const Eigen::Map<const VecX> flat(g_shaped.data(), 3 * V);
  out.beta = model.shape_blendshapes.transpose() * flat;
  return out;
}

Points3 regress_keypoints(const BodyModelSpec& model, const Points3& vertices) {
  if (vertices.rows() != model.num_vertices())
    fail(ErrorCode::DimensionMismatch, "vertex count " + std::to_string(vertices.rows()) + " does not match model");
  return model.keypoint_regressor * vertices;
}

}  // namespace bmp
