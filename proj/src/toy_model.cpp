#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "bmp/body_model.hpp"
#include "bmp/error.hpp"
#include "bmp/rng.hpp"

namespace bmp {

namespace {

struct Chain {
  Vec3 direction;
  double bone_length;
};

// Star of limb chains around the pelvis; y points down.
const Chain kChains[] = {
    {Vec3(0.0, -1.0, 0.0), 0.16},   // spine / head
    {Vec3(-0.25, 1.0, 0.0), 0.22},  // left leg
    {Vec3(0.25, 1.0, 0.0), 0.22},   // right leg
    {Vec3(-1.0, -0.8, 0.0), 0.16},  // left arm
    {Vec3(1.0, -0.8, 0.0), 0.16},   // right arm
};
constexpr int kNumChains = 5;

// Row weights proportional to a Gaussian falloff around `center`, with a small
// random perturbation, normalized to sum to one.
void falloff_row(const Points3& vertices, const Vec3& center, double sigma, Rng& rng, MatX& out, int row) {
  const Eigen::Index V = vertices.rows();
  VecX logits(V);
  for (Eigen::Index v = 0; v < V; ++v)
    logits[v] = -(vertices.row(v).transpose() - center).squaredNorm() / (2.0 * sigma * sigma);
  const double peak = logits.maxCoeff();
  VecX w(V);
  for (Eigen::Index v = 0; v < V; ++v) w[v] = std::exp(logits[v] - peak) * rng.uniform(0.5, 1.5);
  out.row(row) = (w / w.sum()).transpose();
}

}  // namespace

BodyModelSpec make_toy_model(const ToyModelConfig& config) {
  const int V = config.n_vertices;
  const int Jm = config.n_joints;
  const int J = config.n_keypoints > 0 ? config.n_keypoints : Jm;
  if (Jm < 2 || V < Jm)
    fail(ErrorCode::InvalidConfig, "toy model needs n_vertices >= n_joints >= 2");
  if (config.n_keypoints < 0) fail(ErrorCode::InvalidConfig, "n_keypoints must be non-negative");

  Rng rng(config.seed);
  BodyModelSpec m;

  // Kinematic tree: non-root joints are dealt round-robin onto the chains.
  const int chains = std::min(Jm - 1, kNumChains);
  m.parent.assign(static_cast<std::size_t>(Jm), -1);
  std::vector<Vec3> joint_pos(static_cast<std::size_t>(Jm), Vec3::Zero());
  std::vector<int> chain_tip(static_cast<std::size_t>(chains), 0);
  for (int j = 1; j < Jm; ++j) {
    const int c = (j - 1) % chains;
    const Chain& ch = kChains[c];
    const int p = chain_tip[static_cast<std::size_t>(c)];
    m.parent[static_cast<std::size_t>(j)] = p;
    const double length = ch.bone_length * rng.uniform(0.9, 1.1);
    joint_pos[static_cast<std::size_t>(j)] = joint_pos[static_cast<std::size_t>(p)] + length * ch.direction.normalized();
    chain_tip[static_cast<std::size_t>(c)] = j;
  }

  // Vertices scattered along bones; each is skinned to the bone's two ends
  // with a smoothstep falloff.
  m.template_vertices.resize(V, 3);
  m.skinning_weights = MatX::Zero(V, Jm);
  for (int v = 0; v < V; ++v) {
    const int child = 1 + v % (Jm - 1);
    const int p = m.parent[static_cast<std::size_t>(child)];
    const Vec3 a = joint_pos[static_cast<std::size_t>(p)];
    const Vec3 b = joint_pos[static_cast<std::size_t>(child)];
    const double t = rng.uniform();
    Vec3 axis = (b - a).normalized();
    Vec3 perp = axis.unitOrthogonal();
    Vec3 perp2 = axis.cross(perp);
    const double phi = rng.uniform(0.0, 6.283185307179586);
    const double radius = rng.uniform(0.03, 0.07);
    const Vec3 pos = a + t * (b - a) + radius * (std::cos(phi) * perp + std::sin(phi) * perp2);
    m.template_vertices.row(v) = pos.transpose();
    const double s = t * t * (3.0 - 2.0 * t);
    m.skinning_weights(v, child) = s;
    m.skinning_weights(v, p) = 1.0 - s;
  }

  m.joint_regressor.resize(Jm, V);
  for (int j = 0; j < Jm; ++j)
    falloff_row(m.template_vertices, joint_pos[static_cast<std::size_t>(j)], 0.08, rng, m.joint_regressor, j);
  m.keypoint_regressor.resize(J, V);
  for (int k = 0; k < J; ++k)
    falloff_row(m.template_vertices, joint_pos[static_cast<std::size_t>(k % Jm)], 0.06, rng, m.keypoint_regressor, k);

  // Component 0: uniform scaling about the root. Others: smooth low-frequency
  // displacement fields of about a centimeter per unit.
  m.shape_blendshapes = MatX::Zero(3 * V, kShapeDim);
  for (int v = 0; v < V; ++v)
    for (int c = 0; c < 3; ++c) m.shape_blendshapes(3 * v + c, 0) = 0.1 * m.template_vertices(v, c);
  for (int b = 1; b < kShapeDim; ++b) {
    Vec3 freq(rng.uniform(1.0, 4.0), rng.uniform(1.0, 4.0), rng.uniform(1.0, 4.0));
    Vec3 amp(rng.normal(0.0, 0.01), rng.normal(0.0, 0.01), rng.normal(0.0, 0.01));
    const double phase = rng.uniform(0.0, 6.283185307179586);
    for (int v = 0; v < V; ++v) {
      const double arg = freq.dot(m.template_vertices.row(v).transpose()) + phase;
      for (int c = 0; c < 3; ++c) m.shape_blendshapes(3 * v + c, b) = amp[c] * std::sin(arg + c);
    }
  }

  for (int v = 0; v + 2 < V; ++v) m.faces.push_back({v, v + 1, v + 2});

  m.validate();
  return m;
}

}  // namespace bmp
