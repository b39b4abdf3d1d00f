#include "bmp/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "bmp/encoding.hpp"
#include "bmp/error.hpp"

namespace bmp {

void SceneConfig::validate() const {
  if (min_persons < 1 || max_persons < min_persons || max_persons > 16)
    fail(ErrorCode::InvalidConfig, "person count range must satisfy 1 <= min <= max <= 16");
  if (!(depth_lo > 0.0 && depth_lo <= depth_hi)) fail(ErrorCode::InvalidConfig, "need 0 < depth_lo <= depth_hi");
  if (!(pose_sigma >= 0.0 && shape_sigma >= 0.0 && size_jitter >= 0.0 && center_jitter >= 0.0))
    fail(ErrorCode::InvalidConfig, "noise scales must be non-negative");
  if (size_jitter >= 10.0) fail(ErrorCode::InvalidConfig, "size_jitter must stay below 10 (body scale > 0)");
  if (image.width <= 0 || image.height <= 0) fail(ErrorCode::InvalidConfig, "image size must be positive");
  globals().validate();
}

std::vector<double> Scene::depths() const {
  std::vector<double> d;
  d.reserve(persons.size());
  for (const auto& p : persons) d.push_back(p.depth);
  return d;
}

namespace {

PersonAnnotation make_person(Rng& rng, const SceneConfig& cfg, const BodyModelSpec& model) {
  PersonAnnotation p;
  const double W = cfg.image.width;
  const double H = cfg.image.height;
  p.depth = rng.uniform(cfg.depth_lo, cfg.depth_hi);

  p.beta = VecX::Zero(model.num_betas());
  for (Eigen::Index b = 0; b < p.beta.size(); ++b)
    p.beta[b] = b == 0 ? rng.uniform(-cfg.size_jitter, cfg.size_jitter) : rng.normal(0.0, cfg.shape_sigma);

  VecX aa(3 * model.num_joints());
  for (Eigen::Index k = 0; k < aa.size(); ++k) aa[k] = rng.normal(0.0, cfg.pose_sigma);
  p.pose6d = PoseParams::from_axis_angle(aa).to_rot6d();

  if (cfg.ground_plane) {
    p.center.x() = rng.uniform(0.0, W);
    const double y = H * (cfg.horizon + cfg.plane_drop * cfg.depth_lo / p.depth) + rng.normal(0.0, cfg.center_jitter * H);
    p.center.y() = std::clamp(y, 0.0, std::nextafter(H, 0.0));
  } else {
    p.center = Vec2(rng.uniform(0.0, W), rng.uniform(0.0, H));
  }

  const LbsResult fwd = lbs_forward(model, PoseParams::from_rot6d(p.pose6d), p.beta);
  p.keypoints3d = regress_keypoints(model, fwd.vertices);
  const double s = scale_from_depth(p.depth, cfg.globals());
  const CameraParams cam = camera_at(p.center, s, cfg.image, fwd.joints.row(model.root()).transpose());
  p.camera = cam;
  p.keypoints2d = project_weak_perspective(p.keypoints3d, cam, cfg.image);
  p.visibility = VecX::Zero(p.keypoints2d.rows());
  for (Eigen::Index k = 0; k < p.keypoints2d.rows(); ++k) {
    const double x = p.keypoints2d(k, 0);
    const double y = p.keypoints2d(k, 1);
    p.visibility[k] = (x >= 0.0 && x < W && y >= 0.0 && y < H) ? 1.0 : 0.0;
  }
  const Points2 v2 = project_weak_perspective(fwd.vertices, cam, cfg.image);
  p.width = v2.col(0).maxCoeff() - v2.col(0).minCoeff();
  p.height = v2.col(1).maxCoeff() - v2.col(1).minCoeff();
  p.validate();
  return p;
}

}  // namespace

Scene generate_scene(std::uint64_t seed, const SceneConfig& config, const BodyModelSpec& model) {
  config.validate();
  Rng rng(seed);
  Scene scene;
  scene.image = config.image;
  scene.seed = seed;
  const int n = rng.integer(config.min_persons, config.max_persons);
  for (int i = 0; i < n; ++i) scene.persons.push_back(make_person(rng, config, model));
  return scene;
}

std::vector<Scene> generate_scenes(std::uint64_t seed, int count, const SceneConfig& config,
                                   const BodyModelSpec& model, int jobs) {
  config.validate();
  if (count < 0) fail(ErrorCode::InvalidConfig, "scene count must be non-negative");
  std::vector<Scene> out(static_cast<std::size_t>(count));
  const int workers = std::clamp(jobs, 1, std::max(1, count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    try {
      for (int i = w; i < count; i += workers)
        out[static_cast<std::size_t>(i)] = generate_scene(derive_seed(seed, static_cast<std::uint64_t>(i)), config, model);
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Scene generate_collision_free_scene(std::uint64_t seed, const SceneConfig& config, const BodyModelSpec& model,
                                    const PyramidConfig& pyramid, int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Scene s = generate_scene(derive_seed(seed, static_cast<std::uint64_t>(attempt)), config, model);
    if (encode_gt(s.persons, s.image, pyramid, config.globals()).collisions == 0) return s;
  }
  fail(ErrorCode::InvalidConfig, "no collision-free scene within the attempt budget");
}

PairRelations make_pseudo_relations(const std::vector<double>& gt_depths, double noise_sigma, double T, Rng& rng) {
  if (!(noise_sigma >= 0.0)) fail(ErrorCode::InvalidConfig, "noise_sigma must be non-negative");
  std::vector<double> noisy(gt_depths);
  for (double& d : noisy) d += noise_sigma * rng.normal();
  return PairRelations::from_depths(noisy, T);
}

}  // namespace bmp
