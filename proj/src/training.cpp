#include "bmp/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bmp/camera.hpp"
#include "bmp/encoding.hpp"
#include "bmp/error.hpp"
#include "bmp/finite_diff.hpp"
#include "bmp/metrics.hpp"
#include "bmp/rotation.hpp"

namespace bmp {

void TrainOptions::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail(ErrorCode::InvalidConfig, "lr must be finite and non-negative");
  if (steps < 0) fail(ErrorCode::InvalidConfig, "steps must be non-negative");
  if (hidden <= 0) fail(ErrorCode::InvalidConfig, "hidden width must be positive");
  if (!(pseudo_sigma >= 0.0)) fail(ErrorCode::InvalidConfig, "pseudo_sigma must be non-negative");
  if (!(rank_threshold >= 0.0)) fail(ErrorCode::InvalidConfig, "rank threshold must be non-negative");
  pyramid.validate();
  if (!(globals.focal > 0.0)) fail(ErrorCode::InvalidConfig, "focal length must be positive");
}

VecX scene_person_features(const Scene& scene, int index, const FeatureNoise& noise) {
  FeatureNoise n = noise;
  n.seed = derive_seed(derive_seed(noise.seed, scene.seed), static_cast<std::uint64_t>(index));
  return person_features(scene.persons.at(static_cast<std::size_t>(index)), scene.image, n);
}

namespace {

Points2 to_normalized(const Points2& px, ImageSize image) {
  Points2 out(px.rows(), 2);
  out.col(0) = (2.0 / image.width) * px.col(0).array() - 1.0;
  out.col(1) = (2.0 / image.height) * px.col(1).array() - 1.0;
  return out;
}

std::vector<std::vector<double>> instance_cues(const Scene& scene, const PyramidConfig& pyramid) {
  constexpr int C = ToyRegressor::kInstanceFeatures;
  std::vector<std::vector<double>> cues;
  for (int k = 0; k < pyramid.num_levels(); ++k) {
    const PyramidLevel& level = pyramid.levels[static_cast<std::size_t>(k)];
    const int G = level.grid;
    std::vector<double> c(static_cast<std::size_t>(G) * G * C, 0.0);
    for (int j = 0; j < G; ++j) {
      for (int i = 0; i < G; ++i) {
        double* cell = c.data() + (static_cast<std::size_t>(j) * G + i) * C;
        cell[2] = 1.0;
        for (const auto& p : scene.persons) {
          const double dx = p.center.x() * G / scene.image.width - (i + 0.5);
          const double dy = p.center.y() * G / scene.image.height - (j + 0.5);
          const double e = std::exp(-0.5 * (dx * dx + dy * dy));
          const double s = compute_scale(p.height, p.width);
          const bool gated = s >= level.scale_lo && s < level.scale_hi;
          cell[1] = std::max(cell[1], e);
          if (gated) cell[0] = std::max(cell[0], e);
        }
      }
    }
    cues.push_back(std::move(c));
  }
  return cues;
}

struct PersonForward {
  ToyRegressor::Forward net;
  VecX params;
  CameraParams camera;
  LbsResult lbs;
  MeshPrediction mesh;
  Points2 keypoints_px;
  double z = 0.0;
};

PersonForward forward_person(const TrainingProblem& problem, const TrainingScene& scene, const TrainingPerson& person,
                             const ToyRegressor& reg) {
  PersonForward f;
  f.net = reg.forward(person.features);
  f.params = ToyRegressor::parameters_from_head(f.net.head);
  const int Jm = problem.model.num_joints();
  std::vector<Mat3> rots(static_cast<std::size_t>(Jm));
  for (int j = 0; j < Jm; ++j) rots[static_cast<std::size_t>(j)] = rot6d_to_matrix(f.params.segment<6>(6 * j));
  const VecX beta = f.params.segment(channel::kShape, channel::kShapeDim);
  f.camera = {f.params[channel::kCamera], f.params[channel::kCamera + 1], f.params[channel::kCamera + 2]};
  f.lbs = lbs_forward(problem.model, rots, beta);
  f.mesh.theta = f.params.segment(channel::kPose, channel::kPoseDim);
  f.mesh.beta = beta;
  f.mesh.vertices = f.lbs.vertices;
  f.mesh.keypoints3d = regress_keypoints(problem.model, f.lbs.vertices);
  f.keypoints_px = project_weak_perspective(f.mesh.keypoints3d, f.camera, scene.image);
  f.mesh.keypoints2d = to_normalized(f.keypoints_px, scene.image);
  f.mesh.confidence = f.params[channel::kConfidence];
  f.z = depth_from_camera(f.camera, scene.globals);
  return f;
}

InstanceMap instance_prediction(const TrainingScene& scene, const ToyRegressor& reg) {
  constexpr int C = ToyRegressor::kInstanceFeatures;
  InstanceMap pred;
  for (const auto& gt : scene.gt_instance.levels) pred.levels.emplace_back(gt.grid, 1);
  for (std::size_t k = 0; k < pred.levels.size(); ++k) {
    auto& level = pred.levels[k];
    for (std::size_t c = 0; c < level.data.size(); ++c)
      level.data[c] = sigmoid(reg.instance_logit(scene.cues[k].data() + c * C));
  }
  return pred;
}

}  // namespace

TrainingProblem prepare_training(const std::vector<Scene>& scenes, const BodyModelSpec& model,
                                 const TrainOptions& options) {
  options.validate();
  if (scenes.empty()) fail(ErrorCode::InvalidConfig, "training needs at least one scene");
  TrainingProblem problem;
  problem.model = model;
  problem.oks_constants = default_oks_constants(model.num_keypoints());
  for (const Scene& scene : scenes) {
    if (scene.persons.empty()) fail(ErrorCode::InvalidConfig, "training scene without persons");
    TrainingScene ts;
    ts.image = scene.image;
    ts.globals = {options.globals.focal, static_cast<double>(scene.image.long_edge())};
    for (int m = 0; m < static_cast<int>(scene.persons.size()); ++m) {
      const PersonAnnotation& ann = scene.persons[static_cast<std::size_t>(m)];
      TrainingPerson tp;
      tp.features = scene_person_features(scene, m, options.noise);
      tp.target.theta = ann.pose6d;
      tp.target.beta = ann.beta;
      const LbsResult gt = lbs_forward(model, PoseParams::from_rot6d(ann.pose6d), ann.beta);
      tp.target.vertices = gt.vertices;
      tp.target.keypoints3d = ann.keypoints3d;
      tp.target.keypoints2d = to_normalized(ann.keypoints2d, scene.image);
      tp.target.visibility = ann.visibility;
      tp.keypoints_px = ann.keypoints2d;
      tp.camera = ann.camera ? *ann.camera
                             : camera_for_person(ann.center, compute_scale(ann.height, ann.width), scene.image, 1.0,
                                                 gt.joints.row(model.root()).transpose());
      tp.area = ann.area();
      ts.persons.push_back(std::move(tp));
    }
    ts.gt_depth = scene.depths();
    Rng rng(derive_seed(options.seed ^ 0x70736575646fULL, scene.seed));
    ts.relations = make_pseudo_relations(ts.gt_depth, options.pseudo_sigma, options.rank_threshold, rng);
    ts.gt_instance = encode_gt(scene.persons, scene.image, options.pyramid, ts.globals).instance;
    ts.cues = instance_cues(scene, options.pyramid);
    problem.scenes.push_back(std::move(ts));
  }
  return problem;
}

ToyRegressor initial_regressor(const TrainingProblem& problem, const TrainOptions& options) {
  std::vector<VecX> targets;
  for (const auto& s : problem.scenes) {
    for (std::size_t m = 0; m < s.persons.size(); ++m) {
      const auto& tp = s.persons[m];
      VecX t = VecX::Zero(channel::kCount);
      t.segment(channel::kPose, channel::kPoseDim) = tp.target.theta;
      t.segment(channel::kShape, channel::kShapeDim) = tp.target.beta;
      t[channel::kCamera] = std::log(tp.camera.scale);
      t[channel::kCamera + 1] = tp.camera.tx;
      t[channel::kCamera + 2] = tp.camera.ty;
      t[channel::kConfidence] = 1.0;
      t[channel::kDepth] = s.gt_depth[m];
      targets.push_back(std::move(t));
    }
  }
  const auto n = static_cast<double>(targets.size());
  VecX mean = VecX::Zero(channel::kCount);
  for (const auto& t : targets) mean += t;
  mean /= n;
  VecX var = VecX::Zero(channel::kCount);
  for (const auto& t : targets) var += (t - mean).cwiseAbs2();
  VecX scale = (var / n).cwiseSqrt().cwiseMax(0.05);
  // OKS targets move during training; start from a typical value.
  mean[channel::kConfidence] = 0.8;
  scale[channel::kConfidence] = 0.2;
  const auto F = problem.scenes.front().persons.front().features.size();
  VecX in_mean = VecX::Zero(F);
  for (const auto& s : problem.scenes)
    for (const auto& tp : s.persons) in_mean += tp.features;
  in_mean /= n;
  VecX in_var = VecX::Zero(F);
  for (const auto& s : problem.scenes)
    for (const auto& tp : s.persons) in_var += (tp.features - in_mean).cwiseAbs2();
  VecX in_scale = (in_var / n).cwiseSqrt();
  for (auto& v : in_scale) v = v > 1e-6 ? v : 1.0;

  Rng rng(derive_seed(options.seed, 0x696e6974ULL));
  ToyRegressor reg = ToyRegressor::init(static_cast<int>(F), options.hidden, mean, scale, rng, in_mean, in_scale);
  reg.inst_w << 0.0, 0.0, std::log(0.01 / 0.99);
  return reg;
}

FrozenTargets freeze_targets(const TrainingProblem& problem, const ToyRegressor& reg) {
  FrozenTargets f;
  for (const auto& scene : problem.scenes) {
    std::vector<double> oks_s, conf_s;
    for (const auto& person : scene.persons) {
      const PersonForward pf = forward_person(problem, scene, person, reg);
      const bool any_visible = (person.target.visibility.array() > 0.0).any();
      oks_s.push_back(any_visible ? oks(pf.keypoints_px, person.keypoints_px, person.target.visibility, person.area,
                                        problem.oks_constants)
                                  : 0.0);
      conf_s.push_back(std::clamp(pf.mesh.confidence, 0.0, 1.0));
    }
    f.oks.push_back(std::move(oks_s));
    f.rank_confidence.push_back(std::move(conf_s));
  }
  return f;
}

ObjectiveResult training_objective(const TrainingProblem& problem, const ToyRegressor& reg, const LossWeights& weights,
                                   const FrozenTargets& frozen, const FocalParams& focal, bool with_grad) {
  constexpr int C = ToyRegressor::kInstanceFeatures;
  const double inv_scenes = 1.0 / static_cast<double>(problem.scenes.size());
  ObjectiveResult out;
  ToyRegressor grad = with_grad ? reg.zeros_like() : ToyRegressor{};

  for (std::size_t si = 0; si < problem.scenes.size(); ++si) {
    const TrainingScene& scene = problem.scenes[si];
    SceneLossInput in;
    in.pred_instance = instance_prediction(scene, reg);
    in.gt_instance = scene.gt_instance;
    std::vector<PersonForward> fwd;
    for (std::size_t m = 0; m < scene.persons.size(); ++m) {
      fwd.push_back(forward_person(problem, scene, scene.persons[m], reg));
      MeshTarget target = scene.persons[m].target;
      target.confidence = frozen.oks[si][m];
      in.gt_mesh.push_back(std::move(target));
      in.pred_mesh.push_back(fwd.back().mesh);
      in.pred_depth.push_back(fwd.back().params[channel::kDepth]);
      in.rank_depth.push_back(fwd.back().z);
    }
    in.gt_depth = scene.gt_depth;
    in.rank_confidence = frozen.rank_confidence[si];
    in.relations = scene.relations;
    const TotalLossResult loss = total_loss(in, weights, focal);

    out.value += inv_scenes * loss.value;
    if (out.breakdown.empty()) {
      out.breakdown = {{"inst", 0.0}, {"mesh", 0.0}, {"depth", 0.0}, {"rank", 0.0}, {"total", 0.0}};
    }
    for (const auto& [name, v] : loss.breakdown)
      for (auto& entry : out.breakdown)
        if (entry.first == name) entry.second += inv_scenes * v;
    if (!with_grad) continue;

    for (std::size_t k = 0; k < in.pred_instance.levels.size(); ++k) {
      const auto& p = in.pred_instance.levels[k].data;
      const auto& g = loss.grad_instance.levels[k].data;
      for (std::size_t c = 0; c < p.size(); ++c) {
        const double gz = inv_scenes * g[c] * p[c] * (1.0 - p[c]);
        if (gz == 0.0) continue;
        for (int f = 0; f < C; ++f) grad.inst_w[f] += gz * scene.cues[k][c * C + static_cast<std::size_t>(f)];
      }
    }

    for (std::size_t m = 0; m < scene.persons.size(); ++m) {
      const PersonForward& pf = fwd[m];
      const MeshGradient& gm = loss.grad_mesh[m];
      Points2 g_px(gm.keypoints2d.rows(), 2);
      g_px.col(0) = (2.0 / scene.image.width) * gm.keypoints2d.col(0);
      g_px.col(1) = (2.0 / scene.image.height) * gm.keypoints2d.col(1);
      const ProjectionGradient pg =
          project_weak_perspective_backward(pf.mesh.keypoints3d, pf.camera, scene.image, g_px);
      const Points3 g_kp3d = gm.keypoints3d + pg.joints;
      const Points3 g_verts = gm.vertices + problem.model.keypoint_regressor.transpose() * g_kp3d;
      const LbsGradient lg = lbs_backward(problem.model, pf.lbs, g_verts, Points3());

      VecX g_head = VecX::Zero(channel::kCount);
      for (int j = 0; j < problem.model.num_joints(); ++j)
        g_head.segment<6>(6 * j) = gm.theta.segment<6>(6 * j) +
                                   rot6d_backward(pf.params.segment<6>(6 * j), lg.rotations[static_cast<std::size_t>(j)]);
      g_head.segment(channel::kShape, channel::kShapeDim) = gm.beta + lg.beta;
      const double g_scale =
          pg.camera.scale + loss.grad_rank_depth[static_cast<Eigen::Index>(m)] *
                                depth_from_camera_derivative(pf.camera, scene.globals);
      g_head[channel::kCamera] = g_scale * pf.camera.scale;
      g_head[channel::kCamera + 1] = pg.camera.tx;
      g_head[channel::kCamera + 2] = pg.camera.ty;
      g_head[channel::kConfidence] = gm.confidence;
      g_head[channel::kDepth] = loss.grad_depth[static_cast<Eigen::Index>(m)];
      reg.backward(pf.net, inv_scenes * g_head, grad);
    }
  }
  if (with_grad) out.grad = grad.flatten();
  return out;
}

TrainResult train_toy(const TrainingProblem& problem, const LossWeights& weights, const TrainOptions& options) {
  options.validate();
  weights.validate();
  TrainResult result{initial_regressor(problem, options), {}};
  VecX w = result.model.flatten();
  for (int step = 0; step <= options.steps; ++step) {
    const bool update = step < options.steps;
    ObjectiveResult obj;
    try {
      const FrozenTargets frozen = freeze_targets(problem, result.model);
      obj = training_objective(problem, result.model, weights, frozen, options.focal, update);
    } catch (const Error& e) {
      // After an update, a degenerate camera or rotation means the weights ran away.
      if (step == 0) throw;
      fail(ErrorCode::DivergedLoss, "training diverged at step " + std::to_string(step) + ": " + e.what());
    }
    if (!std::isfinite(obj.value)) fail(ErrorCode::DivergedLoss, "training loss became non-finite at step " + std::to_string(step));
    result.history.push_back(std::move(obj.breakdown));
    if (!update) break;
    if (options.lr == 0.0) continue;
    w -= options.lr * obj.grad;
    if (!w.allFinite()) fail(ErrorCode::DivergedLoss, "weights became non-finite at step " + std::to_string(step));
    result.model.unflatten(w);
  }
  return result;
}

TrainResult train_toy(const std::vector<Scene>& scenes, const BodyModelSpec& model, const LossWeights& weights,
                      const TrainOptions& options) {
  return train_toy(prepare_training(scenes, model, options), weights, options);
}

double check_training_gradient(const TrainingProblem& problem, const ToyRegressor& reg, const LossWeights& weights,
                               const FocalParams& focal, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) fail(ErrorCode::InvalidConfig, "fraction must lie in (0, 1]");
  const FrozenTargets frozen = freeze_targets(problem, reg);
  const VecX analytic = training_objective(problem, reg, weights, frozen, focal, true).grad;
  const VecX w0 = reg.flatten();
  const auto n = static_cast<std::size_t>(w0.size());
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const std::size_t take = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
  // Partial Fisher-Yates for the subset.
  for (std::size_t k = 0; k < take; ++k) std::swap(idx[k], idx[k + rng.index(n - k)]);

  ToyRegressor probe = reg;
  VecX a(static_cast<Eigen::Index>(take)), fd(static_cast<Eigen::Index>(take));
  for (std::size_t k = 0; k < take; ++k) {
    const Eigen::Index i = idx[k];
    const double h = 1e-6 * std::max(1.0, std::abs(w0[i]));
    VecX w = w0;
    w[i] = w0[i] + h;
    probe.unflatten(w);
    const double fp = training_objective(problem, probe, weights, frozen, focal, false).value;
    w[i] = w0[i] - h;
    probe.unflatten(w);
    const double fm = training_objective(problem, probe, weights, frozen, focal, false).value;
    fd[static_cast<Eigen::Index>(k)] = (fp - fm) / (2.0 * h);
    a[static_cast<Eigen::Index>(k)] = analytic[i];
  }
  return relative_error(a, fd);
}

std::vector<PersonPrediction> predict_scene(const ToyRegressor& reg, const Scene& scene, const FeatureNoise& noise,
                                            const CameraGlobals& globals) {
  const CameraGlobals g{globals.focal, static_cast<double>(scene.image.long_edge())};
  std::vector<PersonPrediction> out;
  for (int m = 0; m < static_cast<int>(scene.persons.size()); ++m) {
    PersonPrediction p;
    p.parameters = reg.predict(scene_person_features(scene, m, noise));
    p.camera = {p.parameters[channel::kCamera], p.parameters[channel::kCamera + 1], p.parameters[channel::kCamera + 2]};
    p.camera_depth = depth_from_camera(p.camera, g);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace bmp
