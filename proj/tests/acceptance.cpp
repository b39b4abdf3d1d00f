// Acceptance checks: prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "bmp/ablation.hpp"
#include "bmp/augmentation.hpp"
#include "bmp/body_model.hpp"
#include "bmp/camera.hpp"
#include "bmp/encoding.hpp"
#include "bmp/finite_diff.hpp"
#include "bmp/losses.hpp"
#include "bmp/metrics.hpp"
#include "bmp/nms.hpp"
#include "bmp/rotation.hpp"
#include "bmp/scene.hpp"
#include "bmp/training.hpp"
#include "cli_runner.hpp"

using namespace bmp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vec3 random_vec3(Rng& rng, double sigma) { return Vec3(rng.normal(0, sigma), rng.normal(0, sigma), rng.normal(0, sigma)); }

Points3 random_points(Rng& rng, int n, double sigma = 1.0) {
  Points3 p(n, 3);
  for (int r = 0; r < n; ++r) p.row(r) = random_vec3(rng, sigma).transpose();
  return p;
}

// Round trip and depth identity share one pass over the scenes.
struct RoundTripStats {
  int scenes = 0;
  long persons = 0;
  long expected = 0;
  long recovered = 0;
  long spurious = 0;
  double worst_param_error = 0.0;
  long identity_checked = 0;
  long identity_failed = 0;
  double seconds = 0.0;
};

RoundTripStats run_round_trip_suite() {
  RoundTripStats st;
  const auto t0 = Clock::now();
  const BodyModelSpec model = make_toy_model({});
  const PyramidConfig pyramid = PyramidConfig::standard();
  const SceneConfig cfg;  // 1 to 8 persons
  const CameraGlobals globals = cfg.globals();
  for (int i = 0; i < 1000; ++i) {
    const Scene scene = generate_collision_free_scene(derive_seed(2024, static_cast<std::uint64_t>(i)), cfg, model, pyramid);
    const EncodeResult enc = encode_gt(scene.persons, scene.image, pyramid, globals);
    const std::vector<Detection> dets = decode(enc.instance, enc.mesh, 0.5);
    ++st.scenes;
    st.persons += static_cast<long>(scene.persons.size());

    // Every (person, level) the person is assigned to must be found exactly once.
    std::set<std::pair<std::size_t, int>> wanted;
    for (std::size_t m = 0; m < scene.persons.size(); ++m) {
      const auto& p = scene.persons[m];
      for (int k : assign_levels(compute_scale(p.height, p.width), pyramid)) wanted.insert({m, k});
    }
    st.expected += static_cast<long>(wanted.size());
    std::set<std::pair<std::size_t, int>> found;
    for (const Detection& d : dets) {
      const VecX got = d.parameters();
      std::size_t best = scene.persons.size();
      double best_err = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < scene.persons.size(); ++m) {
        const auto& p = scene.persons[m];
        const VecX want = person_parameter_vector(p, *p.camera);
        const double err = (got - want).cwiseAbs().maxCoeff();
        if (err < best_err) best_err = err, best = m;
      }
      const bool ok = best_err <= 1e-6 && wanted.count({best, d.level}) && !found.count({best, d.level});
      if (ok) {
        found.insert({best, d.level});
        st.worst_param_error = std::max(st.worst_param_error, best_err);
      } else {
        ++st.spurious;
      }
      ++st.identity_checked;
      const double z = depth_from_camera(d.camera, globals);
      if (!(z * d.camera.scale * globals.long_edge == 2 * globals.focal)) ++st.identity_failed;
    }
    st.recovered += static_cast<long>(found.size());
  }
  st.seconds = seconds_since(t0);
  return st;
}

Outcome round_trip(const RoundTripStats& st) {
  const bool pass = st.recovered == st.expected && st.spurious == 0 && st.seconds < 60.0;
  return {pass, fmt("%d scenes, %ld persons, %ld/%ld (person, level) recovered, %ld spurious, max |err| %.2e, %.1f s",
                    st.scenes, st.persons, st.recovered, st.expected, st.spurious, st.worst_param_error, st.seconds)};
}

Outcome depth_identity(const RoundTripStats& st) {
  return {st.identity_checked > 0 && st.identity_failed == 0,
          fmt("z*s*alpha == 2f on %ld/%ld decoded detections", st.identity_checked - st.identity_failed,
              st.identity_checked)};
}

// Gradient suite ------------------------------------------------------------

struct GradStats {
  int points = 0;
  double worst = 0.0;
  void add(double e) {
    ++points;
    worst = std::max(worst, e);
  }
};

GradStats grad_pair(Rng& rng) {
  GradStats g;
  const OrdinalRelation rel[] = {OrdinalRelation::kFirstCloser, OrdinalRelation::kSecondCloser,
                                 OrdinalRelation::kSameDepth};
  for (int t = 0; t < 100; ++t) {
    const OrdinalRelation r = rel[t % 3];
    VecX x(2);
    x << rng.normal(5, 3), rng.normal(5, 3);
    const PairLoss l = pair_ordinal_loss(x[0], x[1], r);
    VecX analytic(2);
    analytic << l.grad_m, l.grad_n;
    g.add(relative_error(analytic, finite_diff_grad([&](const VecX& v) { return pair_ordinal_loss(v[0], v[1], r).loss; }, x)));
  }
  return g;
}

GradStats grad_rank(Rng& rng) {
  GradStats g;
  for (int t = 0; t < 100; ++t) {
    const int n = rng.integer(2, 8);
    std::vector<double> z(static_cast<std::size_t>(n)), c(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
      z[static_cast<std::size_t>(m)] = rng.uniform(1, 15);
      c[static_cast<std::size_t>(m)] = rng.uniform(0, 1);
      d[static_cast<std::size_t>(m)] = rng.uniform(1, 15);
    }
    const PairRelations rel = PairRelations::from_depths(d, 0.5);
    const ScalarLoss l = rank_loss(z, c, rel);
    const auto f = [&](const VecX& v) { return rank_loss(std::vector<double>(v.data(), v.data() + n), c, rel).value; };
    g.add(relative_error(l.grad, finite_diff_grad(f, Eigen::Map<const VecX>(z.data(), n))));
  }
  return g;
}

GradStats grad_depth(Rng& rng) {
  GradStats g;
  for (int t = 0; t < 100; ++t) {
    const int n = rng.integer(1, 8);
    std::vector<double> p(static_cast<std::size_t>(n)), q(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
      p[static_cast<std::size_t>(m)] = rng.uniform(1, 15);
      q[static_cast<std::size_t>(m)] = rng.uniform(1, 15);
    }
    const auto f = [&](const VecX& v) { return depth_loss(std::vector<double>(v.data(), v.data() + n), q).value; };
    g.add(relative_error(depth_loss(p, q).grad, finite_diff_grad(f, Eigen::Map<const VecX>(p.data(), n))));
  }
  return g;
}

template <typename M>
M random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double sigma) {
  M m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0, sigma);
  return m;
}

GradStats grad_mesh(Rng& rng) {
  GradStats g;
  const int J = 17, V = 12;
  for (int t = 0; t < 100; ++t) {
    MeshTarget gt;
    gt.theta = random_matrix<VecX>(rng, 144, 1, 1.0);
    gt.beta = random_matrix<VecX>(rng, 10, 1, 1.0);
    gt.keypoints3d = random_matrix<Points3>(rng, J, 3, 1.0);
    gt.vertices = random_matrix<Points3>(rng, V, 3, 1.0);
    gt.keypoints2d = random_matrix<Points2>(rng, J, 2, 100.0);
    gt.visibility = VecX(J);
    for (int k = 0; k < J; ++k) gt.visibility[k] = rng.bernoulli(0.8) ? 1.0 : 0.0;
    gt.visibility[0] = 1.0;
    gt.confidence = rng.uniform();
    MeshPrediction p;
    p.theta = gt.theta + random_matrix<VecX>(rng, 144, 1, 0.3);
    p.beta = gt.beta + random_matrix<VecX>(rng, 10, 1, 0.3);
    p.keypoints3d = gt.keypoints3d + random_matrix<Points3>(rng, J, 3, 0.3);
    p.vertices = gt.vertices + random_matrix<Points3>(rng, V, 3, 0.3);
    p.keypoints2d = gt.keypoints2d + random_matrix<Points2>(rng, J, 2, 5.0);
    p.confidence = rng.uniform();

    // Flatten every predicted number.
    const auto pack = [](const MeshPrediction& m) {
      VecX x(m.theta.size() + m.beta.size() + m.keypoints3d.size() + m.vertices.size() + m.keypoints2d.size() + 1);
      x << m.theta, m.beta, m.keypoints3d.reshaped(), m.vertices.reshaped(), m.keypoints2d.reshaped(), m.confidence;
      return x;
    };
    const auto unpack = [&](const VecX& x) {
      MeshPrediction m = p;
      Eigen::Index at = 0;
      const auto take = [&](auto& dst) {
        dst.reshaped() = x.segment(at, dst.size());
        at += dst.size();
      };
      take(m.theta), take(m.beta), take(m.keypoints3d), take(m.vertices), take(m.keypoints2d);
      m.confidence = x[at];
      return m;
    };
    const LossWeights w;
    const MeshLossResult res = mesh_loss({p}, {gt}, w);
    const auto f = [&](const VecX& x) { return mesh_loss({unpack(x)}, {gt}, w).terms.total; };
    g.add(relative_error(pack(res.grads[0]), finite_diff_grad(f, pack(p))));
  }
  return g;
}

GradStats grad_focal(Rng& rng) {
  GradStats g;
  const PyramidConfig pyramid = PyramidConfig::standard();
  for (int t = 0; t < 100; ++t) {
    InstanceMap pred, gt;
    // Two of the five levels keep each check small.
    for (int k : {4, t % 4}) {
      pred.levels.emplace_back(pyramid.levels[static_cast<std::size_t>(k)].grid, 1);
      gt.levels.emplace_back(pyramid.levels[static_cast<std::size_t>(k)].grid, 1);
    }
    std::vector<double*> slots;
    for (std::size_t l = 0; l < pred.levels.size(); ++l) {
      for (std::size_t c = 0; c < pred.levels[l].data.size(); ++c) {
        pred.levels[l].data[c] = rng.uniform(0.01, 0.99);
        gt.levels[l].data[c] = rng.bernoulli(0.1) ? 1.0 : 0.0;
        slots.push_back(&pred.levels[l].data[c]);
      }
    }
    const FocalLossResult res = instance_focal_loss(pred, gt);
    VecX x(static_cast<Eigen::Index>(slots.size())), analytic(x.size());
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < pred.levels.size(); ++l)
      for (std::size_t c = 0; c < pred.levels[l].data.size(); ++c, ++at) {
        x[at] = pred.levels[l].data[c];
        analytic[at] = res.grad.levels[l].data[c];
      }
    const auto f = [&](const VecX& v) {
      InstanceMap q = pred;
      Eigen::Index i = 0;
      for (auto& lvl : q.levels)
        for (auto& c : lvl.data) c = v[i++];
      return instance_focal_loss(q, gt).value;
    };
    g.add(relative_error(analytic, finite_diff_grad(f, x)));
  }
  return g;
}

GradStats grad_regressor(Rng& rng) {
  GradStats g;
  const BodyModelSpec model = make_toy_model({});
  SceneConfig scfg;
  scfg.max_persons = 4;
  const std::vector<Scene> scenes = generate_scenes(77, 3, scfg, model);
  TrainOptions opt;
  opt.seed = 5;
  opt.hidden = 8;
  opt.steps = 30;
  opt.noise.seed = 6;
  const TrainingProblem problem = prepare_training(scenes, model, opt);
  const ToyRegressor trained = train_toy(problem, LossWeights{}, opt).model;
  const VecX base = trained.flatten();
  for (int t = 0; t < 100; ++t) {
    ToyRegressor point = trained;
    VecX w = base;
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] += rng.normal(0, 0.02) * std::max(1.0, std::abs(w[i]));
    point.unflatten(w);
    g.add(check_training_gradient(problem, point, LossWeights{}, FocalParams{}, 0.01, rng));
  }
  return g;
}

Outcome gradient_suite() {
  Rng rng(31);
  const auto t0 = Clock::now();
  struct Item {
    const char* name;
    GradStats stats;
    double tol;
  };
  std::vector<Item> items = {{"pair", grad_pair(rng), 1e-5},   {"rank", grad_rank(rng), 1e-5},
                             {"depth", grad_depth(rng), 1e-5}, {"mesh", grad_mesh(rng), 1e-5},
                             {"focal", grad_focal(rng), 1e-5}, {"regressor", grad_regressor(rng), 1e-4}};
  bool pass = true;
  std::string detail;
  for (const auto& it : items) {
    pass = pass && it.stats.points == 100 && it.stats.worst < it.tol;
    detail += fmt("%s %.1e (%d pts), ", it.name, it.stats.worst, it.stats.points);
  }
  detail += fmt("%.1f s", seconds_since(t0));
  return {pass, "worst relative error: " + detail};
}

// Level assignment -----------------------------------------------------------

Outcome assignment_sweep() {
  const PyramidConfig pyramid = PyramidConfig::standard();
  int single = 0, double_hits = 0, bad = 0;
  for (int s = 1; s <= 1000; ++s) {
    const auto levels = assign_levels(static_cast<double>(s), pyramid);
    if (levels.size() == 1) ++single;
    else if (levels.size() == 2 && levels[1] == levels[0] + 1) ++double_hits;
    else ++bad;
  }
  // Inclusive lower and exclusive upper bounds of [<64), [32,128), [64,256), [128,512), [256,).
  const std::map<double, std::vector<int>> boundaries = {
      {32, {0, 1}}, {64, {1, 2}}, {128, {2, 3}}, {256, {3, 4}}, {512, {4}}};
  int boundary_ok = 0;
  for (const auto& [s, want] : boundaries) boundary_ok += assign_levels(s, pyramid) == want;
  const bool below_ok = assign_levels(std::nextafter(32.0, 0.0), pyramid) == std::vector<int>{0} &&
                        assign_levels(std::nextafter(512.0, 0.0), pyramid) == std::vector<int>{3, 4};
  return {bad == 0 && boundary_ok == 5 && below_ok,
          fmt("s=1..1000: %d single, %d adjacent pairs, %d invalid; boundaries %d/5 per rule", single, double_hits, bad,
              boundary_ok)};
}

// Ablation ---------------------------------------------------------------------

Outcome ablation() {
  const auto t0 = Clock::now();
  const AblationConfig cfg;
  double sum = 0.0;
  bool every_positive = true;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const AblationReport r = evaluate_ablation(seed, cfg);
    sum += r.improvement();
    every_positive = every_positive && r.improvement() > 0;
    per_seed += fmt("seed %llu %.2f%% vs %.2f%%; ", static_cast<unsigned long long>(seed), 100 * r.with_rank.accuracy,
                    100 * r.without_rank.accuracy);
    std::fflush(stdout);
  }
  const double mean_pts = 100 * sum / 3;
  const double secs = seconds_since(t0);
  return {mean_pts >= 5.0 && every_positive && secs < 600,
          per_seed + fmt("mean improvement %+.2f points, %.0f s", mean_pts, secs)};
}

// Procrustes -------------------------------------------------------------------

Outcome procrustes() {
  Rng rng(41);
  double worst_exact = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Points3 X = random_points(rng, rng.integer(3, 30), 0.5);
    const Mat3 R = axis_angle_to_matrix(random_vec3(rng, 2.0));
    const double s = std::exp(rng.uniform(-1.5, 1.5));
    const Vec3 tr = random_vec3(rng, 3.0);
    const Points3 Y = ((s * X * R.transpose()).rowwise() + tr.transpose()).eval();
    worst_exact = std::max(worst_exact, pa_mpjpe(X, Y));
  }
  int pa_violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = rng.integer(3, 24);
    const Points3 A = random_points(rng, n);
    const Points3 B = random_points(rng, n);
    if (pa_mpjpe(A, B) > mpjpe(A, B) + 1e-12) ++pa_violations;
  }
  int reflections = 0;
  for (int t = 0; t < 1000; ++t) {
    const Points3 X = random_points(rng, rng.integer(3, 20));
    Points3 Y = X;
    Y.col(t % 3) *= -1;  // mirror image
    if (procrustes_align(X, Y).rotation.determinant() < 0) ++reflections;
  }
  return {worst_exact < 1e-8 && pa_violations == 0 && reflections == 0,
          fmt("max PA-MPJPE under similarity %.1e; PA > MPJPE in %d/1000; det(R) = -1 in %d/1000 mirrored inputs",
              worst_exact, pa_violations, reflections)};
}

// Kinematics -------------------------------------------------------------------

Outcome kinematics() {
  const BodyModelSpec m = make_toy_model({});
  Rng rng(51);
  int identity_mismatch = 0;
  for (int t = 0; t < 20; ++t) {
    VecX beta(m.num_betas());
    for (Eigen::Index k = 0; k < beta.size(); ++k) beta[k] = t == 0 ? 0.0 : rng.normal(0, 1);
    if (!(lbs_forward(m, PoseParams::rest(m.num_joints()), beta).vertices == shape_mesh(m, beta))) ++identity_mismatch;
  }
  double worst_rigid = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::vector<Mat3> pose;
    for (int j = 0; j < m.num_joints(); ++j) pose.push_back(axis_angle_to_matrix(random_vec3(rng, 0.4)));
    VecX beta(m.num_betas());
    for (Eigen::Index k = 0; k < beta.size(); ++k) beta[k] = rng.normal(0, 1);
    const LbsResult base = lbs_forward(m, pose, beta);
    const Mat3 Q = axis_angle_to_matrix(random_vec3(rng, 1.5));
    auto turned = pose;
    turned[static_cast<std::size_t>(m.root())] = Q * pose[static_cast<std::size_t>(m.root())];
    const LbsResult moved = lbs_forward(m, turned, beta);
    const Vec3 root = base.joints.row(m.root()).transpose();
    const Points3 expect = ((base.vertices.rowwise() - root.transpose()) * Q.transpose()).rowwise() + root.transpose();
    worst_rigid = std::max(worst_rigid, (moved.vertices - expect).cwiseAbs().maxCoeff());
  }
  double worst_6d = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Mat3 R = axis_angle_to_matrix(random_vec3(rng, 2.0));
    worst_6d = std::max(worst_6d, (rot6d_to_matrix(matrix_to_rot6d(R)) - R).cwiseAbs().maxCoeff());
  }
  return {identity_mismatch == 0 && worst_rigid < 1e-10 && worst_6d < 1e-9,
          fmt("identity pose inexact in %d/20; max rigid deviation %.1e; max 6D round-trip error %.1e", identity_mismatch,
              worst_rigid, worst_6d)};
}

// Augmentation -----------------------------------------------------------------

Outcome augmentation() {
  const AugmentConfig cfg;  // probability 0.5
  const Image canvas(160, 160, 3, 0);
  int applied = 0, area_violations = 0;
  double lo_ratio = 1.0, hi_ratio = 0.0;
  const int n = 10000;
  for (int t = 0; t < n; ++t) {
    Rng rng(derive_seed(61, static_cast<std::uint64_t>(t)));
    Points2 kp(5, 2);
    for (int r = 0; r < 5; ++r) kp.row(r) << rng.uniform(20, 140), rng.uniform(20, 140);
    const double A = rng.uniform(400, 12000);
    const AugmentResult res = apply_keypoint_occlusion(canvas, kp, VecX::Ones(5), A, cfg, rng);
    if (!res.applied) continue;
    ++applied;
    const double ratio = static_cast<double>(res.record->opaque_area) / A;
    lo_ratio = std::min(lo_ratio, ratio);
    hi_ratio = std::max(hi_ratio, ratio);
    if (ratio < 0.1 || ratio > 0.2) ++area_violations;
  }
  const double rate = static_cast<double>(applied) / n;
  return {rate >= 0.47 && rate <= 0.53 && area_violations == 0,
          fmt("rate %.4f over %d trials; opaque area / A in [%.4f, %.4f], %d outside [0.1, 0.2]", rate, n, lo_ratio,
              hi_ratio, area_violations)};
}

// NMS --------------------------------------------------------------------------

double oks_reference(const Points2& a, const Points2& b, double area, const VecX& k) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    sum += std::exp(-(a.row(i) - b.row(i)).squaredNorm() / (2 * area * k[i] * k[i]));
  return sum / static_cast<double>(a.rows());
}

std::vector<std::size_t> nms_reference(const std::vector<double>& score, const std::vector<Points2>& kp,
                                       const std::vector<double>& area, double thr, const VecX& k) {
  std::vector<bool> used(score.size(), false);
  std::vector<std::size_t> kept, order;
  for (std::size_t step = 0; step < score.size(); ++step) {
    std::size_t best = score.size();
    for (std::size_t i = 0; i < score.size(); ++i)
      if (!used[i] && (best == score.size() || score[i] > score[best])) best = i;
    used[best] = true;
    bool keep = true;
    for (std::size_t q : kept) keep = keep && oks_reference(kp[best], kp[q], area[q], k) < thr;
    if (keep) kept.push_back(best);
  }
  return kept;
}

Outcome nms_oracle() {
  Rng rng(71);
  int agree = 0;
  const int sets = 500;
  for (int t = 0; t < sets; ++t) {
    const int n = rng.integer(1, 8);
    const int J = 17;
    std::vector<Detection> dets(static_cast<std::size_t>(n));
    std::vector<Points2> kps;
    std::vector<double> areas, scores;
    const Vec2 anchor(rng.uniform(100, 700), rng.uniform(100, 400));
    for (auto& d : dets) {
      d.score = std::round(rng.uniform() * 5) / 5;
      scores.push_back(d.score);
      Points2 kp(J, 2);
      const Vec2 c = anchor + Vec2(rng.normal(0, 20), rng.normal(0, 20));
      for (int i = 0; i < J; ++i) kp.row(i) = (c + Vec2(rng.normal(0, 25), rng.normal(0, 25))).transpose();
      kps.push_back(kp);
      areas.push_back(rng.uniform(500, 10000));
    }
    const double thr = rng.uniform(0.2, 0.9);
    agree += keypoint_nms(dets, kps, areas, thr) == nms_reference(scores, kps, areas, thr, default_oks_constants(J));
  }

  int self_ok = 0, monotone_ok = 0;
  for (int t = 0; t < 100; ++t) {
    const int J = 17;
    Points2 kp(J, 2);
    for (int i = 0; i < J; ++i) kp.row(i) << rng.uniform(0, 800), rng.uniform(0, 500);
    VecX vis = VecX::Ones(J);
    const double area = rng.uniform(200, 20000);
    const VecX k = default_oks_constants(J);
    self_ok += oks(kp, kp, vis, area, k) == 1.0;
    const Vec2 dir = Vec2(rng.normal(0, 1), rng.normal(0, 1)).normalized();
    double prev = 1.0;
    bool mono = true;
    for (int step = 1; step <= 40; ++step) {
      const Points2 moved = kp.rowwise() + (step * 2.0 * dir).transpose();
      const double o = oks(moved, kp, vis, area, k);
      mono = mono && o < prev;
      prev = o;
    }
    monotone_ok += mono;
  }
  return {agree == sets && self_ok == 100 && monotone_ok == 100,
          fmt("%d/%d sets match the reference greedy; OKS self = 1 in %d/100; strictly decreasing in %d/100", agree,
              sets, self_ok, monotone_ok)};
}

// CLI determinism --------------------------------------------------------------

Outcome cli_determinism() {
  using test::run_tool;
  const std::vector<std::vector<std::string>> script = {
      {"model", "gen-toy", "--seed", "9", "--out", "model.bin"},
      {"scene", "generate", "--seed", "9", "--collision-free", "--out", "scene.json"},
      {"scene", "generate", "--seed", "9", "--count", "4", "--jobs", "2", "--out-dir", "scenes"},
      {"encode", "--scene", "scene.json", "--out", "maps.bin"},
      {"decode", "--maps", "maps.bin", "--out", "dets.json"},
      {"decode", "--maps", "maps.bin", "--nms", "--out", "nms.json"},
      {"eval", "--pred", "nms.json", "--scene", "scene.json", "--out", "report.json", "--text", "report.txt"},
      {"train-toy", "--seed", "9", "--count", "4", "--steps", "20", "--out", "reg.json", "--history", "hist.json"},
      {"ablate", "--seed", "9", "--train-scenes", "8", "--heldout-scenes", "8", "--steps", "20", "--out", "ablate.json"},
      {"augment", "--seed", "9", "--scene", "scene.json", "--prob", "1", "--out", "aug.ppm", "--record", "aug.json"},
      {"export-obj", "--detections", "nms.json", "--model", "model.bin", "--out", "mesh.obj"},
  };
  std::map<std::string, std::string> first;
  int failures = 0;
  std::size_t files = 0;
  std::vector<std::filesystem::path> dirs;
  for (int run = 0; run < 2; ++run) {
    const auto dir = dirs.emplace_back(test::fresh_dir("determinism_" + std::to_string(run)));
    for (const auto& cmd : script) failures += run_tool(dir, cmd).exit_code != 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().filename().string().rfind("tool.", 0) == 0) continue;
      const std::string rel = std::filesystem::relative(entry.path(), dir).string();
      const std::string bytes = test::slurp(entry.path());
      if (run == 0) first[rel] = bytes;
      else if (first.count(rel) && first[rel] == bytes) ++files;
    }
  }
  for (const auto& d : dirs) std::filesystem::remove_all(d);
  return {failures == 0 && files == first.size() && !first.empty(),
          fmt("%zu commands, %zu/%zu output files byte-identical across two runs, %d command failures", script.size(),
              files, first.size(), failures)};
}

}  // namespace

// With arguments, only the named criteria run.
int main(int argc, char** argv) {
  const std::set<std::string> only(argv + 1, argv + argc);
  const auto wanted = [&](const std::string& name) { return only.empty() || only.count(name) > 0; };
  RoundTripStats rt;
  if (wanted("round-trip") || wanted("depth-identity")) rt = run_round_trip_suite();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"round-trip", [&] { return round_trip(rt); }},
      {"gradient-suite", gradient_suite},
      {"level-assignment", assignment_sweep},
      {"rank-ablation", ablation},
      {"procrustes", procrustes},
      {"depth-identity", [&] { return depth_identity(rt); }},
      {"kinematics", kinematics},
      {"occlusion-augmentation", augmentation},
      {"nms-oracle", nms_oracle},
      {"cli-determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    if (!wanted(name)) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
