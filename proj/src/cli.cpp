#include "bmp/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "bmp/ablation.hpp"
#include "bmp/atomic_file.hpp"
#include "bmp/augmentation.hpp"
#include "bmp/error.hpp"
#include "bmp/image.hpp"
#include "bmp/map_io.hpp"
#include "bmp/metrics.hpp"
#include "bmp/model_io.hpp"
#include "bmp/nms.hpp"
#include "bmp/serialization.hpp"
#include "bmp/training.hpp"

namespace bmp {

namespace {

LbsResult detection_mesh(const Detection& det, const BodyModelSpec& model) {
  if (det.theta.size() != 6 * model.num_joints())
    fail(ErrorCode::DimensionMismatch, "detection pose does not match the model's joint count");
  if (det.beta.size() != model.num_betas())
    fail(ErrorCode::DimensionMismatch, "detection shape does not match the model's blendshape count");
  return lbs_forward(model, PoseParams::from_rot6d(det.theta), det.beta);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void export_obj(const Detection& detection, const BodyModelSpec& model, const std::filesystem::path& path) {
  const LbsResult mesh = detection_mesh(detection, model);
  std::ostringstream os;
  for (Eigen::Index v = 0; v < mesh.vertices.rows(); ++v)
    os << "v " << format_double(mesh.vertices(v, 0)) << ' ' << format_double(mesh.vertices(v, 1)) << ' '
       << format_double(mesh.vertices(v, 2)) << '\n';
  for (const auto& f : model.faces) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  write_text_atomically(path, os.str());
}

namespace {

struct ImageOptions {
  bool lite = false;
  int width = 0;
  int height = 0;
  double focal = 1000.0;

  ImageSize size() const {
    if (width > 0 && height > 0) return {width, height};
    return lite ? ImageSize{512, 512} : ImageSize{};
  }
  CameraGlobals globals(ImageSize image) const { return {focal, static_cast<double>(image.long_edge())}; }
};

void add_image_options(CLI::App* app, ImageOptions& o, bool with_focal = true) {
  app->add_flag("--lite", o.lite, "512x512 frames instead of 832x512");
  app->add_option("--width", o.width, "frame width in px (overrides --lite)")->check(CLI::PositiveNumber);
  app->add_option("--height", o.height, "frame height in px (overrides --lite)")->check(CLI::PositiveNumber);
  if (with_focal) app->add_option("--focal", o.focal, "focal length f in px")->check(CLI::PositiveNumber);
}

// Long edge α: the frame's unless overridden.
CameraGlobals globals_for(double focal, double long_edge, ImageSize image) {
  return {focal, long_edge > 0 ? long_edge : static_cast<double>(image.long_edge())};
}

BodyModelSpec model_or_default(const std::string& path) {
  return path.empty() ? make_toy_model({}) : load_model(path);
}

Scene read_scene(const std::string& path) { return scene_from_json(parse_json(read_text_file(path))); }

void write_json(const std::string& path, const Json& j) { write_text_atomically(path, dump_json(j)); }

LossWeights weights_with_rank(double rank) {
  LossWeights w;
  w.rank = rank;
  return w;
}

// Projected keypoints and apparent area of each detection's mesh.
void detection_keypoints(const std::vector<Detection>& dets, const BodyModelSpec& model, ImageSize image,
                         std::vector<Points2>& keypoints, std::vector<double>& areas) {
  for (const auto& d : dets) {
    const LbsResult mesh = detection_mesh(d, model);
    keypoints.push_back(project_weak_perspective(regress_keypoints(model, mesh.vertices), d.camera, image));
    const Points2 v = project_weak_perspective(mesh.vertices, d.camera, image);
    const double area = (v.col(0).maxCoeff() - v.col(0).minCoeff()) * (v.col(1).maxCoeff() - v.col(1).minCoeff());
    areas.push_back(std::max(area, 1.0));
  }
}

Json evaluate_detections(const std::vector<Detection>& dets, const Scene& scene, const BodyModelSpec& model,
                         const CameraGlobals& globals, double depth_threshold, bool align_roots) {
  std::vector<Points2> pred_kp;
  std::vector<double> pred_area;
  detection_keypoints(dets, model, scene.image, pred_kp, pred_area);
  std::vector<Points2> gt_kp;
  std::vector<VecX> gt_vis;
  std::vector<double> gt_area;
  for (const auto& p : scene.persons) {
    gt_kp.push_back(p.keypoints2d);
    gt_vis.push_back(p.visibility);
    gt_area.push_back(p.area());
  }
  const std::vector<int> match = greedy_oks_match(pred_kp, gt_kp, gt_vis, gt_area, 1e-6);

  double sum_mpjpe = 0.0, sum_pa = 0.0, sum_pve = 0.0, sum_pck = 0.0, sum_auc = 0.0;
  int matched = 0;
  std::vector<double> pred_z, gt_z;
  for (std::size_t d = 0; d < dets.size(); ++d) {
    if (match[d] < 0) continue;
    const PersonAnnotation& gt = scene.persons[static_cast<std::size_t>(match[d])];
    const LbsResult mesh = detection_mesh(dets[d], model);
    const Points3 pred3d = regress_keypoints(model, mesh.vertices);
    const Points3 kp = 1000.0 * (align_roots ? root_align(pred3d) : pred3d);
    const Points3 kp_gt = 1000.0 * (align_roots ? root_align(gt.keypoints3d) : Points3(gt.keypoints3d));
    const LbsResult gt_mesh = lbs_forward(model, PoseParams::from_rot6d(gt.pose6d), gt.beta);
    const Points3 root = mesh.vertices.rowwise() - regress_keypoints(model, mesh.vertices).row(0);
    const Points3 root_gt = gt_mesh.vertices.rowwise() - gt.keypoints3d.row(0);
    sum_mpjpe += mpjpe(kp, kp_gt);
    sum_pa += pa_mpjpe(kp, kp_gt);
    sum_pve += pve(1000.0 * root, 1000.0 * root_gt);
    sum_pck += pck3d(kp, kp_gt);
    sum_auc += auc(kp, kp_gt);
    pred_z.push_back(depth_from_camera(dets[d].camera, globals));
    gt_z.push_back(gt.depth);
    ++matched;
  }
  const auto mean = [&](double s) { return matched > 0 ? Json(s / matched) : Json(nullptr); };
  Json report{{"version", kSchemaVersion},
              {"root_aligned", align_roots},
              {"detections", dets.size()},
              {"persons", scene.persons.size()},
              {"matched", matched},
              {"missed", static_cast<int>(scene.persons.size()) - matched},
              {"false_positives", static_cast<int>(dets.size()) - matched},
              {"mpjpe_mm", mean(sum_mpjpe)},
              {"pa_mpjpe_mm", mean(sum_pa)},
              {"pve_mm", mean(sum_pve)},
              {"pck3d_150mm", mean(sum_pck)},
              {"auc", mean(sum_auc)}};
  if (pred_z.size() >= 2) {
    const PairCount c = depth_order_counts(pred_z, gt_z, depth_threshold);
    report["depth_order_accuracy"] = c.fraction();
    report["depth_pairs"] = c.total;
  } else {
    report["depth_order_accuracy"] = nullptr;
    report["depth_pairs"] = 0;
  }
  return report;
}

std::string text_report(const Json& report) {
  std::ostringstream os;
  for (const auto& [key, value] : report.items()) {
    if (key == "version") continue;
    os << key << ": ";
    if (value.is_null()) os << "n/a";
    else if (value.is_number_float()) os << format_double(value.get<double>());
    else os << value.dump();
    os << '\n';
  }
  return os.str();
}

// Keypoints JSON: {"keypoints": [[x, y], ...], "visibility": [...], "area": A}. Visibility defaults to all
// visible, area to the bounding box of the visible keypoints; "version" is optional.
struct KeypointInput {
  Points2 keypoints;
  VecX visibility;
  double area = 0.0;
};

KeypointInput keypoints_from_json(const Json& j) {
  KeypointInput in;
  try {
    if (j.contains("version") && j.at("version") != kSchemaVersion)
      fail(ErrorCode::FormatError, "unsupported schema version " + j.at("version").dump());
    const auto& kp = j.at("keypoints");
    in.keypoints.resize(static_cast<Eigen::Index>(kp.size()), 2);
    for (std::size_t i = 0; i < kp.size(); ++i) {
      if (kp[i].size() != 2) fail(ErrorCode::FormatError, "keypoints must be [x, y] pairs");
      in.keypoints(static_cast<Eigen::Index>(i), 0) = kp[i][0].get<double>();
      in.keypoints(static_cast<Eigen::Index>(i), 1) = kp[i][1].get<double>();
    }
    in.visibility = VecX::Ones(in.keypoints.rows());
    if (j.contains("visibility")) {
      const auto& v = j.at("visibility");
      if (v.size() != kp.size()) fail(ErrorCode::FormatError, "visibility length differs from keypoints");
      for (std::size_t i = 0; i < v.size(); ++i) in.visibility[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    if (j.contains("area")) {
      in.area = j.at("area").get<double>();
    } else {
      Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
      for (Eigen::Index r = 0; r < in.keypoints.rows(); ++r) {
        if (in.visibility[r] <= 0) continue;
        lo = lo.cwiseMin(in.keypoints.row(r).transpose());
        hi = hi.cwiseMax(in.keypoints.row(r).transpose());
      }
      in.area = hi.x() > lo.x() ? (hi - lo).prod() : 0.0;
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::FormatError, std::string("keypoints JSON: ") + e.what());
  }
  return in;
}

int dispatch(CLI::App& app, int argc, const char* const* argv) {
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_help_all_flag("--help-all", "help for every command");

  // model gen-toy
  auto* model_cmd = app.add_subcommand("model", "body model files");
  model_cmd->require_subcommand(1);
  auto* gen_toy = model_cmd->add_subcommand("gen-toy", "write a procedural toy body model");
  ToyModelConfig toy;
  std::string model_out;
  gen_toy->add_option("--out", model_out, "output model file")->required();
  gen_toy->add_option("--seed", toy.seed, "random seed")->required();
  gen_toy->add_option("--vertices", toy.n_vertices, "vertex count")->check(CLI::PositiveNumber);
  gen_toy->add_option("--joints", toy.n_joints, "joint count")->check(CLI::PositiveNumber);
  gen_toy->add_option("--keypoints", toy.n_keypoints, "evaluation keypoints (0: one per joint)");

  // scene generate
  auto* scene_cmd = app.add_subcommand("scene", "synthetic scenes");
  scene_cmd->require_subcommand(1);
  auto* scene_gen = scene_cmd->add_subcommand("generate", "generate synthetic scenes as JSON");
  SceneConfig scfg;
  ImageOptions scene_img;
  std::uint64_t scene_seed = 0;
  int scene_count = 1;
  int jobs = 1;
  std::string scene_out, scene_out_dir, scene_model;
  bool collision_free = false, uniform_centers = false;
  scene_gen->add_option("--seed", scene_seed, "random seed")->required();
  auto* out_opt = scene_gen->add_option("--out", scene_out, "output JSON for a single scene");
  auto* dir_opt = scene_gen->add_option("--out-dir", scene_out_dir, "directory for scene_NNNN.json files");
  out_opt->excludes(dir_opt);
  scene_gen->add_option("--count", scene_count, "number of scenes (needs --out-dir when > 1)")
      ->check(CLI::PositiveNumber);
  scene_gen->add_option("--model", scene_model, "body model file (default: toy model)");
  scene_gen->add_option("--min-persons", scfg.min_persons, "fewest persons per scene");
  scene_gen->add_option("--max-persons", scfg.max_persons, "most persons per scene");
  scene_gen->add_option("--depth-lo", scfg.depth_lo, "nearest depth, m");
  scene_gen->add_option("--depth-hi", scfg.depth_hi, "farthest depth, m");
  scene_gen->add_option("--pose-sigma", scfg.pose_sigma, "pose noise, rad");
  scene_gen->add_option("--shape-sigma", scfg.shape_sigma, "shape noise");
  scene_gen->add_flag("--uniform-centers", uniform_centers, "centers uniform over the frame");
  scene_gen->add_flag("--collision-free", collision_free, "resample until no (level, cell) collision");
  scene_gen->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  add_image_options(scene_gen, scene_img);

  // encode
  auto* encode_cmd = app.add_subcommand("encode", "ground-truth instance and body mesh maps");
  std::string enc_scene, enc_out;
  double enc_focal = 1000.0, enc_long_edge = 0.0;
  double enc_epsilon = 0.2;
  encode_cmd->add_option("--scene", enc_scene, "scene JSON")->required()->check(CLI::ExistingFile);
  encode_cmd->add_option("--out", enc_out, "output map file")->required();
  encode_cmd->add_option("--focal", enc_focal, "focal length f in px")->check(CLI::PositiveNumber);
  encode_cmd->add_option("--long-edge", enc_long_edge, "alpha in px (default: the frame's long edge)")
      ->check(CLI::PositiveNumber);
  encode_cmd->add_option("--epsilon", enc_epsilon, "central region scale");

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "local-maximum decoding of map files");
  std::string dec_maps, dec_out, dec_model;
  double dec_threshold = 0.5, dec_oks = 0.5;
  bool dec_nms = false;
  ImageOptions dec_img;
  decode_cmd->add_option("--maps", dec_maps, "map file")->required()->check(CLI::ExistingFile);
  decode_cmd->add_option("--out", dec_out, "output detections JSON")->required();
  decode_cmd->add_option("--threshold", dec_threshold, "instance probability threshold");
  decode_cmd->add_flag("--nms", dec_nms, "apply keypoint NMS across levels");
  decode_cmd->add_option("--oks-threshold", dec_oks, "keypoint NMS OKS threshold");
  decode_cmd->add_option("--model", dec_model, "body model for NMS keypoints (default: toy model)");
  add_image_options(decode_cmd, dec_img, false);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "match detections to a scene and compute metrics");
  std::string ev_pred, ev_scene, ev_out, ev_model;
  std::string ev_text;
  double ev_T = 0.0, ev_focal = 1000.0, ev_long_edge = 0.0;
  bool ev_no_root_align = false;
  eval_cmd->add_option("--pred", ev_pred, "detections JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--scene", ev_scene, "ground-truth scene JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", ev_out, "output metric report JSON")->required();
  eval_cmd->add_option("--model", ev_model, "body model file (default: toy model)");
  eval_cmd->add_option("--depth-threshold", ev_T, "T for depth-ordering accuracy, m");
  eval_cmd->add_option("--focal", ev_focal, "focal length f in px")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--long-edge", ev_long_edge, "alpha in px (default: the frame's long edge)")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--text", ev_text, "plain-text copy of the report");
  eval_cmd->add_flag("--no-root-align", ev_no_root_align, "compare keypoints without subtracting the root");

  // train-toy
  auto* train_cmd = app.add_subcommand("train-toy", "train the toy regressor on synthetic scenes");
  TrainOptions topt;
  std::string tr_model, tr_out, tr_history;
  std::vector<std::string> tr_scenes;
  int tr_count = 20;
  double tr_rank = 0.1;
  train_cmd->add_option("--seed", topt.seed, "random seed")->required();
  train_cmd->add_option("--out", tr_out, "output regressor JSON")->required();
  train_cmd->add_option("--history", tr_history, "per-step loss breakdown JSON");
  train_cmd->add_option("--scene", tr_scenes, "training scene JSON (repeatable; default: generated)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--count", tr_count, "generated scene count")->check(CLI::PositiveNumber);
  train_cmd->add_option("--model", tr_model, "body model file (default: toy model)");
  train_cmd->add_option("--steps", topt.steps, "gradient steps");
  train_cmd->add_option("--lr", topt.lr, "learning rate");
  train_cmd->add_option("--hidden", topt.hidden, "hidden width")->check(CLI::PositiveNumber);
  train_cmd->add_option("--rank-weight", tr_rank, "weight of the ordinal depth term");
  train_cmd->add_option("--pseudo-sigma", topt.pseudo_sigma, "noise of pseudo depth labels, m");
  train_cmd->add_option("--rank-threshold", topt.rank_threshold, "T for pseudo relations, m");

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "rank-loss ablation on held-out synthetic scenes");
  AblationConfig acfg;
  std::uint64_t ab_seed = 0;
  std::string ab_out;
  ablate_cmd->add_option("--seed", ab_seed, "random seed")->required();
  ablate_cmd->add_option("--out", ab_out, "output report JSON")->required();
  ablate_cmd->add_option("--train-scenes", acfg.train_scenes, "training scenes")->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--heldout-scenes", acfg.heldout_scenes, "held-out scenes")->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--steps", acfg.train.steps, "gradient steps per arm");
  ablate_cmd->add_option("--lr", acfg.train.lr, "learning rate");
  ablate_cmd->add_option("--rank-weight", acfg.weights.rank, "rank weight of the treatment arm");
  ablate_cmd->add_option("--jobs", acfg.jobs, "scene generation threads")->check(CLI::PositiveNumber);

  // augment
  auto* aug_cmd = app.add_subcommand("augment", "keypoint-aware occlusion of one person");
  AugmentConfig aug;
  std::uint64_t aug_seed = 0;
  std::string aug_image, aug_scene, aug_keypoints, aug_out, aug_record, aug_occluders;
  int aug_person = 0;
  ImageOptions aug_img;
  aug_cmd->add_option("--seed", aug_seed, "random seed")->required();
  auto* aug_scene_opt =
      aug_cmd->add_option("--scene", aug_scene, "scene JSON with the person")->check(CLI::ExistingFile);
  auto* aug_kp_opt =
      aug_cmd->add_option("--keypoints", aug_keypoints, "keypoints JSON of the person")->check(CLI::ExistingFile);
  aug_scene_opt->excludes(aug_kp_opt);
  aug_cmd->add_option("--out", aug_out, "output netpbm image")->required();
  aug_cmd->add_option("--in,--image", aug_image, "input netpbm image (default: gray canvas)")
      ->check(CLI::ExistingFile);
  aug_cmd->add_option("--person", aug_person, "person index within --scene");
  aug_cmd->add_option("--record", aug_record, "occlusion record JSON");
  aug_cmd->add_option("--occluders", aug_occluders, "directory of netpbm occluders")->check(CLI::ExistingDirectory);
  aug_cmd->add_option("--prob,--probability", aug.probability, "application probability");
  aug_cmd->add_option("--area-lo", aug.area_lo, "smallest occluder area as a fraction of the person's");
  aug_cmd->add_option("--area-hi", aug.area_hi, "largest occluder area as a fraction of the person's");
  add_image_options(aug_cmd, aug_img, false);

  // export-obj
  auto* obj_cmd = app.add_subcommand("export-obj", "write a detection's mesh as OBJ");
  std::string obj_det, obj_model, obj_out;
  int obj_index = 0;
  obj_cmd->add_option("--detections", obj_det, "detections JSON")->required()->check(CLI::ExistingFile);
  obj_cmd->add_option("--index", obj_index, "detection index");
  obj_cmd->add_option("--model", obj_model, "body model file (default: toy model)");
  obj_cmd->add_option("--out", obj_out, "output OBJ file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (gen_toy->parsed()) {
    const BodyModelSpec m = make_toy_model(toy);
    save_model(m, model_out);
    std::cout << "model: " << m.num_vertices() << " vertices, " << m.num_joints() << " joints, "
              << m.num_keypoints() << " keypoints\n";
  } else if (scene_gen->parsed()) {
    if (scene_out.empty() == scene_out_dir.empty()) {
      std::cerr << "scene generate: exactly one of --out and --out-dir is required\n" << scene_gen->help();
      return 1;
    }
    if (!scene_out.empty() && scene_count != 1) {
      std::cerr << "scene generate: --count > 1 needs --out-dir\n";
      return 1;
    }
    scfg.image = scene_img.size();
    scfg.focal = scene_img.focal;
    scfg.ground_plane = !uniform_centers;
    const BodyModelSpec m = model_or_default(scene_model);
    std::vector<Scene> scenes;
    if (collision_free && scene_out_dir.empty()) {
      scenes.push_back(generate_collision_free_scene(scene_seed, scfg, m, PyramidConfig::standard()));
    } else if (collision_free) {
      for (int i = 0; i < scene_count; ++i)
        scenes.push_back(generate_collision_free_scene(derive_seed(scene_seed, static_cast<std::uint64_t>(i)), scfg,
                                                       m, PyramidConfig::standard()));
    } else if (scene_out_dir.empty()) {
      scenes.push_back(generate_scene(scene_seed, scfg, m));
    } else {
      scenes = generate_scenes(scene_seed, scene_count, scfg, m, jobs);
    }
    if (!scene_out.empty()) {
      write_json(scene_out, scene_to_json(scenes.front()));
    } else {
      std::error_code ec;
      std::filesystem::create_directories(scene_out_dir, ec);
      if (ec) fail(ErrorCode::IoError, "cannot create " + scene_out_dir + ": " + ec.message());
      for (std::size_t i = 0; i < scenes.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%04zu.json", i);
        write_json((std::filesystem::path(scene_out_dir) / name).string(), scene_to_json(scenes[i]));
      }
    }
    std::cout << "scenes: " << scenes.size() << "\n";
  } else if (encode_cmd->parsed()) {
    const Scene scene = read_scene(enc_scene);
    PyramidConfig pyramid = PyramidConfig::standard();
    pyramid.epsilon = enc_epsilon;
    pyramid.validate();
    const EncodeResult enc =
        encode_gt(scene.persons, scene.image, pyramid, globals_for(enc_focal, enc_long_edge, scene.image));
    save_maps(enc.instance, enc.mesh, enc_out);
    std::cout << "persons: " << scene.persons.size() << ", collisions: " << enc.collisions << "\n";
  } else if (decode_cmd->parsed()) {
    const auto [imap, pmap] = load_maps(dec_maps);
    std::vector<Detection> dets = decode(imap, pmap, dec_threshold);
    if (dec_nms) {
      const BodyModelSpec m = model_or_default(dec_model);
      std::vector<Points2> kp;
      std::vector<double> areas;
      detection_keypoints(dets, m, dec_img.size(), kp, areas);
      std::vector<Detection> kept;
      for (std::size_t i : keypoint_nms(dets, kp, areas, dec_oks)) kept.push_back(dets[i]);
      dets = std::move(kept);
    }
    write_json(dec_out, detections_to_json(dets));
    std::cout << "detections: " << dets.size() << "\n";
  } else if (eval_cmd->parsed()) {
    const auto dets = detections_from_json(parse_json(read_text_file(ev_pred)));
    const Scene scene = read_scene(ev_scene);
    const BodyModelSpec m = model_or_default(ev_model);
    const Json report = evaluate_detections(dets, scene, m, globals_for(ev_focal, ev_long_edge, scene.image), ev_T,
                                            !ev_no_root_align);
    write_json(ev_out, report);
    const std::string text = text_report(report);
    if (!ev_text.empty()) write_text_atomically(ev_text, text);
    std::cout << text;
  } else if (train_cmd->parsed()) {
    const BodyModelSpec m = model_or_default(tr_model);
    std::vector<Scene> scenes;
    if (tr_scenes.empty()) {
      scenes = generate_scenes(derive_seed(topt.seed, 1), tr_count, SceneConfig{}, m);
    } else {
      for (const auto& p : tr_scenes) scenes.push_back(read_scene(p));
    }
    topt.noise.seed = derive_seed(topt.seed, 4);
    const TrainResult r = train_toy(scenes, m, weights_with_rank(tr_rank), topt);
    write_json(tr_out, regressor_to_json(r.model));
    if (!tr_history.empty()) write_json(tr_history, history_to_json(r.history));
    std::cout << "loss: " << r.history.front().back().second << " -> " << r.history.back().back().second << "\n";
  } else if (ablate_cmd->parsed()) {
    const AblationReport r = evaluate_ablation(ab_seed, acfg);
    write_json(ab_out, ablation_to_json(r));
    std::cout << "with_rank: " << r.with_rank.accuracy << ", without_rank: " << r.without_rank.accuracy << "\n";
  } else if (aug_cmd->parsed()) {
    if (aug_scene.empty() == aug_keypoints.empty()) {
      std::cerr << "augment: exactly one of --scene and --keypoints is required\n" << aug_cmd->help();
      return 1;
    }
    KeypointInput person;
    ImageSize frame = aug_img.size();
    if (!aug_scene.empty()) {
      const Scene scene = read_scene(aug_scene);
      if (aug_person < 0 || aug_person >= static_cast<int>(scene.persons.size()))
        fail(ErrorCode::InvalidConfig, "person index out of range");
      const PersonAnnotation& p = scene.persons[static_cast<std::size_t>(aug_person)];
      person = {p.keypoints2d, p.visibility, p.area()};
      frame = scene.image;
    } else {
      person = keypoints_from_json(parse_json(read_text_file(aug_keypoints)));
    }
    aug.validate();
    const Image input = aug_image.empty() ? Image(frame.width, frame.height, 3, 128) : read_netpbm(aug_image);
    const auto library = aug_occluders.empty() ? std::vector<OccluderPatch>{} : load_occluder_directory(aug_occluders);
    Rng rng(aug_seed);
    const AugmentResult res =
        apply_keypoint_occlusion(input, person.keypoints, person.visibility, person.area, aug, rng, library);
    write_netpbm(res.image, aug_out);
    if (!aug_record.empty()) {
      Json rec{{"version", kSchemaVersion}, {"applied", res.applied}};
      if (res.record) {
        const OcclusionRecord& r = *res.record;
        rec["keypoint"] = r.keypoint;
        rec["offset"] = {r.offset.x(), r.offset.y()};
        rec["center"] = {r.center.x(), r.center.y()};
        rec["opaque_area"] = r.opaque_area;
        rec["composited_pixels"] = r.composited_pixels;
        rec["patch"] = {{"x0", r.x0}, {"y0", r.y0}, {"width", r.patch_width}, {"height", r.patch_height}};
        rec["source"] = r.source_id;
        rec["person_area"] = person.area;
      }
      write_json(aug_record, rec);
    }
    std::cout << "applied: " << (res.applied ? "yes" : "no") << "\n";
  } else if (obj_cmd->parsed()) {
    const auto dets = detections_from_json(parse_json(read_text_file(obj_det)));
    if (obj_index < 0 || obj_index >= static_cast<int>(dets.size()))
      fail(ErrorCode::InvalidConfig, "detection index out of range");
    const BodyModelSpec m = model_or_default(obj_model);
    export_obj(dets[static_cast<std::size_t>(obj_index)], m, obj_out);
    std::cout << "vertices: " << m.num_vertices() << ", faces: " << m.faces.size() << "\n";
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Body meshes as points: encode, decode, train and evaluate", "bmp"};
  try {
    return dispatch(app, argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace bmp
