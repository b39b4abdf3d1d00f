#include "bmp/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bmp/error.hpp"

namespace bmp {

void PersonAnnotation::validate() const {
  if (!(height > 0.0) || !(width > 0.0)) fail(ErrorCode::NonPositiveSize, "person size must be positive");
  if (!(depth > 0.0)) fail(ErrorCode::NonPositiveSize, "person depth must be positive");
  if (keypoints2d.rows() != visibility.size())
    fail(ErrorCode::DimensionMismatch, "keypoints2d and visibility lengths differ");
  if (keypoints3d.rows() != 0 && keypoints3d.rows() != keypoints2d.rows())
    fail(ErrorCode::DimensionMismatch, "keypoints2d and keypoints3d lengths differ");
}

Rect central_region(const PersonAnnotation& ann, double epsilon) {
  return {ann.center.x(), ann.center.y(), epsilon * ann.width, epsilon * ann.height};
}

InstanceMap InstanceMap::zeros(const PyramidConfig& config) {
  InstanceMap m;
  for (const auto& l : config.levels) m.levels.emplace_back(l.grid, 1);
  return m;
}

BodyMeshMap BodyMeshMap::zeros(const PyramidConfig& config) {
  BodyMeshMap m;
  for (const auto& l : config.levels) m.levels.emplace_back(l.grid, channel::kCount);
  return m;
}

VecX person_parameter_vector(const PersonAnnotation& ann, const CameraParams& cam) {
  if (ann.pose6d.size() != channel::kPoseDim)
    fail(ErrorCode::DimensionMismatch, "pose must have 144 entries (24 joints × 6D), got " + std::to_string(ann.pose6d.size()));
  if (ann.beta.size() != channel::kShapeDim)
    fail(ErrorCode::DimensionMismatch, "beta must have 10 entries, got " + std::to_string(ann.beta.size()));
  VecX v(channel::kCount);
  v.segment(channel::kPose, channel::kPoseDim) = ann.pose6d;
  v.segment(channel::kShape, channel::kShapeDim) = ann.beta;
  v[channel::kCamera] = cam.scale;
  v[channel::kCamera + 1] = cam.tx;
  v[channel::kCamera + 2] = cam.ty;
  v[channel::kConfidence] = 1.0;
  v[channel::kDepth] = ann.depth;
  return v;
}

EncodeResult encode_gt(const std::vector<PersonAnnotation>& persons, ImageSize image, const PyramidConfig& config,
                       const CameraGlobals& globals) {
  config.validate();
  EncodeResult out{InstanceMap::zeros(config), BodyMeshMap::zeros(config), 0};

  // Depth of the person currently owning each cell, per level.
  std::vector<std::vector<double>> owner_depth;
  for (const auto& l : config.levels)
    owner_depth.emplace_back(static_cast<std::size_t>(l.grid) * l.grid, std::numeric_limits<double>::quiet_NaN());

  for (const auto& ann : persons) {
    ann.validate();
    CameraParams cam = ann.camera ? *ann.camera
                                  : camera_for_person(ann.center, compute_scale(ann.height, ann.width), image);
    cam.scale = snap_scale_for_depth_identity(cam.scale, globals);
    const VecX params = person_parameter_vector(ann, cam);
    const Rect region = central_region(ann, config.epsilon);

    for (int k : assign_levels(compute_scale(ann.height, ann.width), config)) {
      const int G = config.levels[static_cast<std::size_t>(k)].grid;
      const Cell lo = cell_of({region.x_lo(), region.y_lo()}, image, G);
      const Cell hi = cell_of({region.x_hi(), region.y_hi()}, image, G);
      GridMap& inst = out.instance.levels[static_cast<std::size_t>(k)];
      GridMap& mesh = out.mesh.levels[static_cast<std::size_t>(k)];
      auto& owners = owner_depth[static_cast<std::size_t>(k)];
      for (int j = lo.j; j <= hi.j; ++j) {
        for (int i = lo.i; i <= hi.i; ++i) {
          const Cell c{i, j};
          double& owner = owners[static_cast<std::size_t>(j) * G + i];
          if (!std::isnan(owner)) {
            ++out.collisions;
            if (!(ann.depth < owner)) continue;
          }
          owner = ann.depth;
          inst.at(c) = 1.0;
          std::copy(params.data(), params.data() + channel::kCount, mesh.cell(c));
        }
      }
    }
  }
  return out;
}

VecX Detection::parameters() const {
  VecX v(channel::kCount);
  v.segment(channel::kPose, channel::kPoseDim) = theta;
  v.segment(channel::kShape, channel::kShapeDim) = beta;
  v[channel::kCamera] = camera.scale;
  v[channel::kCamera + 1] = camera.tx;
  v[channel::kCamera + 2] = camera.ty;
  v[channel::kConfidence] = confidence;
  v[channel::kDepth] = depth;
  return v;
}

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

bool same_parameters(const GridMap& mesh, Cell a, Cell b) {
  return std::equal(mesh.cell(a), mesh.cell(a) + mesh.channels, mesh.cell(b));
}

}  // namespace

std::vector<Detection> decode(const InstanceMap& imap, const BodyMeshMap& pmap, double prob_threshold) {
  if (imap.levels.size() != pmap.levels.size()) fail(ErrorCode::ConfigMismatch, "instance and mesh maps differ in level count");
  std::vector<Detection> out;
  for (std::size_t k = 0; k < imap.levels.size(); ++k) {
    const GridMap& inst = imap.levels[k];
    const GridMap& mesh = pmap.levels[k];
    if (inst.grid != mesh.grid || inst.channels != 1 || mesh.channels != channel::kCount)
      fail(ErrorCode::ConfigMismatch, "level " + std::to_string(k) + " grid or channel count mismatch");
    const int G = inst.grid;
    for (int i = 0; i < G; ++i) {
      for (int j = 0; j < G; ++j) {
        const Cell c{i, j};
        const double p = inst.at(c);
        if (!(p >= prob_threshold)) continue;
        bool keep = true;
        for (int di = -1; di <= 1 && keep; ++di) {
          for (int dj = -1; dj <= 1 && keep; ++dj) {
            if (di == 0 && dj == 0) continue;
            const Cell n{i + di, j + dj};
            if (n.i < 0 || n.j < 0 || n.i >= G || n.j >= G) continue;
            const double q = inst.at(n);
            if (q > p) keep = false;
            else if (q == p && n < c && same_parameters(mesh, n, c)) keep = false;
          }
        }
        if (!keep) continue;

        const double* v = mesh.cell(c);
        Detection d;
        d.level = static_cast<int>(k);
        d.cell = c;
        d.prob = p;
        d.theta = Eigen::Map<const VecX>(v + channel::kPose, channel::kPoseDim);
        d.beta = Eigen::Map<const VecX>(v + channel::kShape, channel::kShapeDim);
        d.camera = {v[channel::kCamera], v[channel::kCamera + 1], v[channel::kCamera + 2]};
        d.confidence = clamp01(v[channel::kConfidence]);
        d.depth = v[channel::kDepth];
        d.score = clamp01(d.confidence) * clamp01(p);
        out.push_back(std::move(d));
      }
    }
  }
  return out;
}

}  // namespace bmp
