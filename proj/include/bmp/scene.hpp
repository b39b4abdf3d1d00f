#pragma once

#include <cstdint>
#include <vector>

#include "bmp/annotation.hpp"
#include "bmp/body_model.hpp"
#include "bmp/camera.hpp"
#include "bmp/losses.hpp"
#include "bmp/pyramid.hpp"
#include "bmp/rng.hpp"

namespace bmp {

struct SceneConfig {
  int min_persons = 1;
  int max_persons = 8;
  double depth_lo = 3.0;  // m
  double depth_hi = 12.0;
  double pose_sigma = 0.2;   // rad, per axis-angle component
  double shape_sigma = 0.5;  // β_1.. ~ N(0, σ)
  // β_0 ~ U(-size_jitter, size_jitter); shape component 0 scales bodies by
  // 10% per unit, so the default gives ±20% body size.
  double size_jitter = 2.0;
  ImageSize image;
  double focal = 1000.0;
  // Centers sit on a ground plane: farther persons appear closer to the
  // horizon. When false the center is uniform over the frame.
  bool ground_plane = true;
  double horizon = 0.4;        // fraction of H
  double plane_drop = 0.25;    // fraction of H at depth_lo
  double center_jitter = 0.02;  // fraction of H

  CameraGlobals globals() const { return {focal, static_cast<double>(image.long_edge())}; }
  // Throws InvalidConfig.
  void validate() const;
};

struct Scene {
  ImageSize image;
  std::vector<PersonAnnotation> persons;
  std::uint64_t seed = 0;

  std::vector<double> depths() const;
};

// Persons with random pose and shape near rest, depths uniform in the range,
// the generating weak-perspective camera stored on each annotation, 2D
// keypoints and (h, w) from its projection. Visibility marks in-frame points.
Scene generate_scene(std::uint64_t seed, const SceneConfig& config, const BodyModelSpec& model);

// Scene i uses derive_seed(seed, i); generated on up to `jobs` threads.
std::vector<Scene> generate_scenes(std::uint64_t seed, int count, const SceneConfig& config,
                                   const BodyModelSpec& model, int jobs = 1);

// First scene in the derived-seed sequence whose ground truth has no
// (level, cell) collision. Throws InvalidConfig after `max_attempts`.
Scene generate_collision_free_scene(std::uint64_t seed, const SceneConfig& config, const BodyModelSpec& model,
                                    const PyramidConfig& pyramid, int max_attempts = 1000);

// Ordinal relations of Gaussian-noised depths.
PairRelations make_pseudo_relations(const std::vector<double>& gt_depths, double noise_sigma, double T, Rng& rng);

}  // namespace bmp
