#pragma once

#include <vector>

#include "bmp/annotation.hpp"
#include "bmp/camera.hpp"
#include "bmp/pyramid.hpp"

namespace bmp {

// Channel layout of the 159-dim body mesh vector.
namespace channel {
inline constexpr int kPose = 0;        // 144: 24 joints × 6D
inline constexpr int kPoseDim = 144;
inline constexpr int kShape = 144;     // 10
inline constexpr int kShapeDim = 10;
inline constexpr int kCamera = 154;    // s, t_x, t_y
inline constexpr int kConfidence = 157;
inline constexpr int kDepth = 158;
inline constexpr int kCount = 159;
}  // namespace channel

// G×G grid of `channels` values per cell, stored row-major as
// data[((j * G) + i) * channels + c].
struct GridMap {
  int grid = 0;
  int channels = 0;
  std::vector<double> data;

  GridMap() = default;
  GridMap(int grid_, int channels_)
      : grid(grid_), channels(channels_), data(static_cast<std::size_t>(grid_) * grid_ * channels_, 0.0) {}

  double& at(Cell c, int ch = 0) { return data[offset(c) + static_cast<std::size_t>(ch)]; }
  double at(Cell c, int ch = 0) const { return data[offset(c) + static_cast<std::size_t>(ch)]; }
  const double* cell(Cell c) const { return data.data() + offset(c); }
  double* cell(Cell c) { return data.data() + offset(c); }

  bool operator==(const GridMap&) const = default;

 private:
  std::size_t offset(Cell c) const {
    return (static_cast<std::size_t>(c.j) * static_cast<std::size_t>(grid) + static_cast<std::size_t>(c.i)) *
           static_cast<std::size_t>(channels);
  }
};

// Per-level probability that a cell holds a person center.
struct InstanceMap {
  std::vector<GridMap> levels;  // channels = 1
  static InstanceMap zeros(const PyramidConfig& config);
  bool operator==(const InstanceMap&) const = default;
};

// Per-level 159-channel parameter grids.
struct BodyMeshMap {
  std::vector<GridMap> levels;  // channels = 159
  static BodyMeshMap zeros(const PyramidConfig& config);
  bool operator==(const BodyMeshMap&) const = default;
};

// 159-dim vector for one person: 6D pose, β, camera, confidence 1, depth.
VecX person_parameter_vector(const PersonAnnotation& ann, const CameraParams& cam);

struct EncodeResult {
  InstanceMap instance;
  BodyMeshMap mesh;
  int collisions = 0;
};

// Ground-truth maps. Every cell touched by a person's central region on each
// of its assigned levels is marked positive; when two persons claim the same
// (level, cell) the closer one keeps it and the claim counts as a collision.
// Cameras come from the annotation when present, else from camera_for_person
// at the apparent scale, and are snapped so the depth identity holds exactly.
EncodeResult encode_gt(const std::vector<PersonAnnotation>& persons, ImageSize image, const PyramidConfig& config,
                       const CameraGlobals& globals = {});

struct Detection {
  int level = 0;
  Cell cell;
  double prob = 0.0;
  VecX theta;  // 144
  VecX beta;   // 10
  CameraParams camera;
  double confidence = 0.0;
  double depth = 0.0;
  double score = 0.0;  // clamp(confidence) × clamp(prob)

  VecX parameters() const;  // back to the 159-dim layout
};

// Local-maximum decoding: a cell is emitted when prob >= threshold and no cell
// in its 3×3 neighborhood is strictly more probable. On ties, a neighbor that
// belongs to the same plateau (equal probability, identical parameter vector)
// and precedes it lexicographically in (i, j) suppresses it.
// Throws ConfigMismatch when the maps disagree in shape.
std::vector<Detection> decode(const InstanceMap& imap, const BodyMeshMap& pmap, double prob_threshold = 0.5);

}  // namespace bmp
