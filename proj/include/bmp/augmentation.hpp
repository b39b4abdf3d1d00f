#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bmp/image.hpp"
#include "bmp/rng.hpp"
#include "bmp/types.hpp"

namespace bmp {

// RGB + alpha occluder. Alpha lies in [0, 1]; its support (alpha > 0) is what
// counts as the occluder's area.
struct OccluderPatch {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // width*height*3
  std::vector<float> alpha;       // width*height
  std::string source_id;

  float alpha_at(int x, int y) const { return alpha[static_cast<std::size_t>(y) * width + x]; }
  long opaque_pixels() const;
  // Throws InvalidConfig when alpha leaves [0, 1] or no pixel is opaque.
  void validate() const;
  bool operator==(const OccluderPatch&) const = default;
};

enum class OccluderStyle { kRectangle, kEllipse, kPolygon };

OccluderPatch generate_occluder_patch(Rng& rng, OccluderStyle style);
OccluderPatch generate_occluder_patch(Rng& rng);  // style drawn from rng

// Patches from a directory of netpbm images; PAM RGB_ALPHA keeps its alpha,
// other files are fully opaque. Sorted by filename.
std::vector<OccluderPatch> load_occluder_directory(const std::filesystem::path& dir);

// Nearest-neighbour resize to the given dimensions.
OccluderPatch resize_patch(const OccluderPatch& patch, int width, int height);

struct AugmentConfig {
  double probability = 0.5;
  double area_lo = 0.1;  // fraction of person area A
  double area_hi = 0.2;
  double offset_sigma = 0.1;  // δ per axis uniform in ±offset_sigma·sqrt(A)

  void validate() const;
};

struct OcclusionRecord {
  int keypoint = -1;
  Vec2 offset = Vec2::Zero();
  Vec2 center = Vec2::Zero();  // keypoint + δ, px
  long opaque_area = 0;        // alpha support of the resized patch, before clipping
  long composited_pixels = 0;  // opaque pixels that landed inside the frame
  int patch_width = 0;
  int patch_height = 0;
  int x0 = 0;  // top-left of the patch in image coordinates (may be negative)
  int y0 = 0;
  std::string source_id;
};

struct AugmentResult {
  Image image;
  bool applied = false;
  std::optional<OcclusionRecord> record;
};

// With probability cfg.probability, picks a visible keypoint uniformly,
// resizes an occluder so its opaque area lies in [area_lo A, area_hi A],
// centres it at keypoint + δ and alpha-composites it, clipped to the frame.
// Patches are drawn from `library` when non-empty, else generated.
// Throws NoVisibleKeypoints, NonPositiveArea.
AugmentResult apply_keypoint_occlusion(const Image& image, const Points2& keypoints, const VecX& visibility,
                                       double person_area, const AugmentConfig& cfg, Rng& rng,
                                       const std::vector<OccluderPatch>& library = {});

}  // namespace bmp
