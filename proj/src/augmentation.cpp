#include "bmp/augmentation.hpp"

#include <algorithm>
#include <cmath>

#include "bmp/error.hpp"

namespace bmp {

long OccluderPatch::opaque_pixels() const {
  return static_cast<long>(std::count_if(alpha.begin(), alpha.end(), [](float a) { return a > 0.0f; }));
}

void OccluderPatch::validate() const {
  if (width <= 0 || height <= 0) fail(ErrorCode::InvalidConfig, "occluder patch is empty");
  const auto n = static_cast<std::size_t>(width) * height;
  if (alpha.size() != n || rgb.size() != 3 * n) fail(ErrorCode::InvalidConfig, "occluder buffers have the wrong size");
  for (float a : alpha)
    if (!(a >= 0.0f && a <= 1.0f)) fail(ErrorCode::InvalidConfig, "occluder alpha outside [0, 1]");
  if (opaque_pixels() == 0) fail(ErrorCode::InvalidConfig, "occluder patch has no opaque pixel");
}

void AugmentConfig::validate() const {
  if (!(probability >= 0.0 && probability <= 1.0)) fail(ErrorCode::InvalidConfig, "probability must lie in [0, 1]");
  if (!(area_lo > 0.0 && area_lo < area_hi)) fail(ErrorCode::InvalidConfig, "need 0 < area_lo < area_hi");
  if (!(offset_sigma >= 0.0)) fail(ErrorCode::InvalidConfig, "offset_sigma must be non-negative");
}

namespace {

bool inside_polygon(const std::vector<Vec2>& poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > y) != (b.y() > y) && x < (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y()) + a.x()) inside = !inside;
  }
  return inside;
}

const char* style_name(OccluderStyle s) {
  switch (s) {
    case OccluderStyle::kRectangle: return "rectangle";
    case OccluderStyle::kEllipse: return "ellipse";
    case OccluderStyle::kPolygon: return "polygon";
  }
  return "unknown";
}

}  // namespace

OccluderPatch generate_occluder_patch(Rng& rng, OccluderStyle style) {
  OccluderPatch p;
  p.width = rng.integer(24, 64);
  p.height = rng.integer(24, 64);
  const auto n = static_cast<std::size_t>(p.width) * p.height;
  p.rgb.resize(3 * n);
  p.alpha.assign(n, 0.0f);

  const double base[3] = {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
  const double grad[3] = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
  const auto opacity = static_cast<float>(rng.uniform(0.7, 1.0));
  const double cx = 0.5 * p.width;
  const double cy = 0.5 * p.height;

  std::vector<Vec2> poly;
  if (style == OccluderStyle::kPolygon) {
    const int corners = rng.integer(5, 8);
    for (int k = 0; k < corners; ++k) {
      const double ang = (k + rng.uniform(0.0, 0.8)) * 6.283185307179586 / corners;
      const double r = rng.uniform(0.55, 1.0);
      poly.emplace_back(cx + r * cx * std::cos(ang), cy + r * cy * std::sin(ang));
    }
  }

  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      bool in = true;
      if (style == OccluderStyle::kEllipse) {
        const double dx = (px - cx) / cx;
        const double dy = (py - cy) / cy;
        in = dx * dx + dy * dy <= 1.0;
      } else if (style == OccluderStyle::kPolygon) {
        in = inside_polygon(poly, px, py);
      }
      const auto idx = static_cast<std::size_t>(y) * p.width + x;
      if (in) p.alpha[idx] = opacity;
      for (int c = 0; c < 3; ++c)
        p.rgb[3 * idx + static_cast<std::size_t>(c)] =
            static_cast<std::uint8_t>(std::clamp(base[c] + grad[c] * (x - y), 0.0, 255.0));
    }
  }
  // The polygon always surrounds the centre, but guard against rasterization misses.
  if (p.opaque_pixels() == 0) p.alpha[static_cast<std::size_t>(p.height / 2) * p.width + p.width / 2] = opacity;
  p.source_id = std::string("procedural:") + style_name(style);
  return p;
}

OccluderPatch generate_occluder_patch(Rng& rng) {
  const auto style = static_cast<OccluderStyle>(rng.index(3));
  return generate_occluder_patch(rng, style);
}

std::vector<OccluderPatch> load_occluder_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) fail(ErrorCode::IoError, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".ppm" || ext == ".pgm" || ext == ".pam")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<OccluderPatch> out;
  for (const auto& f : files) {
    const Image img = read_netpbm(f);
    OccluderPatch p;
    p.width = img.width;
    p.height = img.height;
    const auto n = static_cast<std::size_t>(p.width) * p.height;
    p.rgb.resize(3 * n);
    p.alpha.assign(n, 1.0f);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 3; ++c)
        p.rgb[3 * i + c] = img.data[i * static_cast<std::size_t>(img.channels) + (img.channels >= 3 ? c : 0)];
      if (img.channels == 4) p.alpha[i] = static_cast<float>(img.data[i * 4 + 3]) / 255.0f;
    }
    p.source_id = f.filename().string();
    p.validate();
    out.push_back(std::move(p));
  }
  if (out.empty()) fail(ErrorCode::IoError, "no netpbm occluders in " + dir.string());
  return out;
}

OccluderPatch resize_patch(const OccluderPatch& patch, int width, int height) {
  if (width <= 0 || height <= 0) fail(ErrorCode::InvalidConfig, "resize target must be positive");
  OccluderPatch out;
  out.width = width;
  out.height = height;
  out.source_id = patch.source_id;
  const auto n = static_cast<std::size_t>(width) * height;
  out.rgb.resize(3 * n);
  out.alpha.resize(n);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(patch.height - 1, static_cast<int>((y + 0.5) * patch.height / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(patch.width - 1, static_cast<int>((x + 0.5) * patch.width / width));
      const auto d = static_cast<std::size_t>(y) * width + x;
      const auto s = static_cast<std::size_t>(sy) * patch.width + sx;
      out.alpha[d] = patch.alpha[s];
      for (std::size_t c = 0; c < 3; ++c) out.rgb[3 * d + c] = patch.rgb[3 * s + c];
    }
  }
  return out;
}

namespace {

// Resized copy whose alpha support lies in [lo, hi] pixels, aiming at `target`.
OccluderPatch resize_to_area(const OccluderPatch& patch, double target, double lo, double hi) {
  const double aspect = static_cast<double>(patch.height) / patch.width;
  double factor = std::sqrt(target / static_cast<double>(patch.opaque_pixels()));
  const auto attempt = [&](double f) {
    const int w = std::max(1, static_cast<int>(std::lround(patch.width * f)));
    const int h = std::max(1, static_cast<int>(std::lround(w * aspect)));
    return resize_patch(patch, w, h);
  };
  for (int iter = 0; iter < 24; ++iter) {
    OccluderPatch r = attempt(factor);
    const auto area = static_cast<double>(r.opaque_pixels());
    if (area >= lo && area <= hi) return r;
    factor *= area > 0.0 ? std::sqrt(target / area) : 1.5;
  }
  // Fixed-point iteration can oscillate between two sizes; scan widths instead.
  for (int w = 1; w <= 4096; ++w) {
    const int h = std::max(1, static_cast<int>(std::lround(w * aspect)));
    OccluderPatch r = resize_patch(patch, w, h);
    const auto area = static_cast<double>(r.opaque_pixels());
    if (area >= lo && area <= hi) return r;
    if (area > hi && w > 8) break;
  }
  fail(ErrorCode::InvalidConfig, "cannot resize occluder into the requested area range; person area too small");
}

}  // namespace

AugmentResult apply_keypoint_occlusion(const Image& image, const Points2& keypoints, const VecX& visibility,
                                       double person_area, const AugmentConfig& cfg, Rng& rng,
                                       const std::vector<OccluderPatch>& library) {
  cfg.validate();
  if (!(person_area > 0.0)) fail(ErrorCode::NonPositiveArea, "person area must be positive");
  if (visibility.size() != keypoints.rows()) fail(ErrorCode::DimensionMismatch, "one visibility flag per keypoint");
  std::vector<int> visible;
  for (Eigen::Index k = 0; k < visibility.size(); ++k)
    if (visibility[k] > 0.0) visible.push_back(static_cast<int>(k));
  if (visible.empty()) fail(ErrorCode::NoVisibleKeypoints, "occlusion needs a visible keypoint");

  AugmentResult out{image, false, std::nullopt};
  if (!rng.bernoulli(cfg.probability)) return out;

  OcclusionRecord rec;
  rec.keypoint = visible[rng.index(visible.size())];
  const OccluderPatch source = library.empty() ? generate_occluder_patch(rng) : library[rng.index(library.size())];
  const double lo = cfg.area_lo * person_area;
  const double hi = cfg.area_hi * person_area;
  const OccluderPatch patch = resize_to_area(source, rng.uniform(lo, hi), lo, hi);

  const double reach = cfg.offset_sigma * std::sqrt(person_area);
  rec.offset = Vec2(rng.uniform(-reach, reach), rng.uniform(-reach, reach));
  rec.center = keypoints.row(rec.keypoint).transpose() + rec.offset;
  rec.opaque_area = patch.opaque_pixels();
  rec.patch_width = patch.width;
  rec.patch_height = patch.height;
  rec.x0 = static_cast<int>(std::floor(rec.center.x() - 0.5 * patch.width + 0.5));
  rec.y0 = static_cast<int>(std::floor(rec.center.y() - 0.5 * patch.height + 0.5));
  rec.source_id = patch.source_id;

  Image& img = out.image;
  const int color_channels = std::min(img.channels, 3);
  for (int py = 0; py < patch.height; ++py) {
    const int y = rec.y0 + py;
    if (y < 0 || y >= img.height) continue;
    for (int px = 0; px < patch.width; ++px) {
      const int x = rec.x0 + px;
      if (x < 0 || x >= img.width) continue;
      const float a = patch.alpha_at(px, py);
      if (!(a > 0.0f)) continue;
      ++rec.composited_pixels;
      const auto s = 3 * (static_cast<std::size_t>(py) * patch.width + px);
      for (int c = 0; c < color_channels; ++c) {
        double src = patch.rgb[s + static_cast<std::size_t>(c)];
        if (img.channels == 1)
          src = 0.299 * patch.rgb[s] + 0.587 * patch.rgb[s + 1] + 0.114 * patch.rgb[s + 2];
        const double blended = a * src + (1.0 - a) * img.at(x, y, c);
        img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(blended), 0L, 255L));
      }
    }
  }
  out.applied = true;
  out.record = rec;
  return out;
}

}  // namespace bmp
