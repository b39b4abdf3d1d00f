#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace bmp {

// Interleaved 8-bit image, row-major.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::uint8_t& at(int x, int y, int c) { return data[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c) const { return data[index(x, y, c)]; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
};

// Netpbm: P5 (gray), P6 (RGB) and P7 (PAM, GRAYSCALE/RGB/RGB_ALPHA), maxval 255.
Image read_netpbm(const std::filesystem::path& path);
void write_netpbm(const Image& image, const std::filesystem::path& path);

}  // namespace bmp
