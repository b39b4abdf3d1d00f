#include "bmp/map_io.hpp"

#include <fstream>

#include "bmp/atomic_file.hpp"
#include "bmp/binary_io.hpp"

namespace bmp {

namespace {

constexpr char kInstanceMagic[5] = "BMPC";
constexpr char kMeshMagic[5] = "BMPP";
constexpr std::uint32_t kMaxGrid = 4096;
constexpr std::uint32_t kMaxChannels = 4096;

void write_block(std::ostream& os, const char (&magic)[5], const std::vector<GridMap>& levels) {
  binary::write_magic(os, magic);
  binary::write_le<std::uint32_t>(os, kMapFormatVersion);
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(levels.size()));
  for (const auto& l : levels) {
    binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(l.grid));
    binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(l.channels));
  }
  for (const auto& l : levels)
    for (double v : l.data) binary::write_le<float>(os, static_cast<float>(v));
}

std::vector<GridMap> read_block(std::istream& is, const char (&magic)[5]) {
  binary::expect_magic(is, magic);
  const auto version = binary::read_le<std::uint32_t>(is, "map version");
  if (version != kMapFormatVersion) fail(ErrorCode::FormatError, "unsupported map format version " + std::to_string(version));
  const auto K = binary::read_le<std::uint32_t>(is, "level count");
  if (K == 0 || K > 64) fail(ErrorCode::FormatError, "implausible level count");
  std::vector<GridMap> levels;
  for (std::uint32_t k = 0; k < K; ++k) {
    const auto G = binary::read_le<std::uint32_t>(is, "grid size");
    const auto C = binary::read_le<std::uint32_t>(is, "channel count");
    if (G == 0 || G > kMaxGrid || C == 0 || C > kMaxChannels) fail(ErrorCode::FormatError, "implausible level shape");
    levels.emplace_back(static_cast<int>(G), static_cast<int>(C));
  }
  for (auto& l : levels)
    for (double& v : l.data) v = binary::read_le<float>(is, "map payload");
  return levels;
}

}  // namespace

void save_maps(const InstanceMap& imap, const BodyMeshMap& pmap, const std::filesystem::path& path) {
  write_file_atomically(path, [&](std::ostream& os) {
    write_block(os, kInstanceMagic, imap.levels);
    write_block(os, kMeshMagic, pmap.levels);
  });
}

std::pair<InstanceMap, BodyMeshMap> load_maps(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open map file " + path.string());
  InstanceMap imap;
  BodyMeshMap pmap;
  imap.levels = read_block(is, kInstanceMagic);
  pmap.levels = read_block(is, kMeshMagic);
  if (is.peek() != std::char_traits<char>::eof()) fail(ErrorCode::FormatError, "trailing bytes after map payload");
  return {std::move(imap), std::move(pmap)};
}

}  // namespace bmp
