#pragma once

#include <filesystem>

#include "bmp/encoding.hpp"

namespace bmp {

inline constexpr std::uint32_t kMapFormatVersion = 1;

// A map file holds a "BMPC" block (instance map) followed by a "BMPP" block
// (body mesh map); payloads are float32.
void save_maps(const InstanceMap& imap, const BodyMeshMap& pmap, const std::filesystem::path& path);
std::pair<InstanceMap, BodyMeshMap> load_maps(const std::filesystem::path& path);

}  // namespace bmp
