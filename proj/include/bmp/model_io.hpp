#pragma once

#include <filesystem>

#include "bmp/body_model.hpp"

namespace bmp {

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const BodyModelSpec& model, const std::filesystem::path& path);
BodyModelSpec load_model(const std::filesystem::path& path);

}  // namespace bmp
