#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bmp/body_model.hpp"
#include "bmp/encoding.hpp"

namespace bmp {

// Runs lbs_forward on the detection's θ/β and writes `v x y z` lines then
// 1-indexed `f i j k` lines. Throws IoError.
void export_obj(const Detection& detection, const BodyModelSpec& model, const std::filesystem::path& path);

// Exit status: 0 success, 1 usage error, 2 data or format error.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace bmp
