#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>

namespace bmp {

// Writes through a sibling temporary file and renames it over `path`, so
// readers never observe a partially written output. Throws IoError.
void write_file_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);
void write_text_atomically(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace bmp
