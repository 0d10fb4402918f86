#pragma once

#include <filesystem>
#include <string>

namespace jicgsim {

// Whole-file helpers; both throw IoError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace jicgsim
