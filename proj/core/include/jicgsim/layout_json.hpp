#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "jicgsim/layout.hpp"

namespace jicgsim {

// JSON document for a CellLayout; the schema is described in
// docs/formats.md. Doubles are written with round-trip precision, so
// reading back a written layout gives an equal CellLayout.
std::string layout_to_json(const CellLayout& layout);
// Parses and validates. Throws InvalidArgument on malformed input.
CellLayout layout_from_json(std::string_view text);

void save_layout(const CellLayout& layout, const std::filesystem::path& path);
CellLayout load_layout(const std::filesystem::path& path);

}  // namespace jicgsim
