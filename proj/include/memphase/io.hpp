#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace memphase::io {

/// Writes `contents` to `path` via a temporary sibling and rename. Throws
/// IoError on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace memphase::io
