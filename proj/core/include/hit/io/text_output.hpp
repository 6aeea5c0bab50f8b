#pragma once

#include <filesystem>
#include <string>

namespace hit {

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
void write_binary_atomic(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace hit
