#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qform::cli {

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never see a half-written file. Parent directories are created.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Comma-separated rows without quoting; the header row is included.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

}  // namespace qform::cli
