#pragma once

#include <filesystem>
#include <string>

namespace dvrvqe::io {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace dvrvqe::io
