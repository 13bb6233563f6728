#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace geoaug {

/// FNV-1a of the canonical (key-sorted, compact) dump of `config` with the
/// top-level "jobs" entry removed, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// "# config_hash=<hash>" followed by "# <line>" for each extra line.
std::string comment_header(const std::string& hash, const std::vector<std::string>& extra = {});

/// Writes `content` through a temporary file and a rename.
void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_binary_file(const std::filesystem::path& path, const std::vector<char>& bytes);

/// Fixed-width text table; the first column is left-aligned, the rest
/// right-aligned.
std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

/// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

}  // namespace geoaug
