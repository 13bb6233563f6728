#include "geoaug/report_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geoaug/errors.hpp"
#include "geoaug/hash.hpp"

namespace geoaug {

std::string config_hash(const nlohmann::json& config) {
  nlohmann::json canonical = config;  // nlohmann::json keeps object keys sorted
  if (canonical.is_object()) canonical.erase("jobs");
  return fnv1a_hex(canonical.dump());
}

std::string comment_header(const std::string& hash, const std::vector<std::string>& extra) {
  std::string out = "# config_hash=" + hash + "\n";
  for (const auto& line : extra) out += "# " + line + "\n";
  return out;
}

namespace {

void write_bytes(const std::filesystem::path& path, const char* data, std::size_t size) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(data, static_cast<std::streamsize>(size));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  write_bytes(path, content.data(), content.size());
}

void write_binary_file(const std::filesystem::path& path, const std::vector<char>& bytes) {
  write_bytes(path, bytes.data(), bytes.size());
}

std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < r.size() ? r[c] : "";
      const std::string pad(width[c] - std::min(width[c], cell.size()), ' ');
      if (c) out << "  ";
      if (c == 0) out << cell << pad;
      else out << pad << cell;
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  total += 2 * (width.empty() ? 0 : width.size() - 1);
  out << std::string(total, '-') << '\n';
  for (const auto& r : rows) emit(r);
  return out.str();
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace geoaug
