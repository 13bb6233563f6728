#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "geoaug/errors.hpp"
#include "geoaug/report_io.hpp"

using namespace geoaug;

TEST(ConfigHash, IgnoresKeyOrderAndJobs) {
  const auto a = nlohmann::json::parse(R"({"seed": 3, "method": "GP-RBF", "jobs": 1})");
  const auto b = nlohmann::json::parse(R"({"method": "GP-RBF", "jobs": 8, "seed": 3})");
  const auto c = nlohmann::json::parse(R"({"method": "GP-RBF", "seed": 4})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(ConfigHash, MatchesIndependentFnv) {
  // FNV-1a 64 of the compact dump {"a":1}.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : std::string(R"({"a":1})")) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream hex;
  hex << std::hex;
  hex.width(16);
  hex.fill('0');
  hex << h;
  EXPECT_EQ(config_hash(nlohmann::json::parse(R"({"a": 1, "jobs": 2})")), hex.str());
}

TEST(CommentHeader, Format) {
  EXPECT_EQ(comment_header("abc"), "# config_hash=abc\n");
  EXPECT_EQ(comment_header("abc", {"seeds=0..9"}), "# config_hash=abc\n# seeds=0..9\n");
}

TEST(WriteTextFile, ReplacesContent) {
  const auto path = std::filesystem::temp_directory_path() / "geoaug_report.txt";
  write_text_file(path, "one\n");
  write_text_file(path, "two\n");
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  EXPECT_EQ(s.str(), "two\n");
  EXPECT_THROW(write_text_file(path / "x.txt", "x"), DataError);
  std::filesystem::remove(path);
}

TEST(FormatTable, AlignsColumns) {
  const std::string t = format_table({"model", "Base"}, {{"LR", "1.50"}, {"KNN", "12.25"}});
  std::istringstream in(t);
  std::string l1, rule, l2, l3;
  std::getline(in, l1);
  std::getline(in, rule);
  std::getline(in, l2);
  std::getline(in, l3);
  EXPECT_EQ(rule, std::string(l1.size(), '-'));
  EXPECT_EQ(l2.size(), l3.size());
  EXPECT_EQ(l2.substr(0, 2), "LR");
  EXPECT_EQ(l2.substr(l2.size() - 4), "1.50");
  EXPECT_EQ(format_fixed(3.14159, 2), "3.14");
  EXPECT_EQ(format_fixed(2.0, 3), "2.000");
}
