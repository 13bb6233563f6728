#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "geoaug/errors.hpp"
#include "geoaug/geodata.hpp"
#include "oracles.hpp"

using namespace geoaug;

namespace {

const std::string kHeader = "longitude,latitude,altitude,avg_temperature,precipitation,month,year,luminance,cover\n";

Dataset parse(const std::string& body, const Bounds& b = {}) {
  std::istringstream in(kHeader + body);
  return read_csv(in, b);
}

Dataset numbered(std::size_t n) {
  std::vector<GeoSample> s;
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back(fixtures::sample(55.3 + 0.0005 * static_cast<double>(i), -21.1, static_cast<double>(i % 100)));
  }
  return Dataset::observed(std::move(s));
}

}  // namespace

TEST(LoadCsv, ParsesDocumentedRow) {
  const Dataset d = parse("55.50,-21.10,300,24,120,6,2015,1200,12.5\n");
  ASSERT_EQ(d.size(), 1u);
  const GeoSample& s = d[0];
  EXPECT_EQ(s.longitude, 55.50);
  EXPECT_EQ(s.latitude, -21.10);
  EXPECT_EQ(s.altitude, 300);
  EXPECT_EQ(s.avg_temperature, 24);
  EXPECT_EQ(s.precipitation, 120);
  EXPECT_EQ(s.month, 6);
  EXPECT_EQ(s.year, 2015);
  EXPECT_EQ(s.luminance, 1200);
  EXPECT_EQ(s.cover, 12.5);
  EXPECT_EQ(d.provenance()[0], Provenance::observed);
}

TEST(LoadCsv, MonthOutOfRange) {
  try {
    parse("55.50,-21.10,300,24,120,13,2015,1200,12.5\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("month out of range"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
}

TEST(LoadCsv, RejectsInvalidRows) {
  EXPECT_THROW(parse("55.50,-21.10,300,24,120,6,2015,1200,101\n"), DataError);
  EXPECT_THROW(parse("55.50,-21.10,300,24,120,6,2015,1200\n"), DataError);
  EXPECT_THROW(parse("55.50,-21.10,abc,24,120,6,2015,1200,1\n"), DataError);
  EXPECT_THROW(parse("56.50,-21.10,300,24,120,6,2015,1200,1\n"), DataError);
  EXPECT_THROW(parse("55.50,-21.10,nan,24,120,6,2015,1200,1\n"), DataError);
  EXPECT_NO_THROW(parse("56.50,-21.10,300,24,120,6,2015,1200,1\n", Bounds::unbounded()));
}

TEST(LoadCsv, MissingColumnIsReported) {
  std::istringstream in("longitude,latitude,altitude,avg_temperature,precipitation,month,year,cover\n");
  try {
    read_csv(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("luminance"), std::string::npos);
  }
}

TEST(LoadCsv, FileWith745RowsGives745ObservedSamples) {
  const Dataset d = numbered(745);
  const auto path = std::filesystem::temp_directory_path() / "geoaug_745.csv";
  save_csv(d, path);
  const Dataset back = load_csv(path);
  EXPECT_EQ(back.size(), 745u);
  EXPECT_EQ(back.count(Provenance::observed), 745u);
  std::filesystem::remove(path);
}

TEST(LoadCsv, MissingFileIsDataError) {
  EXPECT_THROW(load_csv("/nonexistent/geoaug.csv"), DataError);
}

TEST(SaveCsv, RoundTripIsIdentity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<GeoSample> samples;
  for (int i = 0; i < 50; ++i) {
    GeoSample s = fixtures::sample(55.3 + 0.4 * u(rng), -21.3 + 0.4 * u(rng), 100.0 * u(rng), 1 + i % 12,
                                   2013 + i % 6);
    s.altitude = 1000.0 * u(rng);
    s.avg_temperature = 15.0 + 15.0 * u(rng);
    s.precipitation = 1400.0 * u(rng);
    s.luminance = 900.0 + 990.0 * u(rng);
    samples.push_back(s);
  }
  const Dataset d = Dataset::observed(samples).appended({fixtures::sample(55.5, -21.0, 7.25)}, Provenance::augmented);
  for (bool prov : {false, true}) {
    std::stringstream buf;
    write_csv(d, buf, {prov, {"config_hash=abc"}});
    const Dataset back = read_csv(buf);
    ASSERT_EQ(back.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(back[i], d[i]);
    if (prov) {
      EXPECT_EQ(back.provenance(), d.provenance());
    }
  }
}

TEST(Split, SizesFollowRounding) {
  const auto s10 = split_train_test(numbered(10), 0.3, 7);
  EXPECT_EQ(s10.train.size(), 7u);
  EXPECT_EQ(s10.test.size(), 3u);
  const auto s745 = split_train_test(numbered(745), 0.3, 1);
  // 0.3 * 745 = 223.5 rounds up.
  EXPECT_EQ(s745.train.size(), 521u);
  EXPECT_EQ(s745.test.size(), 224u);
}

TEST(Split, DeterministicDisjointAndComplete) {
  const Dataset d = numbered(97);
  for (std::uint64_t seed : {0ull, 1ull, 12345ull}) {
    const auto a = split_train_test(d, 0.3, seed);
    const auto b = split_train_test(d, 0.3, seed);
    EXPECT_EQ(a.train_indices, b.train_indices);
    EXPECT_EQ(a.test_indices, b.test_indices);
    std::set<std::size_t> all(a.train_indices.begin(), a.train_indices.end());
    for (auto i : a.test_indices) EXPECT_TRUE(all.insert(i).second) << "index in both folds";
    EXPECT_EQ(all.size(), d.size());
    for (std::size_t k = 0; k < a.test_indices.size(); ++k) EXPECT_EQ(a.test[k], d[a.test_indices[k]]);
  }
  EXPECT_NE(split_train_test(d, 0.3, 1).test_indices, split_train_test(d, 0.3, 2).test_indices);
}

TEST(Split, RejectsDegenerateRequests) {
  EXPECT_THROW(split_train_test(numbered(10), 0.0, 1), ConfigError);
  EXPECT_THROW(split_train_test(numbered(10), 1.0, 1), ConfigError);
  EXPECT_THROW(split_train_test(numbered(1), 0.5, 1), DataError);
  EXPECT_THROW(split_train_test(numbered(3), 0.01, 1), DataError);
}

TEST(Features, EncodingAndScaling) {
  GeoSample s = fixtures::sample(55.5, -21.0, 10.0, 3, 2016);
  const Vector row = feature_row(s);
  ASSERT_EQ(row.size(), 9);
  EXPECT_EQ(feature_names().size(), 9u);
  EXPECT_NEAR(row(6), 1.0, 1e-15);  // sin(2*pi*3/12)
  EXPECT_NEAR(row(7), 0.0, 1e-15);
  EXPECT_EQ(row(8), 3.0);  // year - 2013
  FeatureOptions no_coords;
  no_coords.include_coordinates = false;
  EXPECT_EQ(feature_row(s, no_coords).size(), 7);
  FeatureOptions coords;
  coords.coords_only = true;
  EXPECT_EQ(feature_row(s, coords).size(), 2);

  const Matrix x = feature_matrix(numbered(40));
  const FeatureScaler sc = FeatureScaler::fit(x);
  const Matrix z = sc.transform(x);
  for (Index j = 0; j < z.cols(); ++j) {
    EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-9);
    const double sd = std::sqrt(z.col(j).array().square().mean());
    if (j == 0) {
      EXPECT_NEAR(sd, 1.0, 1e-9);
    }
    if (j == 1) {
      EXPECT_LT(sd, 1e-12);  // constant latitude stays centred
    }
  }
  const Vector r0 = sc.transform_row(x.row(3).transpose());
  EXPECT_LT((r0 - z.row(3).transpose()).norm(), 1e-15);
}
