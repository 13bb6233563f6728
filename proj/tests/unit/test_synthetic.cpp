#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "geoaug/errors.hpp"
#include "geoaug/synthetic.hpp"
#include "oracles.hpp"

using namespace geoaug;

TEST(Synthetic, ConstantFieldWithoutNoise) {
  SyntheticFieldSpec spec;
  spec.truth_kind = TruthKind::constant;
  spec.level = 50.0;
  spec.noise_std = 0.0;
  spec.aux_weight = 0.0;
  spec.n_points = 40;
  const auto data = generate_synthetic(spec, fixtures::island_mask());
  ASSERT_EQ(data.dataset.size(), 40u);
  for (const auto& s : data.dataset.samples()) EXPECT_EQ(s.cover, 50.0);
}

TEST(Synthetic, NoiselessCoverEqualsOracleExactly) {
  SyntheticFieldSpec spec;
  spec.noise_std = 0.0;
  spec.n_points = 60;
  spec.aux_weight = 0.01;
  spec.seed = 4;
  const RegionMask mask = fixtures::island_mask();
  const auto data = generate_synthetic(spec, mask);
  for (const auto& s : data.dataset.samples()) {
    EXPECT_EQ(s.cover, data.truth(s));
    EXPECT_TRUE(mask.contains({s.longitude, s.latitude}));
    EXPECT_NO_THROW(validate(s));
  }
}

TEST(Synthetic, GpSampleIsDeterministic) {
  SyntheticFieldSpec spec;
  spec.kernel = KernelExpr::rbf(200.0, 0.2);
  spec.n_points = 30;
  spec.seed = 9;
  const RegionMask mask = fixtures::island_mask();
  const auto a = generate_synthetic(spec, mask);
  const auto b = generate_synthetic(spec, mask);
  EXPECT_EQ(a.dataset, b.dataset);
  spec.seed = 10;
  EXPECT_NE(generate_synthetic(spec, mask).dataset, a.dataset);
}

TEST(Synthetic, GpSampleVariesSmoothly) {
  SyntheticFieldSpec spec;
  spec.seed = 2;
  const TruthOracle truth(spec, fixtures::island_mask());
  double lo = 100.0, hi = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const double v = truth(55.3 + 0.01 * i, -21.1, 1);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    EXPECT_LT(std::abs(truth(55.3 + 0.01 * i + 1e-6, -21.1, 1) - v), 1e-2);
  }
  EXPECT_GT(hi - lo, 1.0);
}

TEST(Synthetic, AnalyticMeanMatchesMaskIntegral) {
  SyntheticFieldSpec spec;
  spec.truth_kind = TruthKind::analytic;
  spec.noise_std = 0.0;
  spec.n_points = 500;
  spec.aux_weight = 0.0;
  spec.seed = 21;
  const RegionMask mask = fixtures::island_mask();
  const auto data = generate_synthetic(spec, mask);

  // Monte-Carlo integral of the truth over the mask with an independent sampler.
  const BoundingBox box = mask.bounding_box();
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> ulon(box.lon_min, box.lon_max), ulat(box.lat_min, box.lat_max);
  double sum = 0.0;
  std::size_t inside = 0;
  for (int i = 0; i < 1000000; ++i) {
    const double lon = ulon(rng), lat = ulat(rng);
    if (!mask.contains({lon, lat})) continue;
    sum += data.truth(lon, lat, 1);
    ++inside;
  }
  const double integral_mean = sum / static_cast<double>(inside);
  const auto covers = data.dataset.covers();
  double mean = 0.0;
  for (double c : covers) mean += c;
  mean /= static_cast<double>(covers.size());
  double var = 0.0;
  for (double c : covers) var += (c - mean) * (c - mean);
  const double se = std::sqrt(var / static_cast<double>(covers.size() - 1) / static_cast<double>(covers.size()));
  EXPECT_LT(std::abs(mean - integral_mean), 3.0 * se) << "mean " << mean << " vs " << integral_mean;
}

TEST(Synthetic, AuxiliariesArePlausible) {
  const AuxField f(0);
  const AuxValues peak = f.at(55.53, -21.12, 1);
  const AuxValues coast = f.at(55.30, -21.00, 1);
  EXPECT_GT(peak.altitude, coast.altitude);
  EXPECT_LT(peak.avg_temperature, coast.avg_temperature);
  EXPECT_GT(f.at(55.3, -21.0, 1).avg_temperature, f.at(55.3, -21.0, 7).avg_temperature);
  EXPECT_GT(f.at(55.75, -21.1, 2).precipitation, f.at(55.30, -21.1, 2).precipitation);
  for (int m = 1; m <= 12; ++m) {
    const AuxValues a = f.at(55.4, -21.2, m);
    EXPECT_GE(a.precipitation, 0.0);
    EXPECT_GT(a.luminance, 800.0);
    EXPECT_LT(a.luminance, 2000.0);
  }
}

TEST(Synthetic, SpecJsonRoundTripAndValidation) {
  SyntheticFieldSpec spec;
  spec.kernel = KernelExpr::sum(KernelExpr::lin(2.0), KernelExpr::rbf(3.0, 0.25));
  spec.seed = 17;
  spec.aux_weight = 0.02;
  const auto back = SyntheticFieldSpec::from_json(nlohmann::json::parse(spec.to_json().dump()));
  EXPECT_EQ(back.kernel, spec.kernel);
  EXPECT_EQ(back.seed, 17u);
  EXPECT_EQ(back.aux_weight, 0.02);
  EXPECT_THROW(SyntheticFieldSpec::from_json(nlohmann::json::parse(R"({"noise_std": -1})")), ConfigError);
  EXPECT_THROW(SyntheticFieldSpec::from_json(nlohmann::json::parse(R"({"n_points": 0})")), ConfigError);
  EXPECT_THROW(SyntheticFieldSpec::from_json(nlohmann::json::parse(R"({"truth_kind": "zebra"})")), ConfigError);
}

TEST(Synthetic, TinyMaskExhaustsRejectionCap) {
  SyntheticFieldSpec spec;
  spec.truth_kind = TruthKind::constant;
  spec.n_points = 1;
  const RegionMask tiny({{{55.3, -21.3}, {55.7, -21.3}, {55.3, -21.3 + 1e-13}},
                         {{55.7, -20.9}, {55.3, -20.9}, {55.7, -20.9 + 1e-13}}});
  EXPECT_THROW(generate_synthetic(spec, tiny), ConfigError);
}
