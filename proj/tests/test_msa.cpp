#include <gtest/gtest.h>

#include <cmath>

#include "alab/errors.hpp"
#include "alab/msa.hpp"
#include "alab/spectral.hpp"
#include "test_support.hpp"

namespace alab {
namespace {

using testing::constant_potential;
using testing::cube_at_origin;
using testing::field_for;

TEST(Rate, ExactExamples) {
  // 256^(-1/8) = 1/2, so the growth factor is 3/2 per level.
  EXPECT_DOUBLE_EQ(gamma_rate(1.0, 256.0, 1, 1), 1.5);
  EXPECT_DOUBLE_EQ(gamma_rate(2.0, 256.0, 2, 3), 4.5);
  EXPECT_DOUBLE_EQ(gamma_rate(1.0, 1.0, 1, 2), 4.0);
}

TEST(Rate, DecreasesInLengthAndParticleCount) {
  for (double L = 8.0; L < 1e6; L *= 3.0) {
    EXPECT_GT(gamma_rate(1.0, L, 1, 3), gamma_rate(1.0, 3.0 * L, 1, 3));
    EXPECT_GT(gamma_rate(1.0, L, 1, 3), gamma_rate(1.0, L, 2, 3));
    EXPECT_GT(gamma_rate(1.0, L, 2, 3), gamma_rate(1.0, L, 3, 3));
  }
}

TEST(Parameters, DerivedConstantsAtExactScales) {
  // 16^(-1/4) = 1/2 and 16^(-1/2) = 1/4.
  const ScaleParameters s = derive_parameters(2, 1, 1, 16.0, 0.5, 0.5);
  EXPECT_NEAR(s.m, 0.25 * 0.5 * 0.5 / (3.0 * std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(s.m, 0.0147314, 1e-7);
  EXPECT_DOUBLE_EQ(s.e_star, 0.125);
  EXPECT_TRUE(s.side_condition_holds);

  const ScaleParameters t = derive_parameters(2, 1, 1, 256.0, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(t.e_star, 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(t.rate(256.0), t.m * 2.25);
  EXPECT_NEAR(t.threshold(256.0), std::exp(-t.m * 2.25 * 256.0), 1e-15);
}

TEST(Parameters, ProbabilityBoundExamples) {
  EXPECT_DOUBLE_EQ(edge_probability_bound(16.0, 0.5, 1, 2), std::pow(16.0, -4.0));
  EXPECT_DOUBLE_EQ(edge_probability_bound(16.0, 0.5, 2, 2), 1.0 / 16.0);
  const ScaleParameters s = derive_parameters(2, 2, 1, 8.0, 0.25, 0.5);
  EXPECT_DOUBLE_EQ(s.theory_bound(64.0), 1.0 / 8.0);
}

TEST(Parameters, InvalidInputsAreConfigErrors) {
  EXPECT_THROW(derive_parameters(2, 1, 1, 8.0, 0.5, 1.5), ConfigError);
  EXPECT_THROW(derive_parameters(2, 1, 1, 8.0, 0.5, 0.0), ConfigError);
  EXPECT_THROW(derive_parameters(2, 1, 1, 4.0, 0.5, 0.5), ConfigError);
  EXPECT_THROW(derive_parameters(2, 1, 1, 8.0, 0.0, 0.5), ConfigError);
  EXPECT_THROW(derive_parameters(2, 3, 1, 8.0, 0.5, 0.5), ConfigError);
  EXPECT_THROW(derive_parameters(2, 1, 0, 8.0, 0.5, 0.5), ConfigError);
  try {
    derive_parameters(2, 1, 1, 8.0, 0.5, 1.5);
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("gamma_ct"), std::string::npos);
  }
}

TEST(Parameters, ThresholdDecreasesAlongTheScales) {
  const ScaleParameters s = derive_parameters(3, 1, 1, 8.0, 0.5, 0.5);
  double previous = 1.0;
  for (double L : {8.0, 23.0, 111.0, 1170.0}) {
    EXPECT_LT(s.threshold(L), previous);
    previous = s.threshold(L);
  }
}

TEST(ScaleSequence, PowerGrowthWithCeiling) {
  const ScaleSequence s = scale_sequence(8, 1.5, 3);
  EXPECT_EQ(s.lengths, (std::vector<long long>{8, 23, 111}));
  EXPECT_FALSE(s.truncated);
  EXPECT_EQ(scale_sequence(16, 1.5, 2).lengths, (std::vector<long long>{16, 64}));
  EXPECT_EQ(scale_sequence(8, 1.5, 1).lengths, (std::vector<long long>{8}));
}

TEST(ScaleSequence, TruncatesAtTheMaximum) {
  const ScaleSequence s = scale_sequence(8, 1.5, 5, 1000);
  EXPECT_EQ(s.lengths, (std::vector<long long>{8, 23, 111}));
  EXPECT_TRUE(s.truncated);
}

TEST(ScaleSequence, RejectsDegenerateGrowth) {
  EXPECT_THROW(scale_sequence(8, 1.0, 3), ConfigError);
  EXPECT_THROW(scale_sequence(8, 1.5, 0), ConfigError);
  EXPECT_THROW(scale_sequence(4, 1.5, 2), ConfigError);
}

TEST(NsTest, EnergyOnTheSpectrumIsSingular) {
  const LatticeCube cube = cube_at_origin(1, 1, 8);
  const auto h = assemble(cube, field_for(cube, 2), {});
  const SpectralData s = spectral_bottom(h, 1);
  const ScaleParameters scale = derive_parameters(2, 1, 1, 8.0, 0.5, 0.5);
  const NsVerdict v = ns_test(h, scale, s.e0, {}, &s);
  EXPECT_EQ(v.verdict, Verdict::S);
  EXPECT_EQ(v.reason, VerdictReason::SpectralCollision);
  EXPECT_FALSE(v.block_norm.has_value());
}

TEST(NsTest, FreeCubeIsNonSingularWellBelowTheSpectrum) {
  const auto h = constant_potential(cube_at_origin(1, 1, 32), 0.0);
  const SpectralData s = spectral_bottom(h, 1);
  const ScaleParameters scale = derive_parameters(2, 1, 1, 32.0, 0.5, 0.5);
  const NsVerdict v = ns_test(h, scale, s.e0 - 1.0, {}, &s);
  EXPECT_EQ(v.verdict, Verdict::NS);
  EXPECT_EQ(v.reason, VerdictReason::NormOk);
  ASSERT_TRUE(v.block_norm.has_value());
  EXPECT_LE(*v.block_norm, v.threshold);
  EXPECT_DOUBLE_EQ(v.threshold, scale.threshold(32.0));
}

TEST(NsTest, NearTheSpectrumTheNormExceedsTheThreshold) {
  const auto h = constant_potential(cube_at_origin(1, 1, 8), 0.0);
  const SpectralData s = spectral_bottom(h, 1);
  const ScaleParameters scale = derive_parameters(2, 1, 1, 8.0, 0.5, 0.5);
  const NsVerdict v = ns_test(h, scale, s.e0 - 1e-6, {}, &s);
  EXPECT_EQ(v.verdict, Verdict::S);
  EXPECT_EQ(v.reason, VerdictReason::NormExceeded);
  EXPECT_EQ(to_string(v.reason), "norm-exceeded");
}

}  // namespace
}  // namespace alab
