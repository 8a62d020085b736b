#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "alab/errors.hpp"
#include "alab/hamiltonian.hpp"
#include "alab/rng.hpp"
#include "test_support.hpp"

namespace alab {
namespace {

using testing::constant_potential;
using testing::cube_at_origin;
using testing::field_for;

std::vector<double> dense_spectrum(const SparseMatrix& a) {
  const Eigen::MatrixXd m(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& v = solver.eigenvalues();
  return {v.data(), v.data() + v.size()};
}

TEST(Interaction, StepProfileExamples) {
  const InteractionSpec step{1.0, 1.0, InteractionProfile::Step};
  const std::vector<double> close = {0.0, 1.0};
  const std::vector<double> apart = {0.0, 2.0};
  const std::vector<double> stacked = {3.0, 3.0, 3.0, 3.0};
  EXPECT_EQ(interaction_energy(close, 2, 1, step), 1.0);
  EXPECT_EQ(interaction_energy(apart, 2, 1, step), 0.0);
  EXPECT_EQ(interaction_energy(stacked, 4, 1, step), 6.0);
}

TEST(Interaction, HatProfileAndMaxNormPairDistance) {
  const InteractionSpec hat{2.0, 4.0, InteractionProfile::Hat};
  // Pair distance max(|0-1|, |0-0.5|) = 1, so Phi = 4 * (1 - 1/2).
  const std::vector<double> x = {0.0, 0.0, 1.0, 0.5};
  EXPECT_DOUBLE_EQ(interaction_energy(x, 2, 2, hat), 2.0);
  EXPECT_THROW((InteractionSpec{1.0, -1.0, InteractionProfile::Step}.validate()), DomainError);
}

TEST(Assembly, ThreePointLaplacianSpectrum) {
  const auto h = constant_potential(cube_at_origin(1, 1, 2), 0.0);
  const auto ev = dense_spectrum(h.matrix);
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_NEAR(ev[0], 2.0 - std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(ev[1], 2.0, 1e-12);
  EXPECT_NEAR(ev[2], 2.0 + std::sqrt(2.0), 1e-12);
}

TEST(Assembly, SinglePointCubeHoldsTheKineticDiagonal) {
  const auto h1 = constant_potential(cube_at_origin(1, 1, 0.5, 0.5), 0.0);
  ASSERT_EQ(h1.dim(), 1u);
  EXPECT_DOUBLE_EQ(h1.matrix.coeff(0, 0), 8.0);
  const auto h2 = constant_potential(cube_at_origin(1, 2, 1.0), 0.0);
  ASSERT_EQ(h2.dim(), 1u);
  EXPECT_DOUBLE_EQ(h2.matrix.coeff(0, 0), 4.0);
}

TEST(Assembly, FreeLaplacianMatchesTheSineOracle) {
  // Oracle: Dirichlet eigenvalues sum_a (2 - 2 cos(pi k_a / M)) for M cells.
  const auto h = constant_potential(cube_at_origin(1, 2, 4), 0.0);
  const int M = 8;
  std::vector<double> oracle;
  for (int a = 1; a < M; ++a) {
    for (int b = 1; b < M; ++b) {
      oracle.push_back(4.0 - 2.0 * std::cos(M_PI * a / M) - 2.0 * std::cos(M_PI * b / M));
    }
  }
  std::sort(oracle.begin(), oracle.end());
  const auto ev = dense_spectrum(h.matrix);
  ASSERT_EQ(ev.size(), oracle.size());
  for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_NEAR(ev[i], oracle[i], 1e-11);
}

TEST(Kronecker, TwoFoldSumOfTwoLevels) {
  const std::vector<double> single = {1.0, 3.0};
  EXPECT_EQ(kronecker_sum_spectrum(single, 2), (std::vector<double>{2.0, 4.0, 4.0, 6.0}));
}

TEST(Kronecker, NonInteractingTwoParticleSpectrumMatchesTheOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LatticeCube cube2 = cube_at_origin(2, 1, 5);
    const LatticeCube cube1 = cube_at_origin(1, 1, 5);
    const FieldSample field = field_for(cube2, seed);
    const auto h2 = assemble(cube2, field, {});
    const auto h1 = assemble(cube1, field, {});
    const auto ev = dense_spectrum(h2.matrix);
    const auto oracle = kronecker_sum_oracle(h1, 2);
    ASSERT_EQ(ev.size(), oracle.size());
    for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_NEAR(ev[i], oracle[i], 1e-9);
  }
}

TEST(Kronecker, OracleRejectsInteractingOrMultiParticleInput) {
  const auto interacting = constant_potential(cube_at_origin(1, 1, 3), 0.0,
                                              InteractionSpec{1.0, 1.0, InteractionProfile::Step});
  EXPECT_THROW(kronecker_sum_oracle(interacting, 2), DomainError);
  const auto two = constant_potential(cube_at_origin(2, 1, 3), 0.0);
  EXPECT_THROW(kronecker_sum_oracle(two, 2), DomainError);
}

TEST(Assembly, FieldMustCoverTheCube) {
  const LatticeCube cube = cube_at_origin(1, 1, 4);
  FieldSpec spec;
  spec.region = LatticeBox({0}, {2});
  const FieldSample small = generate_field(spec);
  EXPECT_THROW(assemble(cube, small, {}), DomainError);
}

TEST(Assembly, NegativePotentialIsRejected) {
  EXPECT_THROW(constant_potential(cube_at_origin(1, 1, 2), -1.0), DomainError);
}

TEST(AssemblyProperty, SymmetricWithGershgorinBelowTheSpectrum) {
  Engine engine = make_engine(31);
  std::uniform_int_distribution<int> n_dist(1, 2), l_dist(2, 5), seed_dist(0, 1 << 30);
  std::uniform_real_distribution<double> u_dist(0.0, 3.0);
  for (int c = 0; c < 30; ++c) {
    const int n = n_dist(engine);
    const LatticeCube cube = cube_at_origin(n, 1, l_dist(engine));
    const InteractionSpec inter{1.0, u_dist(engine), InteractionProfile::Step};
    const auto h = assemble(cube, field_for(cube, static_cast<std::uint64_t>(seed_dist(engine))),
                            inter);
    const Eigen::MatrixXd m(h.matrix);
    EXPECT_EQ((m - m.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const auto ev = dense_spectrum(h.matrix);
    EXPECT_GE(ev.front(), h.gershgorin_lower - 1e-12);
    EXPECT_GE(ev.front(), 0.0 - 1e-12);
  }
}

TEST(AssemblyProperty, SpectrumIsMonotoneInTheInteraction) {
  const LatticeCube cube = cube_at_origin(2, 1, 4);
  const FieldSample field = field_for(cube, 8);
  std::vector<double> previous;
  for (double u0 : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const auto ev = dense_spectrum(assemble(cube, field, {1.0, u0, InteractionProfile::Step}).matrix);
    if (!previous.empty()) {
      for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_GE(ev[i], previous[i] - 1e-12);
    }
    previous = ev;
  }
}

}  // namespace
}  // namespace alab
