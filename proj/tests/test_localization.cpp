#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "alab/errors.hpp"
#include "alab/localization.hpp"
#include "alab/spectral.hpp"
#include "test_support.hpp"

namespace alab {
namespace {

using testing::constant_potential;
using testing::cube_at_origin;
using testing::field_for;

FieldSpec strong_iid(double amplitude) {
  FieldSpec law;
  law.kind = FieldKind::IidUniform;
  law.window = 0;
  law.law.amplitude = amplitude;
  return law;
}

DecayFit ground_fit(const AssembledHamiltonian& h) {
  const SpectralData s = spectral_bottom(h, 1);
  return eigenfunction_decay_fit(h.cube, s.vectors, s.lowest).front();
}

TEST(DecayFit, StrongDisorderLocalizesTheGroundState) {
  const LatticeCube cube = cube_at_origin(1, 1, 32);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto h = assemble(cube, field_for(cube, seed, strong_iid(10.0)), {});
    const DecayFit fit = ground_fit(h);
    EXPECT_TRUE(fit.localized);
    EXPECT_GT(fit.rate, 0.5);
    EXPECT_GT(fit.r_squared, 0.9);
  }
}

TEST(DecayFit, FreeGroundStateDecaysMuchSlower) {
  const LatticeCube cube = cube_at_origin(1, 1, 32);
  const DecayFit free = ground_fit(constant_potential(cube, 0.0));
  const DecayFit disordered = ground_fit(assemble(cube, field_for(cube, 1, strong_iid(10.0)), {}));
  EXPECT_LT(free.rate, 0.2 * disordered.rate);
}

TEST(DecayFit, ExponentialProfileRecoversItsRate) {
  const LatticeCube cube = cube_at_origin(1, 1, 16);
  Eigen::MatrixXd v(cube.size(), 1);
  for (std::size_t i = 0; i < cube.size(); ++i) {
    v(static_cast<Eigen::Index>(i), 0) = std::exp(-0.7 * std::abs(cube.coordinate(i, 0) - 3.0));
  }
  const std::vector<double> ev = {0.0};
  const DecayFit fit = eigenfunction_decay_fit(cube, v, ev).front();
  EXPECT_NEAR(fit.rate, 0.7, 1e-9);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(cube.coordinate(fit.peak, 0), 3.0);
}

TEST(DecayFit, IsDeterministic) {
  const LatticeCube cube = cube_at_origin(1, 1, 16);
  const auto a = ground_fit(assemble(cube, field_for(cube, 4, strong_iid(5.0)), {}));
  const auto b = ground_fit(assemble(cube, field_for(cube, 4, strong_iid(5.0)), {}));
  EXPECT_EQ(a.rate, b.rate);
  EXPECT_EQ(a.peak, b.peak);
}

TEST(Dynamics, EmptySpectralWindowGivesZero) {
  const LatticeCube cube = cube_at_origin(1, 1, 8);
  const auto h = constant_potential(cube, 0.0);
  DynamicalMomentSpec spec;
  spec.e_low = -2.0;
  spec.e_high = -1.0;
  spec.region = {3, 4};
  spec.times = {0.0, 1.0, 10.0};
  const auto trace = dynamical_moment(h, spec);
  EXPECT_EQ(trace.projected_states, 0u);
  for (double v : trace.values) EXPECT_EQ(v, 0.0);
}

TEST(Dynamics, TimeZeroMatchesADirectComputation) {
  const LatticeCube cube = cube_at_origin(1, 1, 6);
  const auto h = assemble(cube, field_for(cube, 6, strong_iid(3.0)), {});
  DynamicalMomentSpec spec;
  spec.s = 1.0;
  spec.e_low = 0.0;
  spec.e_high = 3.0;
  spec.region = {2, 5, 6};
  spec.times = {0.0, 2.5};
  const auto trace = dynamical_moment(h, spec);

  // Oracle: dense X P_I e^{-itH} 1_K with the propagator built explicitly.
  const Eigen::MatrixXd dense(h.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  const Eigen::Index dim = dense.rows();
  for (std::size_t ti = 0; ti < spec.times.size(); ++ti) {
    Eigen::MatrixXcd prop = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
      const double lambda = solver.eigenvalues()[a];
      if (lambda < spec.e_low || lambda > spec.e_high) continue;
      const Eigen::VectorXcd u = solver.eigenvectors().col(a).cast<std::complex<double>>();
      prop += std::polar(1.0, -lambda * spec.times[ti]) * u * u.adjoint();
    }
    Eigen::MatrixXcd m(dim, static_cast<Eigen::Index>(spec.region.size()));
    for (std::size_t k = 0; k < spec.region.size(); ++k) {
      m.col(static_cast<Eigen::Index>(k)) = prop.col(static_cast<Eigen::Index>(spec.region[k]));
    }
    for (Eigen::Index i = 0; i < dim; ++i) m.row(i) *= std::abs(cube.coordinate(i, 0));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    EXPECT_NEAR(trace.values[ti], svd.singularValues()(0), 1e-10);
  }
}

TEST(Dynamics, OversizedCubesAreAResourceError) {
  const auto h = constant_potential(cube_at_origin(2, 1, 40), 0.0);
  DynamicalMomentSpec spec;
  spec.e_high = 1.0;
  spec.times = {1.0};
  EXPECT_THROW(dynamical_moment(h, spec), ResourceError);
}

TEST(TimeGrid, LogarithmicGridAndRefinement) {
  const auto grid = log_time_grid(0.01, 100.0, 5);
  ASSERT_EQ(grid.size(), 5u);
  EXPECT_NEAR(grid[1], 0.1, 1e-15);
  EXPECT_EQ(grid.back(), 100.0);
  const auto fine = refine_time_grid(grid);
  ASSERT_EQ(fine.size(), 9u);
  EXPECT_NEAR(fine[1], std::sqrt(0.01 * 0.1), 1e-15);
  EXPECT_THROW(log_time_grid(0.0, 1.0, 5), DomainError);
}

TEST(Neighbourhood, MaxNormBall) {
  const LatticeCube cube = cube_at_origin(1, 2, 4);
  const std::vector<double> origin = {0.0, 0.0};
  const auto ball = neighbourhood(cube, *cube.find(origin), 1.0);
  EXPECT_EQ(ball.size(), 9u);
}

}  // namespace
}  // namespace alab
