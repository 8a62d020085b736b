#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "alab/geometry.hpp"
#include "alab/hamiltonian.hpp"

namespace alab {

struct DecayFit {
  std::size_t index = 0;     ///< column of the eigenvector
  double eigenvalue = 0.0;
  std::size_t peak = 0;      ///< grid index of max |psi|
  double rate = 0.0;         ///< minus the slope of ln(envelope) vs distance
  double r_squared = 0.0;
  std::size_t points = 0;    ///< distances entering the fit
  bool localized = false;    ///< rate > 0 and r_squared >= 0.5
};

/// For each eigenvector, the envelope A(r) = max |psi(x)| over grid points
/// at max-norm distance >= r from the peak, fitted as ln A(r) = c - rate r
/// over distances where A(r) stays above noise_floor * max |psi|.
std::vector<DecayFit> eigenfunction_decay_fit(const LatticeCube& cube,
                                              const Eigen::MatrixXd& vectors,
                                              std::span<const double> eigenvalues,
                                              double noise_floor = 1e-12);

struct DynamicalMomentSpec {
  double s = 1.0;
  double e_low = 0.0;   ///< spectral window I = [e_low, e_high]
  double e_high = 0.0;
  std::vector<std::size_t> region;  ///< grid indices of K
  std::vector<double> times;        ///< t >= 0
};

struct DynamicalMomentTrace {
  std::vector<double> times;
  std::vector<double> values;  ///< ||X^s e^(-itH) P_I 1_K|| per time
  double max_value = 0.0;
  double argmax_time = 0.0;
  std::size_t projected_states = 0;  ///< eigenvalues inside I
};

/// Largest dimension accepted by dynamical_moment (full diagonalization).
inline constexpr std::size_t kDynamicsDimensionCap = 4000;

/// Operator norm of X^s e^(-itH) P_I 1_K on the grid for each t, where
/// (X psi)(x) = |x| psi(x) with the max-norm of the absolute coordinates.
/// ResourceError above kDynamicsDimensionCap.
DynamicalMomentTrace dynamical_moment(const AssembledHamiltonian& h,
                                      const DynamicalMomentSpec& spec);

/// count points t_i = t_min (t_max / t_min)^(i / (count - 1)).
std::vector<double> log_time_grid(double t_min, double t_max, std::size_t count);

/// Grid with the geometric midpoint inserted between neighbours, which
/// doubles the density of a logarithmic grid.
std::vector<double> refine_time_grid(std::span<const double> times);

/// Grid indices within max-norm distance `radius` of grid point `center`.
std::vector<std::size_t> neighbourhood(const LatticeCube& cube, std::size_t center,
                                       double radius);

}  // namespace alab
