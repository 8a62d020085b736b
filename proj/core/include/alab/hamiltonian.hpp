#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "alab/field.hpp"
#include "alab/geometry.hpp"

namespace alab {

/// Compressed sparse rows, assembled in grid lexicographic order.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class InteractionProfile { Step, Hat };

std::string_view to_string(InteractionProfile profile);
InteractionProfile parse_interaction_profile(std::string_view text);

/// Pair potential Phi with support in [0, r0]: step is u0 * 1[r <= r0],
/// hat is u0 * max(0, 1 - r / r0).
struct InteractionSpec {
  double r0 = 1.0;
  double u0 = 0.0;
  InteractionProfile profile = InteractionProfile::Step;

  double phi(double r) const noexcept;
  bool interacting() const noexcept { return u0 != 0.0; }
  void validate() const;
};

/// U(x) = sum over pairs i < j of Phi(|x_i - x_j|), max-norm pair distance.
/// `x` holds n*d coordinates, particle-major.
double interaction_energy(std::span<const double> x, int n, int d,
                          const InteractionSpec& spec);

/// Lattice cell holding a continuum coordinate: floor(x + 1/2).
inline int field_cell(double x) { return static_cast<int>(std::floor(x + 0.5)); }

/// Smallest lattice box whose cells cover every particle coordinate of the
/// cube grid.
LatticeBox required_field_region(const LatticeCube& cube);

/// -Delta + U + V restricted to the cube with Dirichlet boundary conditions.
struct AssembledHamiltonian {
  LatticeCube cube;
  InteractionSpec interaction;
  SparseMatrix matrix;
  Eigen::VectorXd potential;         ///< sum_k V(x_k) per grid point
  Eigen::VectorXd interaction_part;  ///< U(x) per grid point
  double gershgorin_lower = 0.0;     ///< min_i (A_ii - sum_j |A_ij|)

  std::size_t dim() const noexcept { return cube.size(); }
  double kinetic_diagonal() const noexcept {
    return 2.0 * cube.axes() / (cube.spacing() * cube.spacing());
  }
};

/// Site potential on Z^d, read at field_cell of each particle coordinate.
using SitePotential = std::function<double(std::span<const int>)>;

AssembledHamiltonian assemble(const LatticeCube& cube, const FieldSample& field,
                              const InteractionSpec& interaction);
AssembledHamiltonian assemble(const LatticeCube& cube, const SitePotential& potential,
                              const InteractionSpec& interaction);

/// All n-fold sums of the given single-particle eigenvalues, sorted.
std::vector<double> kronecker_sum_spectrum(std::span<const double> single, int n);

/// Spectrum of the non-interacting n-particle operator built from the
/// one-particle Hamiltonian h1, by dense diagonalization of h1.
/// DomainError when h1 was assembled with a non-zero interaction or n > 1
/// particles.
std::vector<double> kronecker_sum_oracle(const AssembledHamiltonian& h1, int n);

}  // namespace alab
