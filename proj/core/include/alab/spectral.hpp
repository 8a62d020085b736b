#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "alab/geometry.hpp"
#include "alab/hamiltonian.hpp"
#include "alab/lanczos.hpp"

namespace alab {

/// Bottom of the spectrum of a finite-volume Hamiltonian.
struct SpectralData {
  double e0 = 0.0;
  std::vector<double> lowest;   ///< k lowest eigenvalues, ascending
  Eigen::MatrixXd vectors;      ///< eigenvectors for `lowest`
  std::vector<double> residuals;
  std::vector<double> spectrum; ///< full spectrum when computed densely
  bool dense = false;

  /// dist(E, spectrum) when it can be decided from the stored eigenvalues:
  /// always for a full spectrum, otherwise for E <= lowest.back().
  std::optional<double> gap_at(double energy) const;
};

/// k lowest eigenpairs with residual certificate. Also checks that e0 is not
/// below the Gershgorin bound recorded at assembly (NumericError if it is).
SpectralData spectral_bottom(const AssembledHamiltonian& h, int k,
                             const EigenOptions& opts = {});
SpectralData spectral_bottom(const SparseMatrix& a, int k, const EigenOptions& opts = {});

/// dist(E, sigma(A)), reusing `hint` when it decides the question.
double distance_to_spectrum(const SparseMatrix& a, double energy,
                            const SpectralData* hint = nullptr,
                            const EigenOptions& opts = {});

enum class SolveMethod { Dense, Iterative };
std::string_view to_string(SolveMethod method);

struct ResolventOptions {
  /// Direct sparse factorization up to this dimension, Krylov solves above.
  std::size_t direct_limit = 50000;
  /// ||(A - E) x - e_j|| bound every column solve must certify.
  double certificate = 1e-8;
  /// Energies closer than this to the spectrum are collisions.
  double collision_tolerance = 1e-10;
  int refinement_steps = 3;
  int max_iterations = 20000;
  /// Block norms with min(rows, cols) up to this size use the dense Gram
  /// eigenvalue; larger blocks use power iteration.
  std::size_t dense_gram_limit = 512;
  double power_tolerance = 1e-10;
  int power_max_iterations = 10000;
  EigenOptions eigen;
};

/// Process-wide tally of resolvent column solves.
struct CertificateStats {
  std::uint64_t solves = 0;
  std::uint64_t failures = 0;
  double max_residual = 0.0;
};
CertificateStats certificate_stats();
void reset_certificate_stats();

/// (A - E)^-1 applied to unit vectors, with per-column residual certificate.
/// Holds a reference to `a`, which must outlive the object.
class Resolvent {
 public:
  /// `below_spectrum` asserts E < min sigma(A), which makes A - E positive
  /// definite and lets the Krylov path use conjugate gradients.
  Resolvent(const SparseMatrix& a, double energy, bool below_spectrum,
            ResolventOptions opts = {});
  ~Resolvent();
  Resolvent(const Resolvent&) = delete;
  Resolvent& operator=(const Resolvent&) = delete;

  double energy() const noexcept { return energy_; }
  SolveMethod method() const noexcept { return method_; }

  /// Columns (A - E)^-1 e_j for each j. Throws SpectralCollision when a
  /// column misses the certificate and E is not known to be below the
  /// spectrum, NumericError otherwise.
  Eigen::MatrixXd solve_unit_columns(std::span<const std::size_t> columns) const;

  /// Largest certified residual over all solves made through this object.
  double max_residual() const noexcept { return max_residual_; }

 private:
  struct Impl;
  const SparseMatrix& a_;
  double energy_;
  bool below_spectrum_;
  ResolventOptions opts_;
  SolveMethod method_;
  std::unique_ptr<Impl> impl_;
  mutable double max_residual_ = 0.0;
};

/// Largest singular value of a dense block.
double operator_norm(const Eigen::MatrixXd& block, const ResolventOptions& opts = {});
/// Power iteration on B^T B; NumericError when the cap is reached.
double power_iteration_norm(const Eigen::MatrixXd& block, double tolerance, int max_iterations);

struct ResolventBlockNorm {
  double energy = 0.0;
  RegionMask from_mask;
  RegionMask to_mask;
  double norm = 0.0;
  SolveMethod method = SolveMethod::Dense;
  double max_residual = 0.0;
  double spectral_distance = 0.0;
  std::size_t columns = 0;
};

/// ||1_to (A - E)^-1 1_from|| over explicit index sets.
ResolventBlockNorm resolvent_block_norm(const SparseMatrix& a, double energy,
                                        std::span<const std::size_t> from,
                                        std::span<const std::size_t> to,
                                        const ResolventOptions& opts = {},
                                        const SpectralData* hint = nullptr);

/// ||1_to G(E) 1_from|| for region masks of the Hamiltonian's cube. Throws
/// SpectralCollision when dist(E, spectrum) <= opts.collision_tolerance.
ResolventBlockNorm resolvent_block_norm(const AssembledHamiltonian& h, double energy,
                                        const RegionMask& from_mask,
                                        const RegionMask& to_mask,
                                        const ResolventOptions& opts = {},
                                        const SpectralData* hint = nullptr);

/// Right-hand side of the Combes-Thomas bound,
/// exp(gamma sqrt(eta D)) exp(-gamma sqrt(eta) dist) / ((1 - gamma^2) eta),
/// eta = e0 - E.
double combes_thomas_envelope(double energy, double e0, double gamma, int ambient_dim,
                              double distance);

struct CombesThomasPair {
  std::size_t x = 0;
  std::size_t y = 0;
  double distance = 0.0;
  double measured = 0.0;
  double envelope = 0.0;            ///< ambient dimension D = n*d
  double envelope_particle_dim = 0.0;  ///< same with d in place of D
  double ratio = 0.0;               ///< measured / envelope
};

struct CombesThomasReport {
  double energy = 0.0;
  double e0 = 0.0;
  double eta = 0.0;
  double gamma = 0.0;
  int ambient_dim = 0;
  int particle_dim = 0;
  std::vector<CombesThomasPair> pairs;
  std::vector<std::size_t> violations;  ///< rows of `pairs`
  double max_ratio = 0.0;
};

struct CombesThomasOptions {
  double min_eta = 0.05;
  double tolerance = 1e-9;
  ResolventOptions resolvent;
};

/// Measures |G(E)(x, y)| for each pair and compares it with the envelope at
/// the max-norm distance. Requires E < e0 with e0 - E >= opts.min_eta.
CombesThomasReport verify_combes_thomas(const AssembledHamiltonian& h, double energy,
                                        double gamma,
                                        std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                        const CombesThomasOptions& opts = {},
                                        const SpectralData* hint = nullptr);

std::vector<std::pair<std::size_t, std::size_t>> all_pairs(std::size_t size);

}  // namespace alab
