#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alab/field.hpp"
#include "alab/geometry.hpp"
#include "alab/hamiltonian.hpp"
#include "alab/msa.hpp"
#include "alab/spectral.hpp"
#include "alab/stats.hpp"

namespace alab {

/// Monte Carlo estimate of an event probability.
struct ProbabilityEstimate {
  std::string event;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  double lo = 0.0;  ///< 95% interval
  double hi = 1.0;
  bool one_sided = false;
  /// "wilson" for plain counting, "normal" for importance-sampling means.
  std::string interval_method = "wilson";
  double standard_error = 0.0;
  std::optional<double> theory_bound;
};

/// Counting estimate with a Wilson interval.
ProbabilityEstimate counting_estimate(std::string event, std::uint64_t hits,
                                      std::uint64_t trials);

/// Shape of the cubes sampled by the Monte Carlo drivers, centered at 0.
struct CubeParameters {
  int n = 1;
  int d = 1;
  double L = 8.0;
  double h = 1.0;
  InteractionSpec interaction;
  double budget = kDefaultCubeBudget;
};

struct McOptions {
  std::uint64_t trials = 10000;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  ResolventOptions resolvent;
};

/// Field spec of trial `trial`: the template law on the region the cube
/// needs, seeded from derive_seed(master, trial).
FieldSpec trial_field_spec(const FieldSpec& law, const LatticeCube& cube,
                           std::uint64_t master_seed, std::uint64_t trial);

/// The parameter set of `scale` re-derived with L0 = L.
ScaleParameters parameters_at(const ScaleParameters& scale, double L);

struct EdgeTrial {
  std::uint64_t seed = 0;
  double e0 = 0.0;
  bool below_edge = false;      ///< e0 <= L^(-1/2)
  bool below_low_edge = false;  ///< e0 <= b L^(-2)
};

struct EdgeReport {
  double L = 0.0;
  double b = 1.0;
  ProbabilityEstimate edge;      ///< {e0 <= L^(-1/2)}, bound L^(-2 p 4^(N-n))
  ProbabilityEstimate low_edge;  ///< {e0 <= b L^(-2)}
  double mean_e0 = 0.0;
  double min_e0 = 0.0;
  std::vector<EdgeTrial> samples;
};

/// Samples fields, assembles H on the cube and counts the spectral-edge
/// events. Needs trials >= 100 (ConfigError).
EdgeReport mc_edge_probability(const FieldSpec& law, const CubeParameters& cube,
                               const ScaleParameters& scale, const McOptions& opts,
                               double b = 1.0);

struct SingularTrial {
  std::uint64_t seed = 0;
  double e0 = 0.0;
  bool below_edge = false;
  std::size_t singular_energies = 0;  ///< grid energies with verdict S
  bool singular = false;              ///< below_edge or any S on the grid
  double max_norm_ratio = 0.0;        ///< max block norm / threshold on the grid
};

struct SingularityReport {
  double L = 0.0;
  ScaleParameters scale;  ///< parameters at L0 = L
  std::vector<double> energy_grid;
  ProbabilityEstimate singular;
  std::uint64_t edge_hits = 0;
  /// Trials singular on the grid although e0 > L^(-1/2).
  std::uint64_t extra_grid_hits = 0;
  /// Trials with e0 > L^(-1/2) where some grid energy had
  /// dist(E, spectrum) <= L^(-1/2) / 2.
  std::uint64_t gap_assertion_failures = 0;
  /// Trials with e0 > L^(-1/2) where some grid energy was S.
  std::uint64_t ns_assertion_failures = 0;
  double max_norm_ratio = 0.0;  ///< over trials with e0 > L^(-1/2)
  std::vector<SingularTrial> samples;
};

/// Per trial: e0, the gap argument, and ns_test on the energy grid
/// E* - j * step (j = 0, 1, ...) down to 0. Needs trials >= 100 and
/// 0 < step <= E* (ConfigError).
SingularityReport mc_singularity_probability(const FieldSpec& law, const CubeParameters& cube,
                                             const ScaleParameters& scale, const McOptions& opts,
                                             double energy_grid_step);

struct LdpOptions {
  std::uint64_t trials = 10000;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  /// Exponentially tilted sampling; falls back to plain counting (with a
  /// warning) when the innovation law cannot be tilted.
  bool importance_sampling = true;
};

struct LdpVolume {
  int L = 0;
  double volume = 0.0;  ///< (2L)^d sites in [-L, L)^d
  double tilt = 0.0;
  ProbabilityEstimate estimate;
  double mean_average = 0.0;  ///< mean of the box average under the sampler
  std::uint64_t markov_checks = 0;
  std::uint64_t markov_failures = 0;
};

struct LdpReport {
  double s0 = 0.0;           ///< -ln E[exp(-V)] / 2
  double gamma_x_min = 0.0;  ///< -ln E[exp(-V)]
  bool s0_condition_holds = false;
  std::string estimator;
  std::vector<LdpVolume> volumes;
  std::optional<LinearFit> fit;  ///< -ln p_hat against volume
  std::optional<double> fitted_rate;
  std::vector<std::string> warnings;
};

/// P{ average of V over [-L, L)^d <= s0 } for each L. The region and seed
/// of `law` are ignored. Needs trials >= 1000 and lengths >= 1.
LdpReport ldp_experiment(const FieldSpec& law, int d, std::span<const int> lengths,
                         const LdpOptions& opts);

}  // namespace alab
