#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alab {

/// Axis-aligned box of lattice sites in Z^d, stored as a lower corner and a
/// per-axis extent. Sites are enumerated with axis 0 varying slowest.
class LatticeBox {
 public:
  LatticeBox() = default;
  LatticeBox(std::vector<int> lower, std::vector<int> extent);

  /// Box {-radius, ..., radius}^d.
  static LatticeBox centered(int d, int radius);

  int dim() const noexcept { return static_cast<int>(lower_.size()); }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  const std::vector<int>& lower() const noexcept { return lower_; }
  const std::vector<int>& extent() const noexcept { return extent_; }

  bool contains(std::span<const int> site) const noexcept;
  std::size_t index_of(std::span<const int> site) const;
  std::vector<int> site(std::size_t index) const;

  /// Box grown by `margin` sites on every side.
  LatticeBox dilated(int margin) const;

  bool operator==(const LatticeBox&) const = default;

 private:
  std::vector<int> lower_;
  std::vector<int> extent_;
  std::size_t size_ = 0;
};

enum class FieldKind { IidUniform, MovingAverage, SquaredGaussianMa };

std::string_view to_string(FieldKind kind);
FieldKind parse_field_kind(std::string_view text);

/// Single-site law of the innovations. Uniform kinds draw u ~ U[low, high];
/// the squared-gaussian kind draws standard normals and ignores low/high.
/// The resulting potential is multiplied by `amplitude`.
struct SiteLaw {
  double low = 0.0;
  double high = 1.0;
  double amplitude = 1.0;
};

struct FieldSpec {
  FieldKind kind = FieldKind::MovingAverage;
  int window = 1;  ///< moving-average radius R in lattice (max-norm) units
  SiteLaw law;
  std::uint64_t seed = 0;
  LatticeBox region;

  /// Number of innovations averaged per site, (2R+1)^d; 1 for iid.
  std::size_t window_volume() const;
  /// Throws DomainError when the spec is unusable.
  void validate() const;
};

/// One realization of the potential, V(x) >= 0 on every site of spec.region.
class FieldSample {
 public:
  FieldSample(FieldSpec spec, std::vector<double> values);

  const FieldSpec& spec() const noexcept { return spec_; }
  const LatticeBox& region() const noexcept { return spec_.region; }
  std::span<const double> values() const noexcept { return values_; }

  bool covers(std::span<const int> site) const noexcept {
    return spec_.region.contains(site);
  }
  double at(std::span<const int> site) const {
    return values_[spec_.region.index_of(site)];
  }
  double operator[](std::size_t index) const { return values_[index]; }

 private:
  FieldSpec spec_;
  std::vector<double> values_;
};

FieldSample generate_field(const FieldSpec& spec);

/// Sample drawn with exponentially tilted uniform innovations,
/// q(u) ~ exp(-tilt * u) on [low, high], together with log(dP/dQ) of the
/// whole innovation vector. tilt = 0 reproduces generate_field exactly.
struct TiltedSample {
  FieldSample sample;
  double log_likelihood_ratio = 0.0;
};

TiltedSample generate_tilted_field(const FieldSpec& spec, double tilt);

/// Whether generate_tilted_field supports the spec's innovation law.
bool supports_tilting(const FieldSpec& spec) noexcept;

/// Mean of the potential at a site under the innovation tilt (stationary).
double tilted_site_mean(const FieldSpec& spec, double tilt);

/// E[exp(-V(x))] for the stationary single-site marginal, in closed form.
double expected_exp_neg(const FieldSpec& spec);

struct MixingDiagnostics {
  std::vector<int> distance_grid;
  std::vector<double> alpha_estimates;
  std::vector<double> alpha_standard_errors;
  std::vector<double> moment_gap_pair;     ///< l = 2 factorization gap
  std::vector<double> moment_gap_triple;   ///< l = 3 factorization gap
  std::vector<double> thresholds;          ///< event thresholds (quantiles)
  std::optional<double> fitted_c1;         ///< -slope of ln(alpha) vs L
  std::optional<double> kappa_estimate;
  std::size_t trials = 0;
};

/// Quantile levels defining the threshold events {V(x) <= q}.
inline constexpr double kMixingQuantiles[] = {0.25, 0.5, 0.75};

/// Monte Carlo estimates of the strong-mixing coefficient between single
/// sites at each distance (along axis 0) and of moment factorization gaps
/// for the bounded functions exp(-V). Needs 2 * max(distance) < extent(0).
MixingDiagnostics estimate_mixing(const FieldSpec& spec,
                                  std::span<const int> distances,
                                  std::size_t trials, unsigned workers = 1);

struct LogHolderFit {
  std::vector<double> epsilons;
  std::vector<double> increments;  ///< sup_t F(t + eps) - F(t) per eps
  double kappa = 0.0;              ///< fitted in Const * |ln eps|^(-kappa)
  double log_const = 0.0;
  double residual = 0.0;           ///< rms residual of the log-log fit
};

/// Largest empirical increment of a distribution function over any window
/// of width eps. `samples` need not be sorted.
double max_cdf_increment(std::vector<double> samples, double eps);

LogHolderFit estimate_log_holder(const FieldSpec& spec,
                                 std::span<const double> epsilons,
                                 std::size_t trials, unsigned workers = 1);

}  // namespace alab
