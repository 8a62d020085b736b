#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "alab/hamiltonian.hpp"
#include "alab/spectral.hpp"

namespace alab {

/// gamma(m, L, n) = m (1 + L^(-1/8))^(N - n + 1).
double gamma_rate(double m, double L, int n, int N);

/// Parameters of the initial multi-scale step. m and E* are computed at the
/// initial scale L0.
struct ScaleParameters {
  int N = 2;
  int n = 1;
  int d = 1;
  double L0 = 8.0;
  double p = 0.5;
  double gamma_ct = 0.5;
  double alpha = 1.5;
  double m = 0.0;       ///< 2^-N gamma_ct L0^(-1/4) / (3 sqrt 2)
  double e_star = 0.0;  ///< L0^(-1/2) / 2
  /// gamma(m, L0, n) < 2^N m, the side condition used to sum block norms.
  bool side_condition_holds = false;

  double rate(double L) const { return gamma_rate(m, L, n, N); }
  /// e^(-gamma(m, L, n) L).
  double threshold(double L) const;
  /// L^(-2 p 4^(N - n)).
  double theory_bound(double L) const;
};

/// Throws ConfigError naming the violated condition: L0 >= 8, p > 0,
/// gamma_ct in (0, 1), 1 <= n <= N, d >= 1, alpha > 1, and the side
/// condition gamma(m, L0, n) < 2^N m.
ScaleParameters derive_parameters(int N, int n, int d, double L0, double p, double gamma_ct,
                                  double alpha = 1.5);

/// L^(-2 p 4^(N - n)).
double edge_probability_bound(double L, double p, int n, int N);

enum class Verdict { NS, S };
enum class VerdictReason { NormOk, NormExceeded, SpectralCollision };

std::string_view to_string(Verdict verdict);
std::string_view to_string(VerdictReason reason);

struct NsVerdict {
  double energy = 0.0;
  Verdict verdict = Verdict::S;
  std::optional<double> block_norm;
  double threshold = 0.0;
  VerdictReason reason = VerdictReason::SpectralCollision;
  double spectral_distance = 0.0;
};

/// (E, m)-nonsingularity of the cube carried by `h`: S on spectral collision
/// or when ||1_out G(E) 1_int|| exceeds e^(-gamma(m, L, n) L), NS otherwise.
/// The scale L is the cube's half side. `hint` may carry the bottom of the
/// spectrum to avoid recomputing it.
NsVerdict ns_test(const AssembledHamiltonian& h, const ScaleParameters& scale, double energy,
                  const ResolventOptions& opts = {}, const SpectralData* hint = nullptr);

struct ScaleSequence {
  std::vector<long long> lengths;
  bool truncated = false;
};

/// L_{k+1} = ceil(L_k^alpha), count terms, stopping early (truncated) once
/// a length would exceed max_length.
ScaleSequence scale_sequence(long long L0, double alpha, int count,
                             long long max_length = 1LL << 40);

}  // namespace alab
