#include "alab/msa.hpp"

#include <cmath>
#include <sstream>

#include "alab/errors.hpp"

namespace alab {

double gamma_rate(double m, double L, int n, int N) {
  return m * std::pow(1.0 + std::pow(L, -0.125), N - n + 1);
}

double ScaleParameters::threshold(double L) const { return std::exp(-rate(L) * L); }

double ScaleParameters::theory_bound(double L) const {
  return edge_probability_bound(L, p, n, N);
}

double edge_probability_bound(double L, double p, int n, int N) {
  return std::pow(L, -2.0 * p * std::pow(4.0, N - n));
}

ScaleParameters derive_parameters(int N, int n, int d, double L0, double p, double gamma_ct,
                                  double alpha) {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (!(gamma_ct > 0.0 && gamma_ct < 1.0)) {
    std::ostringstream msg;
    msg << "msa.gamma_ct = " << gamma_ct << " must lie in the open interval (0, 1)";
    fail(msg.str());
  }
  if (!(L0 >= 8.0)) {
    std::ostringstream msg;
    msg << "initial scale L0 = " << L0 << " must be >= 8";
    fail(msg.str());
  }
  if (!(p > 0.0)) fail("msa.p must be > 0");
  if (N < 1 || n < 1 || n > N) {
    std::ostringstream msg;
    msg << "particle counts need 1 <= n <= N (got n = " << n << ", N = " << N << ")";
    fail(msg.str());
  }
  if (d < 1) fail("model.d must be >= 1");
  if (!(alpha > 1.0)) fail("scales.alpha must be > 1");

  ScaleParameters s;
  s.N = N;
  s.n = n;
  s.d = d;
  s.L0 = L0;
  s.p = p;
  s.gamma_ct = gamma_ct;
  s.alpha = alpha;
  s.m = std::ldexp(1.0, -N) * gamma_ct * std::pow(L0, -0.25) / (3.0 * std::sqrt(2.0));
  s.e_star = 0.5 / std::sqrt(L0);
  const double rate = s.rate(L0);
  const double cap = std::ldexp(s.m, N);
  s.side_condition_holds = rate < cap;
  if (!s.side_condition_holds) {
    std::ostringstream msg;
    msg << "side condition gamma(m, L0, n) < 2^N m fails: " << rate << " >= " << cap;
    fail(msg.str());
  }
  return s;
}

std::string_view to_string(Verdict verdict) { return verdict == Verdict::NS ? "NS" : "S"; }

std::string_view to_string(VerdictReason reason) {
  switch (reason) {
    case VerdictReason::NormOk:
      return "norm-ok";
    case VerdictReason::NormExceeded:
      return "norm-exceeded";
    case VerdictReason::SpectralCollision:
      return "spectral-collision";
  }
  return "?";
}

NsVerdict ns_test(const AssembledHamiltonian& h, const ScaleParameters& scale, double energy,
                  const ResolventOptions& opts, const SpectralData* hint) {
  const double L = h.cube.half_side();
  NsVerdict out;
  out.energy = energy;
  out.threshold = scale.threshold(L);
  try {
    const ResolventBlockNorm block = resolvent_block_norm(
        h, energy, RegionMask::interior(), RegionMask::outer(), opts, hint);
    out.block_norm = block.norm;
    out.spectral_distance = block.spectral_distance;
    const bool ok = block.norm <= out.threshold;
    out.verdict = ok ? Verdict::NS : Verdict::S;
    out.reason = ok ? VerdictReason::NormOk : VerdictReason::NormExceeded;
  } catch (const SpectralCollision& e) {
    out.verdict = Verdict::S;
    out.reason = VerdictReason::SpectralCollision;
    out.spectral_distance = e.distance();
  }
  return out;
}

ScaleSequence scale_sequence(long long L0, double alpha, int count, long long max_length) {
  if (L0 < 8) throw ConfigError("scale sequence needs L0 >= 8");
  if (!(alpha > 1.0)) throw ConfigError("scale sequence needs alpha > 1");
  if (count < 1) throw ConfigError("scale sequence needs count >= 1");
  ScaleSequence out;
  if (L0 > max_length) {
    out.truncated = true;
    return out;
  }
  out.lengths.push_back(L0);
  while (static_cast<int>(out.lengths.size()) < count) {
    const double raw = std::pow(static_cast<double>(out.lengths.back()), alpha);
    const double nearest = std::round(raw);
    const double next = std::abs(raw - nearest) <= 1e-9 * raw ? nearest : std::ceil(raw);
    if (!(next <= static_cast<double>(max_length))) {
      out.truncated = true;
      break;
    }
    out.lengths.push_back(static_cast<long long>(next));
  }
  return out;
}

}  // namespace alab
