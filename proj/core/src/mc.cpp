#include "alab/mc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alab/errors.hpp"
#include "alab/parallel.hpp"
#include "alab/rng.hpp"

namespace alab {

ProbabilityEstimate counting_estimate(std::string event, std::uint64_t hits,
                                      std::uint64_t trials) {
  const WilsonInterval ci = wilson_interval(hits, trials);
  ProbabilityEstimate e;
  e.event = std::move(event);
  e.trials = trials;
  e.hits = hits;
  e.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  e.lo = ci.lo;
  e.hi = ci.hi;
  e.one_sided = ci.one_sided;
  e.interval_method = "wilson";
  e.standard_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(trials));
  return e;
}

FieldSpec trial_field_spec(const FieldSpec& law, const LatticeCube& cube,
                           std::uint64_t master_seed, std::uint64_t trial) {
  FieldSpec spec = law;
  spec.region = required_field_region(cube);
  spec.seed = derive_seed(master_seed, trial);
  return spec;
}

ScaleParameters parameters_at(const ScaleParameters& scale, double L) {
  return derive_parameters(scale.N, scale.n, scale.d, L, scale.p, scale.gamma_ct, scale.alpha);
}

namespace {

LatticeCube make_cube(const CubeParameters& c) {
  return build_cube(c.n, c.d, std::vector<int>(static_cast<std::size_t>(c.n * c.d), 0), c.L,
                    c.h, c.budget);
}

void check_trials(std::uint64_t trials, std::uint64_t minimum, const char* what) {
  if (trials < minimum) {
    std::ostringstream msg;
    msg << what << " needs mc.trials >= " << minimum << " (got " << trials << ")";
    throw ConfigError(msg.str());
  }
}

std::string edge_event(double L) {
  std::ostringstream msg;
  msg << "e0 <= L^(-1/2), L = " << L;
  return msg.str();
}

}  // namespace

EdgeReport mc_edge_probability(const FieldSpec& law, const CubeParameters& params,
                               const ScaleParameters& scale, const McOptions& opts, double b) {
  check_trials(opts.trials, 100, "mc-edge");
  if (!(b > 0.0)) throw ConfigError("edge constant b must be > 0");
  const LatticeCube cube = make_cube(params);
  const double L = params.L;
  const double edge = 1.0 / std::sqrt(L);
  const double low_edge = b / (L * L);

  std::vector<EdgeTrial> samples(opts.trials);
  parallel_for(opts.trials, opts.workers, [&](std::size_t t) {
    const FieldSpec spec = trial_field_spec(law, cube, opts.master_seed, t);
    const AssembledHamiltonian h = assemble(cube, generate_field(spec), params.interaction);
    const SpectralData bottom = spectral_bottom(h, 1, opts.resolvent.eigen);
    EdgeTrial& s = samples[t];
    s.seed = spec.seed;
    s.e0 = bottom.e0;
    s.below_edge = bottom.e0 <= edge;
    s.below_low_edge = bottom.e0 <= low_edge;
  });

  EdgeReport out;
  out.L = L;
  out.b = b;
  std::uint64_t hits = 0, low_hits = 0;
  double sum = 0.0;
  out.min_e0 = INFINITY;
  for (const EdgeTrial& s : samples) {
    hits += s.below_edge;
    low_hits += s.below_low_edge;
    sum += s.e0;
    out.min_e0 = std::min(out.min_e0, s.e0);
  }
  out.mean_e0 = sum / static_cast<double>(samples.size());
  out.edge = counting_estimate(edge_event(L), hits, opts.trials);
  out.edge.theory_bound = edge_probability_bound(L, scale.p, scale.n, scale.N);
  std::ostringstream low;
  low << "e0 <= b L^(-2), b = " << b << ", L = " << L;
  out.low_edge = counting_estimate(low.str(), low_hits, opts.trials);
  out.samples = std::move(samples);
  return out;
}

SingularityReport mc_singularity_probability(const FieldSpec& law, const CubeParameters& params,
                                             const ScaleParameters& base, const McOptions& opts,
                                             double step) {
  check_trials(opts.trials, 100, "mc-singular");
  const double L = params.L;
  const ScaleParameters scale = parameters_at(base, L);
  if (!(step > 0.0) || step > scale.e_star) {
    std::ostringstream msg;
    msg << "msa.energy_grid_step = " << step << " must lie in (0, E*] with E* = "
        << scale.e_star;
    throw ConfigError(msg.str());
  }
  const LatticeCube cube = make_cube(params);
  if (!cube.has_regions()) throw DomainError("mc-singular needs cubes with L > 3");
  const double edge = 1.0 / std::sqrt(L);

  SingularityReport out;
  out.L = L;
  out.scale = scale;
  const auto points = static_cast<int>(std::floor(scale.e_star / step + 1e-9));
  for (int j = 0; j <= points; ++j) out.energy_grid.push_back(scale.e_star - j * step);

  std::vector<SingularTrial> samples(opts.trials);
  std::vector<char> gap_failed(opts.trials, 0);
  parallel_for(opts.trials, opts.workers, [&](std::size_t t) {
    const FieldSpec spec = trial_field_spec(law, cube, opts.master_seed, t);
    const AssembledHamiltonian h = assemble(cube, generate_field(spec), params.interaction);
    const SpectralData bottom = spectral_bottom(h, 1, opts.resolvent.eigen);
    SingularTrial& s = samples[t];
    s.seed = spec.seed;
    s.e0 = bottom.e0;
    s.below_edge = bottom.e0 <= edge;
    for (double energy : out.energy_grid) {
      if (!s.below_edge) {
        const auto gap = bottom.gap_at(energy);
        if (!gap || !(*gap > 0.5 * edge)) gap_failed[t] = 1;
      }
      const NsVerdict v = ns_test(h, scale, energy, opts.resolvent, &bottom);
      if (v.verdict == Verdict::S) ++s.singular_energies;
      if (v.block_norm) s.max_norm_ratio = std::max(s.max_norm_ratio, *v.block_norm / v.threshold);
    }
    s.singular = s.below_edge || s.singular_energies > 0;
  });

  std::uint64_t hits = 0;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const SingularTrial& s = samples[t];
    hits += s.singular;
    out.edge_hits += s.below_edge;
    if (!s.below_edge) {
      if (s.singular_energies > 0) {
        ++out.extra_grid_hits;
        ++out.ns_assertion_failures;
      }
      out.gap_assertion_failures += gap_failed[t];
      out.max_norm_ratio = std::max(out.max_norm_ratio, s.max_norm_ratio);
    }
  }
  std::ostringstream event;
  event << "exists E <= E* with (E, m)-S, L = " << L;
  out.singular = counting_estimate(event.str(), hits, opts.trials);
  out.singular.theory_bound = scale.theory_bound(L);
  out.samples = std::move(samples);
  return out;
}

namespace {

// Tilt theta with amplitude * mean_theta(u) = target, by bisection.
double solve_tilt(const FieldSpec& law, double target) {
  double hi = 1.0;
  while (tilted_site_mean(law, hi) > target) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("no innovation tilt reaches the LDP threshold", hi);
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tilted_site_mean(law, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct LdpTrial {
  bool hit = false;
  double weight = 0.0;  ///< likelihood ratio on hits, 0 otherwise
  double average = 0.0;
  bool markov_ok = true;
};

}  // namespace

LdpReport ldp_experiment(const FieldSpec& law, int d, std::span<const int> lengths,
                         const LdpOptions& opts) {
  check_trials(opts.trials, 1000, "ldp");
  if (d < 1) throw ConfigError("ldp needs d >= 1");
  if (lengths.empty()) throw ConfigError("ldp needs at least one length");

  LdpReport report;
  const double mgf = expected_exp_neg(law);
  report.gamma_x_min = -std::log(mgf);
  report.s0 = 0.5 * report.gamma_x_min;
  // Stationary fields: gamma_x is the same at every site.
  report.s0_condition_holds = report.s0 <= 0.5 * report.gamma_x_min;

  bool tilted = opts.importance_sampling && supports_tilting(law);
  double tilt = 0.0;
  if (opts.importance_sampling && !tilted) {
    report.warnings.push_back("innovation law cannot be tilted; using plain Monte Carlo");
  }
  if (tilted) {
    const double floor_mean = law.law.amplitude * law.law.low;
    if (!(report.s0 > floor_mean)) {
      report.warnings.push_back(
          "threshold s0 is at or below the potential floor; using plain Monte Carlo");
      tilted = false;
    } else if (law.law.amplitude == 0.0) {
      tilted = false;
    } else {
      tilt = solve_tilt(law, report.s0);
    }
  }
  report.estimator = tilted ? "importance-sampling" : "plain";

  for (std::size_t k = 0; k < lengths.size(); ++k) {
    const int L = lengths[k];
    if (L < 1) throw ConfigError("ldp lengths must be >= 1");
    FieldSpec spec = law;
    spec.region = LatticeBox(std::vector<int>(d, -L), std::vector<int>(d, 2 * L));
    const double volume = static_cast<double>(spec.region.size());
    const double threshold = report.s0 * volume;

    std::vector<LdpTrial> trials(opts.trials);
    parallel_for(opts.trials, opts.workers, [&](std::size_t t) {
      FieldSpec s = spec;
      s.seed = derive_seed(derive_seed(opts.master_seed, static_cast<std::uint64_t>(L)), t);
      const TiltedSample sample = generate_tilted_field(s, tilted ? tilt : 0.0);
      double sum = 0.0;
      for (double v : sample.sample.values()) sum += v;
      LdpTrial& r = trials[t];
      r.average = sum / volume;
      r.hit = sum <= threshold;
      if (r.hit) {
        r.weight = tilted ? std::exp(sample.log_likelihood_ratio) : 1.0;
        // Markov step: the indicator is dominated by exp(s0 |C| - sum V).
        r.markov_ok = std::exp(threshold - sum) >= 1.0;
      }
    });

    LdpVolume entry;
    entry.L = L;
    entry.volume = volume;
    entry.tilt = tilted ? tilt : 0.0;
    std::uint64_t hits = 0;
    double sw = 0.0, sw2 = 0.0, avg = 0.0;
    for (const LdpTrial& r : trials) {
      avg += r.average;
      if (!r.hit) continue;
      ++hits;
      sw += r.weight;
      sw2 += r.weight * r.weight;
      ++entry.markov_checks;
      entry.markov_failures += !r.markov_ok;
    }
    const double n = static_cast<double>(opts.trials);
    entry.mean_average = avg / n;
    std::ostringstream event;
    event << "average over [-L, L)^d <= s0, L = " << L;
    if (tilted) {
      ProbabilityEstimate e;
      e.event = event.str();
      e.trials = opts.trials;
      e.hits = hits;
      e.p_hat = sw / n;
      e.standard_error = std::sqrt(std::max(0.0, sw2 / n - e.p_hat * e.p_hat) / n);
      e.lo = std::max(0.0, e.p_hat - kZ95 * e.standard_error);
      e.hi = std::min(1.0, e.p_hat + kZ95 * e.standard_error);
      e.interval_method = "normal";
      entry.estimate = std::move(e);
    } else {
      entry.estimate = counting_estimate(event.str(), hits, opts.trials);
    }
    report.volumes.push_back(std::move(entry));
  }

  std::vector<double> xs, ys;
  for (const LdpVolume& v : report.volumes) {
    const bool usable = v.estimate.hits > 0 && (tilted || v.estimate.hits < v.estimate.trials) &&
                        v.estimate.p_hat > 0.0;
    if (!usable) {
      std::ostringstream msg;
      msg << "L = " << v.L << " excluded from the rate fit ("
          << (v.estimate.hits == 0 ? "zero hits" : "all hits") << ")";
      report.warnings.push_back(msg.str());
      continue;
    }
    xs.push_back(v.volume);
    ys.push_back(-std::log(v.estimate.p_hat));
  }
  if (xs.size() >= 2) {
    report.fit = fit_line(xs, ys);
    report.fitted_rate = report.fit->slope;
  } else {
    report.warnings.push_back("fewer than two usable volumes; no rate fit");
  }
  return report;
}

}  // namespace alab
