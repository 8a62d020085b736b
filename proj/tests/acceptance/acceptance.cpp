// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "alab/errors.hpp"
#include "alab/hamiltonian.hpp"
#include "alab/localization.hpp"
#include "alab/mc.hpp"
#include "alab/msa.hpp"
#include "alab/rng.hpp"
#include "alab/spectral.hpp"
#include "commands.hpp"

namespace {

using namespace alab;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

LatticeCube line_cube(int n, double L) {
  return build_cube(n, 1, std::vector<int>(static_cast<std::size_t>(n), 0), L, 1.0);
}

FieldSample sample_for(const LatticeCube& cube, FieldSpec law, std::uint64_t seed) {
  law.region = required_field_region(cube);
  law.seed = seed;
  return generate_field(law);
}

Outcome laplacian_oracle() {
  double worst = 0.0;
  for (int M : {3, 7, 15}) {
    const LatticeCube cube = line_cube(1, (M + 1) / 2.0);
    const auto h = assemble(cube, [](std::span<const int>) { return 0.0; }, {});
    const SpectralData s = spectral_bottom(h, M);
    for (int k = 1; k <= M; ++k) {
      const double oracle = 2.0 - 2.0 * std::cos(k * M_PI / (M + 1));
      worst = std::max(worst, std::abs(s.lowest[static_cast<std::size_t>(k - 1)] - oracle) /
                                  std::abs(oracle));
    }
  }
  return {worst <= 1e-10, "max relative error " + fmt("%.3g", worst)};
}

Outcome kronecker_equivalence() {
  double worst = 0.0;
  const LatticeCube cube2 = line_cube(2, 6.0);  // M = 11 points per axis
  const LatticeCube cube1 = line_cube(1, 6.0);
  for (std::uint64_t t = 0; t < 20; ++t) {
    const FieldSample field = sample_for(cube2, FieldSpec{}, derive_seed(2, t));
    const auto h2 = assemble(cube2, field, {});
    const auto h1 = assemble(cube1, field, {});
    const SpectralData s = spectral_bottom(h2, static_cast<int>(h2.dim()));
    const std::vector<double> oracle = kronecker_sum_oracle(h1, 2);
    if (s.spectrum.size() != oracle.size()) return {false, "spectrum size mismatch"};
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      worst = std::max(worst, std::abs(s.spectrum[i] - oracle[i]));
    }
  }
  return {worst < 1e-9, "20 samples, max deviation " + fmt("%.3g", worst)};
}

Outcome certificate_stress() {
  reset_certificate_stats();
  ResolventOptions krylov;
  krylov.direct_limit = 0;
  std::uint64_t sample = 0;
  // Direct and Krylov paths, below the spectrum and between eigenvalues.
  while (certificate_stats().solves < 1000) {
    const LatticeCube cube = line_cube(2, 8.0);
    const auto h = assemble(cube, sample_for(cube, FieldSpec{}, derive_seed(3, sample)),
                            {1.0, 1.0, InteractionProfile::Step});
    const SpectralData s = spectral_bottom(h, 3);
    for (double e : {s.e0 - 0.5, 0.5 * (s.lowest[1] + s.lowest[2])}) {
      resolvent_block_norm(h, e, RegionMask::interior(), RegionMask::outer(), {}, &s);
      resolvent_block_norm(h, e, RegionMask::interior(), RegionMask::outer(), krylov, &s);
    }
    ++sample;
  }
  const CertificateStats stats = certificate_stats();
  return {stats.failures == 0 && stats.max_residual <= 1e-8,
          std::to_string(stats.solves) + " solves, " + std::to_string(stats.failures) +
              " failures, max residual " + fmt("%.3g", stats.max_residual)};
}

Outcome combes_thomas_dominance() {
  std::size_t violations = 0, pairs_checked = 0;
  double worst = 0.0;
  for (double L : {8.0, 16.0}) {
    const LatticeCube cube = line_cube(1, L);
    const auto pairs = all_pairs(cube.size());
    for (std::uint64_t t = 0; t < 20; ++t) {
      const auto h = assemble(cube, sample_for(cube, FieldSpec{}, derive_seed(4, t)), {});
      const SpectralData s = spectral_bottom(h, 1);
      for (double eta : {0.1, 1.0}) {
        for (double gamma : {0.25, 0.5, 0.9}) {
          const auto report = verify_combes_thomas(h, s.e0 - eta, gamma, pairs, {}, &s);
          violations += report.violations.size();
          pairs_checked += report.pairs.size();
          worst = std::max(worst, report.max_ratio);
        }
      }
    }
  }
  return {violations == 0, std::to_string(pairs_checked) + " pairs, " +
                               std::to_string(violations) + " violations, max ratio " +
                               fmt("%.3g", worst)};
}

Outcome large_deviation() {
  LdpOptions opts;
  opts.trials = 10000;
  const std::vector<int> lengths = {4, 8, 16};
  const LdpReport r = ldp_experiment(FieldSpec{}, 1, lengths, opts);
  bool decreasing = true;
  std::uint64_t failures = 0, checks = 0;
  std::ostringstream detail;
  detail << "s0 " << fmt("%.5g", r.s0) << ", p_hat";
  for (std::size_t i = 0; i < r.volumes.size(); ++i) {
    detail << ' ' << fmt("%.3g", r.volumes[i].estimate.p_hat);
    if (i > 0 && !(r.volumes[i].estimate.p_hat < r.volumes[i - 1].estimate.p_hat)) {
      decreasing = false;
    }
    failures += r.volumes[i].markov_failures;
    checks += r.volumes[i].markov_checks;
  }
  const bool rate_ok = r.fitted_rate.has_value() && *r.fitted_rate > 0.0;
  detail << ", rate " << (r.fitted_rate ? fmt("%.4g", *r.fitted_rate) : std::string("n/a"))
         << ", markov " << failures << '/' << checks << " failures";
  return {decreasing && rate_ok && failures == 0 && checks > 0, detail.str()};
}

Outcome spectral_edge() {
  const ScaleParameters base = derive_parameters(2, 1, 1, 8.0, 0.5, 0.5);
  McOptions opts;
  opts.trials = 10000;
  std::ostringstream detail;
  double previous = 1.0;
  bool monotone = true;
  for (double L : {8.0, 16.0, 32.0}) {
    CubeParameters cube;
    cube.L = L;
    const EdgeReport r = mc_edge_probability(FieldSpec{}, cube, parameters_at(base, L), opts);
    monotone = monotone && r.edge.hi <= previous;
    previous = r.edge.hi;
    detail << "L=" << L << " p_hat " << fmt("%.3g", r.edge.p_hat) << " hi "
           << fmt("%.3g", r.edge.hi) << " bound(p=0.1) "
           << fmt("%.3g", edge_probability_bound(L, 0.1, 1, 2)) << " bound(p=0.5) "
           << fmt("%.3g", edge_probability_bound(L, 0.5, 1, 2)) << "; ";
  }
  return {monotone, detail.str()};
}

Outcome initial_step() {
  const ScaleParameters base = derive_parameters(2, 1, 1, 8.0, 0.5, 0.5);
  McOptions opts;
  opts.trials = 10000;
  std::uint64_t failures = 0;
  std::ostringstream detail;
  for (double L : {8.0, 16.0, 32.0}) {
    CubeParameters cube;
    cube.L = L;
    const ScaleParameters at = parameters_at(base, L);
    const SingularityReport r =
        mc_singularity_probability(FieldSpec{}, cube, at, opts, at.e_star / 16.0);
    failures += r.gap_assertion_failures + r.ns_assertion_failures;
    detail << "L=" << L << " p_hat " << fmt("%.3g", r.singular.p_hat) << " failures "
           << r.gap_assertion_failures + r.ns_assertion_failures << " max ratio "
           << fmt("%.3g", r.max_norm_ratio) << "; ";
  }
  return {failures == 0, detail.str()};
}

Outcome rate_arithmetic() {
  bool ok = true;
  for (int N : {1, 2, 3, 4}) ok = ok && gamma_rate(1.0, 256.0, N, N) == 1.5;
  const ScaleParameters s = derive_parameters(2, 1, 1, 8.0, 0.5, 0.5);
  double previous = 1.0;
  for (int i = 0; i < 20; ++i) {
    const double L = 8.0 * std::pow(1000.0, i / 19.0);
    ok = ok && s.threshold(L) < previous;
    previous = s.threshold(L);
  }
  double worst = 0.0;
  for (int N : {1, 2, 3}) {
    for (double L0 : {8.0, 16.0, 100.0, 4096.0}) {
      for (double g : {0.1, 0.5, 0.9}) {
        const ScaleParameters p = derive_parameters(N, 1, 1, L0, 0.5, g);
        const double m = std::pow(2.0, -N) * g * std::pow(L0, -0.25) / (3.0 * std::sqrt(2.0));
        const double e_star = 0.5 / std::sqrt(L0);
        worst = std::max({worst, std::abs(p.m - m), std::abs(p.e_star - e_star)});
      }
    }
  }
  return {ok && worst <= 1e-12, "max formula deviation " + fmt("%.3g", worst)};
}

DynamicalMomentTrace moment_trace(const AssembledHamiltonian& h, std::span<const double> times) {
  const SpectralData s = spectral_bottom(h, 1);
  Eigen::Index peak = 0;
  s.vectors.col(0).cwiseAbs().maxCoeff(&peak);
  DynamicalMomentSpec spec;
  spec.s = 1.0;
  spec.e_low = -1.0;
  spec.e_high = s.e0 + 1.0;
  spec.region = neighbourhood(h.cube, static_cast<std::size_t>(peak), 2.0);
  spec.times.assign(times.begin(), times.end());
  return dynamical_moment(h, spec);
}

Outcome dynamical_moment_check() {
  const LatticeCube cube = line_cube(1, 64.0);
  FieldSpec strong;
  strong.kind = FieldKind::IidUniform;
  strong.window = 0;
  strong.law = SiteLaw{0.0, 5.0, 1.0};
  const auto h = assemble(cube, sample_for(cube, strong, derive_seed(9, 0)), {});
  const auto free = assemble(cube, [](std::span<const int>) { return 0.0; }, {});
  const std::vector<double> grid = log_time_grid(0.01, 1000.0, 64);
  const std::vector<double> fine = refine_time_grid(grid);
  const auto base = moment_trace(h, grid);
  const auto refined = moment_trace(h, fine);
  const auto control = moment_trace(free, grid);
  const double change = std::abs(refined.max_value - base.max_value) / base.max_value;
  return {cube.size() <= 1024 && change < 0.05,
          "dimension " + std::to_string(cube.size()) + ", max " + fmt("%.4g", base.max_value) +
              " refined " + fmt("%.4g", refined.max_value) + " change " + fmt("%.2g", change) +
              ", free control max " + fmt("%.4g", control.max_value)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "alab_acceptance_determinism";
  fs::remove_all(root);
  const fs::path a = root / "workers1", b = root / "workers4";
  std::ostringstream sink;
  const int ra = cli::run({"scaling-run", "--seed", "7", "--workers", "1", "--out", a.string()},
                          sink, sink);
  const int rb = cli::run({"scaling-run", "--seed", "7", "--workers", "4", "--out", b.string()},
                          sink, sink);
  if (ra != 0 || rb != 0) return {false, "scaling-run failed: " + sink.str()};
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const fs::path other = b / entry.path().filename();
    if (!fs::exists(other) || read(entry.path()) != read(other)) {
      return {false, "artifact differs: " + entry.path().filename().string()};
    }
    ++files;
  }
  const auto count_b = std::distance(fs::directory_iterator(b), fs::directory_iterator{});
  if (static_cast<std::size_t>(count_b) != files || files == 0) {
    return {false, "artifact sets differ"};
  }
  fs::remove_all(root);
  return {true, std::to_string(files) + " artifacts byte-identical for workers 1 and 4"};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;  ///< seconds; 0 when unbounded
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "dirichlet-laplacian-oracle", 1.0, laplacian_oracle},
      {2, "kronecker-sum-equivalence", 10.0, kronecker_equivalence},
      {3, "resolvent-certificate", 0.0, certificate_stress},
      {4, "combes-thomas-dominance", 60.0, combes_thomas_dominance},
      {5, "large-deviation", 60.0, large_deviation},
      {6, "spectral-edge-decay", 300.0, spectral_edge},
      {7, "initial-scale-step", 0.0, initial_step},
      {8, "rate-arithmetic", 0.0, rate_arithmetic},
      {9, "dynamical-moment", 0.0, dynamical_moment_check},
      {10, "determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && seconds >= c.time_limit) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.time_limit) + " s budget";
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.name << " ("
              << fmt("%.2f", seconds) << " s): " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
