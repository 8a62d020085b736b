#include "commands.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "alab/errors.hpp"
#include "alab/field.hpp"
#include "alab/geometry.hpp"
#include "alab/hamiltonian.hpp"
#include "alab/io.hpp"
#include "alab/localization.hpp"
#include "alab/mc.hpp"
#include "alab/msa.hpp"
#include "alab/rng.hpp"
#include "alab/spectral.hpp"
#include "config.hpp"

namespace alab::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "sample-field", "mixing",     "spectrum", "ns-test",  "combes-thomas", "ldp",
      "mc-edge",      "mc-singular", "decay-fit", "dynamics", "scaling-run"};
  return names;
}

namespace {

std::shared_ptr<spdlog::logger> logger() {
  if (auto existing = spdlog::get("alab")) return existing;
  auto log = std::make_shared<spdlog::logger>("alab",
                                              std::make_shared<spdlog::sinks::stderr_sink_mt>());
  log->set_pattern("[%l] %v");
  const char* level = std::getenv("ALAB_LOG_LEVEL");
  log->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
  spdlog::register_logger(log);
  return log;
}

std::string cell(double v) { return format_double(v); }
std::string cell(bool v) { return v ? "true" : "false"; }
std::string cell(const std::string& v) { return v; }
std::string cell(const char* v) { return v; }
std::string cell(std::string_view v) { return std::string(v); }
template <class T>
  requires std::is_integral_v<T>
std::string cell(T v) {
  return std::to_string(v);
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  template <class... Ts>
  void add(const Ts&... values) {
    rows.push_back({cell(values)...});
  }
};

struct Context {
  ExperimentConfig cfg;
  json config_echo;
  fs::path out_dir;
  bool export_matrix = false;
  std::string name;
  std::vector<std::string> warnings;

  void warn(const std::string& message) {
    logger()->warn("{}: {}", name, message);
    warnings.push_back(message);
  }

  void write_csv(const Table& table) const {
    if (!cfg.write_csv) return;
    std::ofstream out(out_dir / (name + ".csv"), std::ios::binary);
    if (!out) throw ResourceError("cannot write " + (out_dir / (name + ".csv")).string());
    out << "# alab-csv schema=" << name << "/1 tool=alab " << kToolVersion << '\n';
    out << "# config " << config_echo.dump() << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      out << (i ? "," : "") << table.columns[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
  }

  void write_summary(json results, json checks) const {
    if (!cfg.write_json) return;
    json doc;
    doc["tool"] = "alab";
    doc["version"] = kToolVersion;
    doc["subcommand"] = name;
    doc["master_seed"] = cfg.master_seed;
    doc["config"] = config_echo;
    doc["results"] = std::move(results);
    doc["checks"] = std::move(checks);
    doc["warnings"] = warnings;
    std::ofstream out(out_dir / (name + ".summary.json"), std::ios::binary);
    if (!out) throw ResourceError("cannot write " + (out_dir / (name + ".summary.json")).string());
    out << doc.dump(2) << '\n';
  }

  void export_matrix_file(const SparseMatrix& matrix) const {
    if (!export_matrix) return;
    std::ofstream out(out_dir / (name + ".mtx"), std::ios::binary);
    write_matrix_market(out, matrix);
  }
};

json estimate_json(const ProbabilityEstimate& e) {
  json j;
  j["event"] = e.event;
  j["trials"] = e.trials;
  j["hits"] = e.hits;
  j["p_hat"] = e.p_hat;
  j["interval"] = {e.lo, e.hi};
  j["interval_method"] = e.interval_method;
  j["one_sided"] = e.one_sided;
  j["standard_error"] = e.standard_error;
  j["theory_bound"] = e.theory_bound ? json(*e.theory_bound) : json(nullptr);
  return j;
}

LatticeCube main_cube(const ExperimentConfig& c) {
  return build_cube(c.n, c.d, std::vector<int>(static_cast<std::size_t>(c.n * c.d), 0), c.L0,
                    c.h, c.budget);
}

FieldSample cube_field(const ExperimentConfig& c, const LatticeCube& cube) {
  return generate_field(trial_field_spec(c.field, cube, c.master_seed, 0));
}

CubeParameters cube_parameters(const ExperimentConfig& c, double L) {
  CubeParameters p;
  p.n = c.n;
  p.d = c.d;
  p.L = L;
  p.h = c.h;
  p.interaction = c.interaction;
  p.budget = c.budget;
  return p;
}

McOptions mc_options(const ExperimentConfig& c) {
  McOptions o;
  o.trials = c.trials;
  o.master_seed = c.master_seed;
  o.workers = c.workers;
  return o;
}

// ---------------------------------------------------------------------------

void cmd_sample_field(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const LatticeCube cube = main_cube(c);
  const FieldSample sample = cube_field(c, cube);
  Table t;
  for (int a = 0; a < c.d; ++a) t.columns.push_back("x" + std::to_string(a + 1));
  t.columns.push_back("value");
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  for (std::size_t i = 0; i < sample.region().size(); ++i) {
    std::vector<std::string> row;
    for (int s : sample.region().site(i)) row.push_back(std::to_string(s));
    row.push_back(cell(sample[i]));
    t.rows.push_back(std::move(row));
    lo = std::min(lo, sample[i]);
    hi = std::max(hi, sample[i]);
    sum += sample[i];
  }
  ctx.write_csv(t);
  json r;
  r["kind"] = to_string(c.field.kind);
  r["seed"] = sample.spec().seed;
  r["sites"] = sample.region().size();
  r["min"] = lo;
  r["max"] = hi;
  r["mean"] = sum / static_cast<double>(sample.region().size());
  json checks;
  checks["non_negative"] = lo >= 0.0;
  ctx.write_summary(r, checks);
}

void cmd_mixing(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  FieldSpec spec = c.field;
  const int max_distance =
      *std::max_element(c.mixing_distances.begin(), c.mixing_distances.end());
  std::vector<int> extent(static_cast<std::size_t>(c.d), 1);
  extent[0] = 2 * max_distance + 1;
  spec.region = LatticeBox(std::vector<int>(static_cast<std::size_t>(c.d), 0), extent);
  spec.seed = c.master_seed;
  const MixingDiagnostics mix =
      estimate_mixing(spec, c.mixing_distances, c.mixing_trials, c.workers);
  spec.seed = derive_seed(c.master_seed, 1);
  const LogHolderFit holder =
      estimate_log_holder(spec, c.mixing_epsilons, c.mixing_trials, c.workers);

  Table t;
  t.columns = {"distance", "alpha", "alpha_se", "moment_gap_pair", "moment_gap_triple"};
  bool independent = true;
  const int reach = c.field.kind == FieldKind::IidUniform ? 0 : 2 * c.field.window;
  for (std::size_t i = 0; i < mix.distance_grid.size(); ++i) {
    t.add(mix.distance_grid[i], mix.alpha_estimates[i], mix.alpha_standard_errors[i],
          mix.moment_gap_pair[i], mix.moment_gap_triple[i]);
    if (mix.distance_grid[i] > reach &&
        mix.alpha_estimates[i] > 3.0 * mix.alpha_standard_errors[i]) {
      independent = false;
    }
  }
  ctx.write_csv(t);
  json r;
  r["trials"] = mix.trials;
  r["thresholds"] = mix.thresholds;
  r["fitted_c1"] = mix.fitted_c1 ? json(*mix.fitted_c1) : json(nullptr);
  r["log_holder"] = {{"epsilons", holder.epsilons},
                     {"increments", holder.increments},
                     {"kappa", holder.kappa},
                     {"log_const", holder.log_const},
                     {"residual", holder.residual}};
  json checks;
  checks["alpha_within_3se_beyond_window"] = independent;
  ctx.write_summary(r, checks);
}

void cmd_spectrum(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const LatticeCube cube = main_cube(c);
  const AssembledHamiltonian h = assemble(cube, cube_field(c, cube), c.interaction);
  ctx.export_matrix_file(h.matrix);
  const int k = static_cast<int>(std::min<std::size_t>(c.spectrum_k, h.dim()));
  const SpectralData bottom = spectral_bottom(h, k);
  Table t;
  t.columns = {"index", "eigenvalue", "residual"};
  for (int i = 0; i < k; ++i) t.add(i, bottom.lowest[i], bottom.residuals[i]);
  ctx.write_csv(t);
  json r;
  r["dimension"] = h.dim();
  r["e0"] = bottom.e0;
  r["lowest"] = bottom.lowest;
  r["gershgorin_lower"] = h.gershgorin_lower;
  r["method"] = bottom.dense ? "dense" : "shift-invert-lanczos";
  json checks;
  checks["residuals_certified"] =
      std::all_of(bottom.residuals.begin(), bottom.residuals.end(), [](double x) { return x <= 1e-8; });
  checks["above_gershgorin"] = bottom.e0 >= h.gershgorin_lower - 1e-9;
  ctx.write_summary(r, checks);
}

void cmd_ns_test(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const LatticeCube cube = main_cube(c);
  const AssembledHamiltonian h = assemble(cube, cube_field(c, cube), c.interaction);
  ctx.export_matrix_file(h.matrix);
  const SpectralData bottom = spectral_bottom(h, 1);
  const ScaleParameters& scale = c.scale;
  Table t;
  t.columns = {"label", "energy", "verdict", "reason", "block_norm", "threshold",
               "spectral_distance"};
  json verdicts = json::array();
  for (const std::string& label : c.ns_energies) {
    const double energy = parse_energy(label, bottom.e0, scale.e_star);
    const NsVerdict v = ns_test(h, scale, energy, {}, &bottom);
    const std::string norm = v.block_norm ? cell(*v.block_norm) : "";
    t.add(label, energy, to_string(v.verdict), to_string(v.reason), norm, v.threshold,
          v.spectral_distance);
    verdicts.push_back({{"label", label},
                        {"energy", energy},
                        {"verdict", to_string(v.verdict)},
                        {"reason", to_string(v.reason)}});
  }
  ctx.write_csv(t);
  json r;
  r["L"] = c.L0;
  r["e0"] = bottom.e0;
  r["e_star"] = scale.e_star;
  r["m"] = scale.m;
  r["gamma"] = scale.rate(c.L0);
  r["threshold"] = scale.threshold(c.L0);
  r["verdicts"] = verdicts;
  ctx.write_summary(r, json::object());
}

void cmd_combes_thomas(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const LatticeCube cube = main_cube(c);
  const AssembledHamiltonian h = assemble(cube, cube_field(c, cube), c.interaction);
  ctx.export_matrix_file(h.matrix);
  const SpectralData bottom = spectral_bottom(h, 1);
  const double energy = bottom.e0 - c.ct_eta;

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t dim = h.dim();
  const bool all = dim <= c.ct_max_pairs / std::max<std::size_t>(dim, 1);
  if (all) {
    pairs = all_pairs(dim);
  } else {
    Engine engine = make_engine(derive_seed(c.master_seed, 1));
    std::uniform_int_distribution<std::size_t> pick(0, dim - 1);
    for (std::size_t i = 0; i < c.ct_max_pairs; ++i) pairs.emplace_back(pick(engine), pick(engine));
  }
  const CombesThomasReport report = verify_combes_thomas(h, energy, c.ct_gamma, pairs, {}, &bottom);
  Table t;
  t.columns = {"x", "y", "distance", "measured", "envelope", "envelope_particle_dim", "ratio"};
  for (const CombesThomasPair& p : report.pairs) {
    t.add(p.x, p.y, p.distance, p.measured, p.envelope, p.envelope_particle_dim, p.ratio);
  }
  ctx.write_csv(t);
  json r;
  r["energy"] = report.energy;
  r["e0"] = report.e0;
  r["eta"] = report.eta;
  r["gamma"] = report.gamma;
  r["ambient_dim"] = report.ambient_dim;
  r["particle_dim"] = report.particle_dim;
  r["pairs"] = report.pairs.size();
  r["all_pairs"] = all;
  r["violations"] = report.violations.size();
  r["max_ratio"] = report.max_ratio;
  json checks;
  checks["no_violations"] = report.violations.empty();
  ctx.write_summary(r, checks);
}

void cmd_ldp(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  LdpOptions opts;
  opts.trials = c.ldp_trials;
  opts.master_seed = c.master_seed;
  opts.workers = c.workers;
  opts.importance_sampling = c.ldp_importance_sampling;
  const LdpReport report = ldp_experiment(c.field, c.d, c.ldp_lengths, opts);
  for (const std::string& w : report.warnings) ctx.warn(w);

  Table t;
  t.columns = {"L",  "volume", "tilt", "trials", "hits", "p_hat", "lo", "hi", "standard_error",
               "markov_checks", "markov_failures"};
  bool decreasing = true;
  std::uint64_t markov_failures = 0;
  for (std::size_t i = 0; i < report.volumes.size(); ++i) {
    const LdpVolume& v = report.volumes[i];
    t.add(v.L, v.volume, v.tilt, v.estimate.trials, v.estimate.hits, v.estimate.p_hat,
          v.estimate.lo, v.estimate.hi, v.estimate.standard_error, v.markov_checks,
          v.markov_failures);
    if (i > 0 && !(v.estimate.p_hat < report.volumes[i - 1].estimate.p_hat)) decreasing = false;
    markov_failures += v.markov_failures;
  }
  ctx.write_csv(t);
  json r;
  r["s0"] = report.s0;
  r["gamma_x_min"] = report.gamma_x_min;
  r["estimator"] = report.estimator;
  r["fitted_rate"] = report.fitted_rate ? json(*report.fitted_rate) : json(nullptr);
  json volumes = json::array();
  for (const LdpVolume& v : report.volumes) {
    volumes.push_back({{"L", v.L}, {"volume", v.volume}, {"estimate", estimate_json(v.estimate)}});
  }
  r["volumes"] = volumes;
  json checks;
  checks["s0_at_most_half_gamma_x"] = report.s0_condition_holds;
  checks["p_hat_strictly_decreasing"] = decreasing;
  checks["fitted_rate_positive"] = report.fitted_rate.has_value() && *report.fitted_rate > 0.0;
  checks["markov_step_holds"] = markov_failures == 0;
  ctx.write_summary(r, checks);
}

void cmd_mc_edge(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  Table t;
  t.columns = {"L", "trials", "hits", "p_hat", "lo", "hi", "theory_bound", "low_edge_hits",
               "low_edge_p_hat", "mean_e0", "min_e0"};
  for (double p : c.p_values) t.columns.push_back("bound_p" + format_double(p));
  json scales = json::array();
  bool monotone = true;
  double previous_hi = INFINITY;
  for (double L : c.sweep_lengths) {
    const EdgeReport rep =
        mc_edge_probability(c.field, cube_parameters(c, L), c.scale, mc_options(c), c.edge_b);
    std::vector<std::string> row = {
        cell(L),           cell(rep.edge.trials), cell(rep.edge.hits),   cell(rep.edge.p_hat),
        cell(rep.edge.lo), cell(rep.edge.hi),     cell(*rep.edge.theory_bound),
        cell(rep.low_edge.hits), cell(rep.low_edge.p_hat), cell(rep.mean_e0), cell(rep.min_e0)};
    json bounds = json::object();
    for (double p : c.p_values) {
      const double bound = edge_probability_bound(L, p, c.n, c.N);
      row.push_back(cell(bound));
      bounds[format_double(p)] = bound;
    }
    t.rows.push_back(std::move(row));
    if (rep.edge.hi > previous_hi) monotone = false;
    previous_hi = rep.edge.hi;
    scales.push_back({{"L", L},
                      {"edge", estimate_json(rep.edge)},
                      {"low_edge", estimate_json(rep.low_edge)},
                      {"bounds_by_p", bounds},
                      {"mean_e0", rep.mean_e0}});
  }
  ctx.write_csv(t);
  json r;
  r["scales"] = scales;
  json checks;
  checks["wilson_upper_non_increasing"] = monotone;
  ctx.write_summary(r, checks);
}

struct SingularRow {
  SingularityReport report;
  double step = 0.0;
};

SingularRow run_singular(const ExperimentConfig& c, double L) {
  const ScaleParameters at = parameters_at(c.scale, L);
  const double step = c.energy_grid_step > 0.0 ? c.energy_grid_step : at.e_star / 16.0;
  return {mc_singularity_probability(c.field, cube_parameters(c, L), c.scale, mc_options(c), step),
          step};
}

void singular_artifacts(Context& ctx, const std::vector<SingularRow>& rows, json extra) {
  Table t;
  t.columns = {"L",         "m",         "e_star",        "gamma",          "threshold",
               "grid_step", "trials",    "hits",          "p_hat",          "lo",
               "hi",        "theory_bound", "edge_hits",   "extra_grid_hits", "gap_failures",
               "ns_failures", "max_norm_ratio"};
  json scales = json::array();
  bool monotone = true, sound = true, coherent = true;
  double previous_hi = INFINITY;
  for (const SingularRow& row : rows) {
    const SingularityReport& s = row.report;
    const ScaleParameters& sp = s.scale;
    t.add(s.L, sp.m, sp.e_star, sp.rate(s.L), sp.threshold(s.L), row.step, s.singular.trials,
          s.singular.hits, s.singular.p_hat, s.singular.lo, s.singular.hi,
          *s.singular.theory_bound, s.edge_hits, s.extra_grid_hits, s.gap_assertion_failures,
          s.ns_assertion_failures, s.max_norm_ratio);
    if (s.singular.hi > previous_hi) monotone = false;
    previous_hi = s.singular.hi;
    sound = sound && s.gap_assertion_failures == 0 && s.ns_assertion_failures == 0;
    coherent = coherent && s.singular.hits <= s.edge_hits + s.extra_grid_hits;
    scales.push_back({{"L", s.L},
                      {"m", sp.m},
                      {"e_star", sp.e_star},
                      {"gamma", sp.rate(s.L)},
                      {"threshold", sp.threshold(s.L)},
                      {"energy_grid", s.energy_grid},
                      {"singular", estimate_json(s.singular)},
                      {"edge_hits", s.edge_hits},
                      {"extra_grid_hits", s.extra_grid_hits},
                      {"gap_assertion_failures", s.gap_assertion_failures},
                      {"ns_assertion_failures", s.ns_assertion_failures},
                      {"max_norm_ratio", s.max_norm_ratio}});
  }
  ctx.write_csv(t);
  json r = std::move(extra);
  r["scales"] = scales;
  json checks;
  checks["gap_argument_sound"] = sound;
  checks["estimator_coherent"] = coherent;
  checks["wilson_upper_non_increasing"] = monotone;
  ctx.write_summary(r, checks);
}

void cmd_mc_singular(Context& ctx) {
  std::vector<SingularRow> rows;
  for (double L : ctx.cfg.sweep_lengths) rows.push_back(run_singular(ctx.cfg, L));
  singular_artifacts(ctx, rows, json::object());
}

void cmd_scaling_run(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const ScaleSequence seq =
      scale_sequence(std::llround(c.L0), c.alpha, c.count, c.max_length);
  if (seq.truncated) {
    ctx.warn("scale sequence truncated at scales.max_length = " + std::to_string(c.max_length));
  }
  std::vector<SingularRow> rows;
  std::vector<long long> used;
  for (long long L : seq.lengths) {
    const double axes = c.n * c.d;
    const double estimate = axes * std::pow(2.0 * static_cast<double>(L) / c.h, axes);
    if (estimate > c.budget) {
      ctx.warn("scale L = " + std::to_string(L) + " exceeds scales.budget; sequence truncated");
      break;
    }
    rows.push_back(run_singular(c, static_cast<double>(L)));
    used.push_back(L);
  }
  json extra;
  extra["scale_sequence"] = used;
  extra["truncated"] = used.size() < static_cast<std::size_t>(c.count);
  singular_artifacts(ctx, rows, extra);
}

void cmd_decay_fit(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const LatticeCube cube = main_cube(c);
  const AssembledHamiltonian h = assemble(cube, cube_field(c, cube), c.interaction);
  ctx.export_matrix_file(h.matrix);
  const int k = static_cast<int>(std::min<std::size_t>(c.decay_k, h.dim()));
  const SpectralData bottom = spectral_bottom(h, k);
  const std::vector<DecayFit> fits =
      eigenfunction_decay_fit(cube, bottom.vectors, bottom.lowest);
  Table t;
  t.columns = {"index", "eigenvalue", "peak", "rate", "r_squared", "points", "localized"};
  json list = json::array();
  for (const DecayFit& f : fits) {
    t.add(f.index, f.eigenvalue, f.peak, f.rate, f.r_squared, f.points, f.localized);
    list.push_back({{"eigenvalue", f.eigenvalue},
                    {"rate", f.rate},
                    {"r_squared", f.r_squared},
                    {"localized", f.localized}});
  }
  ctx.write_csv(t);
  json r;
  r["fits"] = list;
  ctx.write_summary(r, json::object());
}

std::vector<std::size_t> dynamics_region(const ExperimentConfig& c,
                                         const AssembledHamiltonian& h) {
  std::size_t center = 0;
  if (c.dyn_region == "origin") {
    const std::vector<double> origin(static_cast<std::size_t>(h.cube.axes()), 0.0);
    const auto found = h.cube.find(origin);
    if (!found) throw DomainError("dynamics.region = origin needs a grid point at the origin");
    center = *found;
  } else {
    const SpectralData ground = spectral_bottom(h, 1);
    Eigen::Index peak = 0;
    ground.vectors.col(0).cwiseAbs().maxCoeff(&peak);
    center = static_cast<std::size_t>(peak);
  }
  return neighbourhood(h.cube, center, c.dyn_radius);
}

json trace_json(const DynamicalMomentTrace& trace) {
  return {{"max", trace.max_value},
          {"argmax_time", trace.argmax_time},
          {"projected_states", trace.projected_states}};
}

void cmd_dynamics(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const LatticeCube cube = main_cube(c);
  if (cube.size() > kDynamicsDimensionCap) {
    throw ResourceError("dynamics needs a full diagonalization; dimension " +
                        std::to_string(cube.size()) + " exceeds " +
                        std::to_string(kDynamicsDimensionCap));
  }
  const AssembledHamiltonian h = assemble(cube, cube_field(c, cube), c.interaction);
  const AssembledHamiltonian free = assemble(
      cube, [](std::span<const int>) { return 0.0; }, c.interaction);
  ctx.export_matrix_file(h.matrix);

  auto spec_for = [&](const AssembledHamiltonian& op) {
    const double e0 = spectral_bottom(op, 1).e0;
    DynamicalMomentSpec spec;
    spec.s = c.dyn_s;
    spec.e_low = parse_energy(c.dyn_e_low, e0, c.scale.e_star);
    spec.e_high = parse_energy(c.dyn_e_high, e0, c.scale.e_star);
    spec.region = dynamics_region(c, op);
    spec.times = log_time_grid(c.dyn_t_min, c.dyn_t_max, static_cast<std::size_t>(c.dyn_points));
    return spec;
  };

  DynamicalMomentSpec spec = spec_for(h);
  const DynamicalMomentTrace base = dynamical_moment(h, spec);
  const DynamicalMomentSpec control_spec = spec_for(free);
  const DynamicalMomentTrace control = dynamical_moment(free, control_spec);

  Table t;
  t.columns = {"series", "t", "value"};
  for (std::size_t i = 0; i < base.times.size(); ++i) t.add("sample", base.times[i], base.values[i]);
  json r;
  r["interval"] = {spec.e_low, spec.e_high};
  r["region_size"] = spec.region.size();
  r["sample"] = trace_json(base);
  json checks;
  if (c.dyn_refine_check) {
    spec.times = refine_time_grid(spec.times);
    const DynamicalMomentTrace refined = dynamical_moment(h, spec);
    for (std::size_t i = 0; i < refined.times.size(); ++i) {
      t.add("sample-refined", refined.times[i], refined.values[i]);
    }
    const double change = base.max_value > 0.0
                              ? std::abs(refined.max_value - base.max_value) / base.max_value
                              : std::abs(refined.max_value);
    r["refined"] = trace_json(refined);
    r["relative_change"] = change;
    checks["stable_under_refinement"] = change < 0.05;
  }
  for (std::size_t i = 0; i < control.times.size(); ++i) {
    t.add("free-control", control.times[i], control.values[i]);
  }
  r["free_control"] = trace_json(control);
  ctx.write_csv(t);
  ctx.write_summary(r, checks);
}

const std::map<std::string, std::function<void(Context&)>>& handlers() {
  static const std::map<std::string, std::function<void(Context&)>> table = {
      {"sample-field", cmd_sample_field}, {"mixing", cmd_mixing},
      {"spectrum", cmd_spectrum},         {"ns-test", cmd_ns_test},
      {"combes-thomas", cmd_combes_thomas}, {"ldp", cmd_ldp},
      {"mc-edge", cmd_mc_edge},           {"mc-singular", cmd_mc_singular},
      {"decay-fit", cmd_decay_fit},       {"dynamics", cmd_dynamics},
      {"scaling-run", cmd_scaling_run}};
  return table;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"alab: multi-particle Anderson model laboratory"};
  app.name("alab");
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out_dir;
  unsigned workers = 0;
  bool export_matrix = false;
  app.add_option("--config", config_path, "YAML config file");
  app.add_option("--set", overrides, "Override dotted.key=value (repeatable)");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (mc.master_seed)");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (output.directory)");
  auto* workers_opt =
      app.add_option("--workers", workers, "Worker threads (mc.workers)")->check(CLI::Range(1, 1024));
  app.add_flag("--export-matrix", export_matrix, "Also write the Hamiltonian in MatrixMarket form");
  static const std::map<std::string, std::string> descriptions = {
      {"sample-field", "Draw one potential realization and its summary statistics"},
      {"mixing", "Estimate mixing coefficients and the log-Hoelder modulus"},
      {"spectrum", "Lowest eigenvalues and eigenvectors of one cube"},
      {"ns-test", "(E, m)-nonsingularity verdicts at configured energies"},
      {"combes-thomas", "Compare resolvent entries with the Combes-Thomas envelope"},
      {"ldp", "Large-deviation probabilities of the box-averaged potential"},
      {"mc-edge", "Monte Carlo probability of a low spectral edge over a length sweep"},
      {"mc-singular", "Monte Carlo probability of singular cubes on the energy grid"},
      {"decay-fit", "Exponential decay rates of the lowest eigenfunctions"},
      {"dynamics", "Dynamical moment of a spectrally filtered wave packet"},
      {"scaling-run", "Edge and singularity sweep along the scale sequence"}};
  for (const std::string& name : subcommands()) app.add_subcommand(name, descriptions.at(name));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    ConfigTree tree = ConfigTree::defaults();
    if (!config_path.empty()) tree.merge_file(config_path);
    for (const std::string& o : overrides) tree.set_override(o);
    if (seed_opt->count()) tree.set_value("mc.master_seed", std::to_string(seed), "--seed");
    if (out_opt->count()) tree.set_value("output.directory", "'" + out_dir + "'", "--out");
    if (workers_opt->count()) tree.set_value("mc.workers", std::to_string(workers), "--workers");

    Context ctx;
    ctx.cfg = resolve(tree);
    ctx.name = name;
    ctx.export_matrix = export_matrix;
    // Worker count and output location do not change results, so they stay
    // out of the echo and artifacts are identical across them.
    ctx.config_echo = tree.echo({"mc.workers", "output.directory"});
    ctx.out_dir = ctx.cfg.output_directory;
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw ResourceError("cannot create output directory " + ctx.out_dir.string());

    logger()->info("{}: running with master seed {}", name, ctx.cfg.master_seed);
    handlers().at(name)(ctx);
    logger()->info("{}: artifacts written to {}", name, ctx.out_dir.string());
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "alab " << name << ": configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "alab " << name << ": precondition violated: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "alab " << name << ": numeric error: " << e.what()
        << " (best residual " << e.best_residual() << ")\n";
    return kExitNumeric;
  } catch (const ResourceError& e) {
    err << "alab " << name << ": resource limit: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::exception& e) {
    err << "alab " << name << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace alab::cli
