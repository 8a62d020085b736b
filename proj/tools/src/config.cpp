#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "alab/errors.hpp"
#include "default_config.hpp"

namespace alab::cli {

std::string_view default_config_text() { return kDefaultConfigText; }

ConfigTree ConfigTree::defaults() {
  ConfigTree tree;
  const YAML::Node root = YAML::Load(std::string(kDefaultConfigText));
  tree.merge_node(root, "", "defaults", true);
  return tree;
}

void ConfigTree::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  merge_text(buffer.str(), path);
}

void ConfigTree::merge_text(std::string_view text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    std::ostringstream msg;
    msg << origin << ':' << (e.mark.line + 1) << ": malformed YAML: " << e.msg;
    throw ConfigError(msg.str());
  }
  if (root.IsNull()) return;
  if (!root.IsMap()) throw ConfigError(origin + ":1: top level must be a mapping");
  merge_node(root, "", origin, false);
}

void ConfigTree::merge_node(const YAML::Node& node, const std::string& prefix,
                            const std::string& origin, bool allow_new) {
  for (const auto& item : node) {
    const std::string key = prefix + item.first.as<std::string>();
    const YAML::Node& value = item.second;
    const int line = value.Mark().line + 1;
    auto location = [&] {
      std::ostringstream msg;
      msg << origin << ':' << (line > 0 ? line : item.first.Mark().line + 1) << ": ";
      return msg.str();
    };
    if (value.IsMap()) {
      merge_node(value, key + ".", origin, allow_new);
      continue;
    }
    if (!allow_new && !has(key)) {
      throw ConfigError(location() + "unknown key '" + key + "'");
    }
    if (value.IsSequence()) {
      for (const auto& element : value) {
        if (!element.IsScalar()) {
          throw ConfigError(location() + "'" + key + "' must be a list of scalars");
        }
      }
    } else if (!value.IsScalar()) {
      throw ConfigError(location() + "'" + key + "' needs a value");
    }
    if (!allow_new && entries_.at(key).value.IsSequence() != value.IsSequence()) {
      throw ConfigError(location() + "'" + key + "' must be " +
                        (value.IsSequence() ? "a scalar" : "a list"));
    }
    entries_[key] = Entry{YAML::Clone(value), origin, line};
  }
}

void ConfigTree::set_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("--set expects dotted.key=value, got '" + std::string(assignment) + "'");
  }
  set_value(std::string(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)),
            "--set");
}

void ConfigTree::set_value(const std::string& key, const std::string& yaml_value,
                           const std::string& origin) {
  if (!has(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
  YAML::Node value;
  try {
    value = YAML::Load(yaml_value);
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ": cannot parse value of '" + key + "': " + e.msg);
  }
  if (value.IsNull()) value = YAML::Node(yaml_value);
  if (value.IsMap()) throw ConfigError(origin + ": '" + key + "' must be a scalar or a list");
  if (entries_.at(key).value.IsSequence() != value.IsSequence()) {
    throw ConfigError(origin + ": '" + key + "' must be " +
                      (value.IsSequence() ? "a scalar" : "a list"));
  }
  entries_[key] = Entry{value, origin, 0};
}

std::string ConfigTree::where(const std::string& key) const {
  const Entry& e = entry(key);
  if (e.line <= 0) return e.origin;
  return e.origin + ':' + std::to_string(e.line);
}

const ConfigTree::Entry& ConfigTree::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

void ConfigTree::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(where(key) + ": " + key + " " + what);
}

namespace {

template <class T>
bool convert(const YAML::Node& node, T& out) {
  try {
    out = node.as<T>();
    return true;
  } catch (const YAML::Exception&) {
    return false;
  }
}

}  // namespace

double ConfigTree::get_double(const std::string& key) const {
  double v = 0.0;
  if (!convert(entry(key).value, v) || !std::isfinite(v)) fail(key, "must be a finite number");
  return v;
}

long long ConfigTree::get_int(const std::string& key) const {
  long long v = 0;
  if (!convert(entry(key).value, v)) fail(key, "must be an integer");
  return v;
}

std::uint64_t ConfigTree::get_u64(const std::string& key) const {
  std::uint64_t v = 0;
  const YAML::Node& node = entry(key).value;
  if (!node.IsScalar() || node.Scalar().starts_with('-') || !convert(node, v)) {
    fail(key, "must be a non-negative integer");
  }
  return v;
}

bool ConfigTree::get_bool(const std::string& key) const {
  bool v = false;
  if (!convert(entry(key).value, v)) fail(key, "must be true or false");
  return v;
}

std::string ConfigTree::get_string(const std::string& key) const {
  const YAML::Node& node = entry(key).value;
  if (!node.IsScalar()) fail(key, "must be a scalar");
  return node.Scalar();
}

std::vector<double> ConfigTree::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& element : entry(key).value) {
    double v = 0.0;
    if (!convert(element, v) || !std::isfinite(v)) fail(key, "must be a list of numbers");
    out.push_back(v);
  }
  return out;
}

std::vector<int> ConfigTree::get_ints(const std::string& key) const {
  std::vector<int> out;
  for (const auto& element : entry(key).value) {
    int v = 0;
    if (!convert(element, v)) fail(key, "must be a list of integers");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> ConfigTree::get_strings(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& element : entry(key).value) out.push_back(element.Scalar());
  return out;
}

namespace {

nlohmann::ordered_json typed_scalar(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  long long i = 0;
  if (convert(node, i)) return i;
  double x = 0.0;
  if (convert(node, x) && std::isfinite(x)) return x;
  if (text == "true" || text == "false") return text == "true";
  return text;
}

}  // namespace

nlohmann::ordered_json ConfigTree::echo(const std::vector<std::string>& exclude) const {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (const auto& [key, e] : entries_) {
    if (std::find(exclude.begin(), exclude.end(), key) != exclude.end()) continue;
    nlohmann::ordered_json* node = &root;
    std::size_t start = 0;
    for (std::size_t dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
      node = &(*node)[key.substr(start, dot - start)];
      start = dot + 1;
    }
    nlohmann::ordered_json value;
    if (e.value.IsSequence()) {
      value = nlohmann::ordered_json::array();
      for (const auto& element : e.value) value.push_back(typed_scalar(element));
    } else {
      value = typed_scalar(e.value);
    }
    (*node)[key.substr(start)] = std::move(value);
  }
  return root;
}

ExperimentConfig resolve(const ConfigTree& t) {
  ExperimentConfig c;
  auto require = [&t](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(t.where(key) + ": " + key + " " + what);
  };
  auto wrap = [&t](const std::string& key, auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw ConfigError(t.where(key) + ": " + key + ": " + e.what());
    }
  };

  c.N = static_cast<int>(t.get_int("model.N"));
  require(c.N >= 1, "model.N", "must be >= 1");
  c.n = static_cast<int>(t.get_int("model.n"));
  require(c.n >= 1 && c.n <= c.N, "model.n", "must satisfy 1 <= n <= N");
  c.d = static_cast<int>(t.get_int("model.d"));
  require(c.d >= 1 && c.d <= 3, "model.d", "must be 1, 2 or 3");
  c.interaction.r0 = t.get_double("model.interaction.r0");
  require(c.interaction.r0 >= 0.0, "model.interaction.r0", "must be >= 0");
  c.interaction.u0 = t.get_double("model.interaction.u0");
  require(c.interaction.u0 >= 0.0, "model.interaction.u0", "must be >= 0");
  c.interaction.profile = wrap("model.interaction.profile", [&] {
    return parse_interaction_profile(t.get_string("model.interaction.profile"));
  });

  c.field.kind = wrap("field.kind", [&] { return parse_field_kind(t.get_string("field.kind")); });
  c.field.window = static_cast<int>(t.get_int("field.window"));
  require(c.field.window >= 0, "field.window", "must be >= 0");
  c.field.law.low = t.get_double("field.low");
  c.field.law.high = t.get_double("field.high");
  c.field.law.amplitude = t.get_double("field.amplitude");
  require(c.field.law.amplitude >= 0.0, "field.amplitude", "must be >= 0");
  if (c.field.kind != FieldKind::SquaredGaussianMa) {
    require(c.field.law.low >= 0.0, "field.low", "must be >= 0 (the potential is non-negative)");
    require(c.field.law.high >= c.field.law.low, "field.high", "must be >= field.low");
  }

  c.L0 = t.get_double("scales.L0");
  require(c.L0 >= 8.0, "scales.L0", "must be >= 8");
  c.alpha = t.get_double("scales.alpha");
  require(c.alpha > 1.0, "scales.alpha", "must be > 1");
  c.count = static_cast<int>(t.get_int("scales.count"));
  require(c.count >= 1, "scales.count", "must be >= 1");
  c.max_length = t.get_int("scales.max_length");
  require(c.max_length >= 8, "scales.max_length", "must be >= 8");
  c.h = t.get_double("scales.h");
  require(c.h > 0.0, "scales.h", "must be > 0");
  const double steps = 2.0 * c.L0 / c.h;
  require(std::abs(steps - std::round(steps)) < 1e-9, "scales.h",
          "must divide the cube side 2 L0 evenly");
  c.budget = t.get_double("scales.budget");
  require(c.budget > 0.0, "scales.budget", "must be > 0");

  c.p = t.get_double("msa.p");
  require(c.p > 0.0, "msa.p", "must be > 0");
  c.gamma_ct = t.get_double("msa.gamma_ct");
  require(c.gamma_ct > 0.0 && c.gamma_ct < 1.0, "msa.gamma_ct",
          "must lie in the open interval (0, 1)");
  c.energy_grid_step = t.get_double("msa.energy_grid_step");
  require(c.energy_grid_step >= 0.0, "msa.energy_grid_step", "must be >= 0 (0 selects E*/16)");
  c.edge_b = t.get_double("msa.edge_b");
  require(c.edge_b > 0.0, "msa.edge_b", "must be > 0");
  c.p_values = t.get_doubles("msa.p_values");
  for (double p : c.p_values) require(p > 0.0, "msa.p_values", "entries must be > 0");

  c.trials = t.get_u64("mc.trials");
  require(c.trials >= 1, "mc.trials", "must be >= 1");
  c.master_seed = t.get_u64("mc.master_seed");
  const long long workers = t.get_int("mc.workers");
  require(workers >= 1 && workers <= 1024, "mc.workers", "must lie in [1, 1024]");
  c.workers = static_cast<unsigned>(workers);

  c.output_directory = t.get_string("output.directory");
  require(!c.output_directory.empty(), "output.directory", "must not be empty");
  c.write_csv = c.write_json = false;
  for (const std::string& f : t.get_strings("output.formats")) {
    require(f == "csv" || f == "json", "output.formats", "entries must be csv or json");
    (f == "csv" ? c.write_csv : c.write_json) = true;
  }

  c.spectrum_k = static_cast<int>(t.get_int("spectrum.k"));
  require(c.spectrum_k >= 1, "spectrum.k", "must be >= 1");
  c.mixing_distances = t.get_ints("mixing.distances");
  require(!c.mixing_distances.empty(), "mixing.distances", "must not be empty");
  for (int dist : c.mixing_distances) require(dist >= 1, "mixing.distances", "entries must be >= 1");
  c.mixing_trials = t.get_u64("mixing.trials");
  require(c.mixing_trials >= 1000, "mixing.trials", "must be >= 1000");
  c.mixing_epsilons = t.get_doubles("mixing.epsilons");
  require(c.mixing_epsilons.size() >= 3, "mixing.epsilons", "needs at least 3 values");
  for (std::size_t i = 0; i < c.mixing_epsilons.size(); ++i) {
    require(c.mixing_epsilons[i] > 0.0 && c.mixing_epsilons[i] < 1.0, "mixing.epsilons",
            "entries must lie in (0, 1)");
    require(i == 0 || c.mixing_epsilons[i] < c.mixing_epsilons[i - 1], "mixing.epsilons",
            "must be strictly decreasing");
  }
  c.ns_energies = t.get_strings("ns_test.energies");
  require(!c.ns_energies.empty(), "ns_test.energies", "must not be empty");
  for (const std::string& e : c.ns_energies) {
    wrap("ns_test.energies", [&] { return parse_energy(e, 0.0, 0.0); });
  }
  c.ct_gamma = t.get_double("combes_thomas.gamma");
  require(c.ct_gamma > 0.0 && c.ct_gamma < 1.0, "combes_thomas.gamma",
          "must lie in the open interval (0, 1)");
  c.ct_eta = t.get_double("combes_thomas.eta");
  require(c.ct_eta > 0.0, "combes_thomas.eta", "must be > 0");
  const long long pairs = t.get_int("combes_thomas.max_pairs");
  require(pairs >= 1, "combes_thomas.max_pairs", "must be >= 1");
  c.ct_max_pairs = static_cast<std::size_t>(pairs);
  c.ldp_lengths = t.get_ints("ldp.lengths");
  require(!c.ldp_lengths.empty(), "ldp.lengths", "must not be empty");
  for (int L : c.ldp_lengths) require(L >= 1, "ldp.lengths", "entries must be >= 1");
  c.ldp_trials = t.get_u64("ldp.trials");
  require(c.ldp_trials >= 1000, "ldp.trials", "must be >= 1000");
  c.ldp_importance_sampling = t.get_bool("ldp.importance_sampling");
  c.sweep_lengths = t.get_doubles("sweep.lengths");
  require(!c.sweep_lengths.empty(), "sweep.lengths", "must not be empty");
  for (double L : c.sweep_lengths) require(L >= 8.0, "sweep.lengths", "entries must be >= 8");
  c.decay_k = static_cast<int>(t.get_int("decay_fit.k"));
  require(c.decay_k >= 1, "decay_fit.k", "must be >= 1");
  c.dyn_s = t.get_double("dynamics.s");
  require(c.dyn_s > 0.0, "dynamics.s", "must be > 0");
  c.dyn_e_low = t.get_string("dynamics.e_low");
  wrap("dynamics.e_low", [&] { return parse_energy(c.dyn_e_low, 0.0, 0.0); });
  c.dyn_e_high = t.get_string("dynamics.e_high");
  wrap("dynamics.e_high", [&] { return parse_energy(c.dyn_e_high, 0.0, 0.0); });
  c.dyn_region = t.get_string("dynamics.region");
  require(c.dyn_region == "ground-peak" || c.dyn_region == "origin", "dynamics.region",
          "must be ground-peak or origin");
  c.dyn_radius = t.get_double("dynamics.radius");
  require(c.dyn_radius >= 0.0, "dynamics.radius", "must be >= 0");
  c.dyn_t_min = t.get_double("dynamics.t_min");
  c.dyn_t_max = t.get_double("dynamics.t_max");
  require(c.dyn_t_min > 0.0, "dynamics.t_min", "must be > 0");
  require(c.dyn_t_max > c.dyn_t_min, "dynamics.t_max", "must exceed dynamics.t_min");
  c.dyn_points = static_cast<int>(t.get_int("dynamics.points"));
  require(c.dyn_points >= 2, "dynamics.points", "must be >= 2");
  c.dyn_refine_check = t.get_bool("dynamics.refine_check");

  c.scale = wrap("msa.gamma_ct", [&] {
    return derive_parameters(c.N, c.n, c.d, c.L0, c.p, c.gamma_ct, c.alpha);
  });
  return c;
}

double parse_energy(std::string_view text, double e0, double e_star) {
  const std::string s(text);
  auto bad = [&s]() -> double {
    throw ConfigError("cannot parse energy '" + s +
                      "' (expected e0, e_star or a number, optionally followed by +x or -x)");
  };
  std::size_t pos = 0;
  double base = 0.0;
  if (s.starts_with("e_star")) {
    base = e_star;
    pos = 6;
  } else if (s.starts_with("e0")) {
    base = e0;
    pos = 2;
  } else {
    try {
      std::size_t used = 0;
      base = std::stod(s, &used);
      if (used != s.size()) return bad();
      return base;
    } catch (const std::logic_error&) {
      return bad();
    }
  }
  if (pos == s.size()) return base;
  const char sign = s[pos];
  if (sign != '+' && sign != '-') return bad();
  const std::string rest = s.substr(pos + 1);
  try {
    std::size_t used = 0;
    const double shift = std::stod(rest, &used);
    if (used != rest.size() || rest.empty() || rest[0] == '+' || rest[0] == '-') return bad();
    return sign == '+' ? base + shift : base - shift;
  } catch (const std::logic_error&) {
    return bad();
  }
}

}  // namespace alab::cli
