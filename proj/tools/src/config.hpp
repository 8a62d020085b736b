#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "alab/field.hpp"
#include "alab/hamiltonian.hpp"
#include "alab/msa.hpp"

namespace alab::cli {

/// Text of configs/default.yaml, compiled in.
std::string_view default_config_text();

/// Flattened key-value tree: dotted keys to YAML leaves (scalars or
/// sequences of scalars), each remembering where it was set.
class ConfigTree {
 public:
  /// Tree holding the built-in defaults; they define the set of valid keys.
  static ConfigTree defaults();

  /// Merges a YAML file. Unknown keys and malformed YAML raise ConfigError
  /// with file:line.
  void merge_file(const std::string& path);
  void merge_text(std::string_view text, const std::string& origin);
  /// Applies "dotted.key=value"; the value is parsed as YAML.
  void set_override(std::string_view assignment);
  void set_value(const std::string& key, const std::string& yaml_value,
                 const std::string& origin);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  /// "file:line" or "--set" for the entry that last set the key.
  std::string where(const std::string& key) const;

  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  /// Nested JSON of every key except those listed, with scalars typed as
  /// integer, real, boolean or string.
  nlohmann::ordered_json echo(const std::vector<std::string>& exclude) const;

 private:
  struct Entry {
    YAML::Node value;
    std::string origin;
    int line = 0;
  };
  void merge_node(const YAML::Node& node, const std::string& prefix, const std::string& origin,
                  bool allow_new);
  const Entry& entry(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, Entry> entries_;
};

struct ExperimentConfig {
  int N = 2;
  int n = 1;
  int d = 1;
  InteractionSpec interaction;
  FieldSpec field;  ///< law only; region and seed are set per use

  double L0 = 8.0;
  double alpha = 1.5;
  int count = 3;
  long long max_length = 1000;
  double h = 1.0;
  double budget = 2.0e8;

  double p = 0.5;
  double gamma_ct = 0.5;
  double energy_grid_step = 0.0;
  double edge_b = 1.0;
  std::vector<double> p_values;

  std::uint64_t trials = 1000;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;

  std::string output_directory = "out";
  bool write_csv = true;
  bool write_json = true;

  int spectrum_k = 6;
  std::vector<int> mixing_distances;
  std::uint64_t mixing_trials = 4000;
  std::vector<double> mixing_epsilons;
  std::vector<std::string> ns_energies;
  double ct_gamma = 0.5;
  double ct_eta = 1.0;
  std::size_t ct_max_pairs = 10000;
  std::vector<int> ldp_lengths;
  std::uint64_t ldp_trials = 10000;
  bool ldp_importance_sampling = true;
  std::vector<double> sweep_lengths;
  int decay_k = 4;
  double dyn_s = 1.0;
  std::string dyn_e_low = "e0";
  std::string dyn_e_high = "e0+1";
  std::string dyn_region = "ground-peak";
  double dyn_radius = 2.0;
  double dyn_t_min = 0.01;
  double dyn_t_max = 1000.0;
  int dyn_points = 64;
  bool dyn_refine_check = true;

  ScaleParameters scale;  ///< derived at L0
};

/// Typed, validated view of the tree. ConfigError messages start with the
/// location of the offending key.
ExperimentConfig resolve(const ConfigTree& tree);

/// Energy expression: e0, e_star or a number, optionally followed by +x or
/// -x (for example "e0-0.5", "e_star+1e-3", "-2").
double parse_energy(std::string_view text, double e0, double e_star);

}  // namespace alab::cli
