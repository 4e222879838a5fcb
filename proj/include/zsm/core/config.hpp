#pragma once

#include "zsm/core/constants.hpp"
#include "zsm/core/grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zsm {

/// Grid descriptor as it appears in a configuration file.
struct GridSpec {
  Topology topology = Topology::line;
  double radius = 1.0;
  std::array<double, 2> lo{-1.0, -1.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<int, 2> count{64, 64};
  std::array<Boundary, 2> boundary{Boundary::reflecting, Boundary::reflecting};
};

GridPtr build_grid(const GridSpec& spec);

/// Parsed experiment configuration (`schema = 1`).
///
/// `potential`, `initial_state` and `parameters` stay as JSON trees; each
/// experiment interprets its own keys. Validation only admits keys that also
/// appear in the experiment's defaults.
struct ExperimentConfig {
  int schema = 1;
  UnitSystem units = UnitSystem::natural;
  std::map<std::string, double> constant_overrides;
  std::optional<GridSpec> grid;
  nlohmann::json potential = nlohmann::json::object();
  nlohmann::json initial_state = nlohmann::json::object();
  double dt = 1e-3;
  int steps = 1;
  int ensemble_size = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::map<std::string, double> tolerances;
  nlohmann::json parameters = nlohmann::json::object();

  PhysicalConstants constants() const;
  double tolerance(const std::string& name) const;
  double parameter(const std::string& name) const;
};

/// Merges `user` over `defaults` (objects recursively, everything else
/// replaced) and validates the result. Keys absent from `defaults` are
/// rejected with a ConfigError naming their path.
ExperimentConfig parse_config(const nlohmann::json& user, const nlohmann::json& defaults);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json load_json_file(const std::string& path);

/// FNV-1a 64-bit hash of the canonical (sorted-key, compact) JSON dump.
std::uint64_t config_hash(const nlohmann::json& canonical);
std::string hex64(std::uint64_t value);

}  // namespace zsm
