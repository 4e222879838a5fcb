#include "zsm/core/config.hpp"

#include "zsm/core/error.hpp"

#include <cstdio>
#include <fstream>

namespace zsm {

using nlohmann::json;

namespace {

const json& base_defaults() {
  static const json base = {
      {"schema", 1},
      {"constants", {{"units", "natural"}, {"mass", nullptr}, {"hbar", nullptr}, {"c", nullptr},
                     {"charge", nullptr}}},
      {"grid", {{"topology", "line"}, {"radius", 1.0}, {"lo", {-1.0, -1.0}}, {"hi", {1.0, 1.0}},
                {"count", {64, 64}}, {"boundary", {"reflecting", "reflecting"}}}},
      {"potential", json::object()},
      {"initial_state", json::object()},
      {"dt", 1e-3},
      {"steps", 1},
      {"ensemble_size", 1},
      {"seed", 0},
      {"outputs", json::array()},
      {"tolerances", json::object()},
      {"parameters", json::object()},
  };
  return base;
}

bool compatible(const json& reference, const json& value) {
  if (reference.is_null()) return value.is_null() || value.is_number();
  if (reference.is_number()) return value.is_number();
  if (reference.is_array()) return value.is_array();
  return reference.type() == value.type();
}

/// Overlays `user` onto `target`. Unknown keys are rejected unless `extend`.
void overlay(json& target, const json& user, const std::string& path, bool extend) {
  if (!user.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string here = path + "/" + key;
    if (!target.contains(key)) {
      if (!extend) throw ConfigError(here, "unknown key");
      target[key] = value;
      continue;
    }
    json& slot = target[key];
    if (!compatible(slot, value)) throw ConfigError(here, "wrong value type");
    if (slot.is_object()) {
      overlay(slot, value, here, extend);
    } else {
      slot = value;
    }
  }
}

double positive(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0)) throw ConfigError(path, "must be strictly positive");
  return x;
}

int at_least(const json& v, int lo, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  const auto x = v.get<long long>();
  if (x < lo || x > 2147483647LL) throw ConfigError(path, "must be >= " + std::to_string(lo));
  return static_cast<int>(x);
}

GridSpec parse_grid(const json& g) {
  GridSpec s;
  try {
    s.topology = topology_from_string(g.at("topology").get<std::string>());
  } catch (const InvalidArgument& e) {
    throw ConfigError("/grid/topology", e.what());
  }
  s.radius = positive(g.at("radius"), "/grid/radius");
  for (int a = 0; a < 2; ++a) {
    const std::string idx = "/" + std::to_string(a);
    if (g.at("lo").size() != 2 || g.at("hi").size() != 2 || g.at("count").size() != 2 ||
        g.at("boundary").size() != 2)
      throw ConfigError("/grid", "lo, hi, count and boundary need two entries");
    s.lo[a] = g.at("lo").at(a).get<double>();
    s.hi[a] = g.at("hi").at(a).get<double>();
    s.count[a] = at_least(g.at("count").at(a), 8, "/grid/count" + idx);
    try {
      s.boundary[a] = boundary_from_string(g.at("boundary").at(a).get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError("/grid/boundary" + idx, e.what());
    }
    if (!(s.hi[a] > s.lo[a])) throw ConfigError("/grid/hi" + idx, "must exceed lo");
  }
  return s;
}

}  // namespace

GridPtr build_grid(const GridSpec& s) {
  switch (s.topology) {
    case Topology::line: return Grid::line(s.lo[0], s.hi[0], s.count[0], s.boundary[0]);
    case Topology::ring: return Grid::ring(s.radius, s.count[0]);
    case Topology::plane:
      return Grid::plane(Grid::plane_axis(s.lo[0], s.hi[0], s.count[0], s.boundary[0]),
                         Grid::plane_axis(s.lo[1], s.hi[1], s.count[1], s.boundary[1]));
    case Topology::polar: return Grid::polar(s.radius, s.count[0], s.count[1], s.boundary[0]);
  }
  throw InvalidArgument("build_grid: unknown topology");
}

PhysicalConstants ExperimentConfig::constants() const {
  return make_constants(units, constant_overrides);
}

double ExperimentConfig::tolerance(const std::string& name) const {
  const auto it = tolerances.find(name);
  if (it == tolerances.end()) throw ConfigError("/tolerances/" + name, "missing tolerance");
  return it->second;
}

double ExperimentConfig::parameter(const std::string& name) const {
  if (!parameters.contains(name) || !parameters[name].is_number())
    throw ConfigError("/parameters/" + name, "missing numeric parameter");
  return parameters[name].get<double>();
}

ExperimentConfig parse_config(const json& user, const json& defaults) {
  json merged = base_defaults();
  if (!defaults.is_null()) overlay(merged, defaults, "", true);
  if (!user.is_null()) overlay(merged, user, "", false);

  ExperimentConfig c;
  if (!merged["schema"].is_number_integer() || merged["schema"].get<int>() != 1)
    throw ConfigError("/schema", "unsupported schema version (expected 1)");
  const json& k = merged["constants"];
  try {
    c.units = unit_system_from_string(k["units"].get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError("/constants/units", e.what());
  }
  for (const char* key : {"mass", "hbar", "c", "charge"})
    if (!k[key].is_null()) c.constant_overrides[key] = positive(k[key], std::string("/constants/") + key);
  c.grid = parse_grid(merged["grid"]);
  c.potential = merged["potential"];
  c.initial_state = merged["initial_state"];
  c.dt = positive(merged["dt"], "/dt");
  c.steps = at_least(merged["steps"], 1, "/steps");
  c.ensemble_size = at_least(merged["ensemble_size"], 1, "/ensemble_size");
  const json& seed = merged["seed"];
  if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                     seed.get<long long>() < 0))
    throw ConfigError("/seed", "expected a non-negative 64-bit integer");
  c.seed = seed.get<std::uint64_t>();
  for (std::size_t i = 0; i < merged["outputs"].size(); ++i) {
    if (!merged["outputs"][i].is_string())
      throw ConfigError("/outputs/" + std::to_string(i), "expected a string");
    c.outputs.push_back(merged["outputs"][i].get<std::string>());
  }
  for (const auto& [key, value] : merged["tolerances"].items())
    c.tolerances[key] = positive(value, "/tolerances/" + key);
  c.parameters = merged["parameters"];
  return c;
}

json to_json(const ExperimentConfig& c) {
  json k = {{"units", to_string(c.units)}};
  for (const auto& [key, value] : c.constant_overrides) k[key] = value;
  json j = {{"schema", c.schema},
            {"constants", k},
            {"potential", c.potential},
            {"initial_state", c.initial_state},
            {"dt", c.dt},
            {"steps", c.steps},
            {"ensemble_size", c.ensemble_size},
            {"seed", c.seed},
            {"outputs", c.outputs},
            {"tolerances", c.tolerances},
            {"parameters", c.parameters}};
  if (c.grid) {
    const GridSpec& g = *c.grid;
    j["grid"] = {{"topology", to_string(g.topology)},
                 {"radius", g.radius},
                 {"lo", g.lo},
                 {"hi", g.hi},
                 {"count", g.count},
                 {"boundary", {to_string(g.boundary[0]), to_string(g.boundary[1])}}};
  }
  return j;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
}

std::uint64_t config_hash(const json& canonical) {
  const std::string text = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace zsm
