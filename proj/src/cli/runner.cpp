#include "zsm/cli/experiment.hpp"

#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace zsm::cli {

using nlohmann::json;

Metric at_most(double value, double bound) {
  return {value, bound, Metric::Kind::at_most, 0.0, std::isfinite(value) && value <= bound};
}

Metric at_least(double value, double bound) {
  return {value, bound, Metric::Kind::at_least, 0.0, std::isfinite(value) && value >= bound};
}

Metric within(double value, double target, double tolerance) {
  return {value, tolerance, Metric::Kind::within, target,
          std::isfinite(value) && std::abs(value - target) <= tolerance};
}

Metric within_relative(double value, double target, double rel) {
  return within(value, target, rel * std::abs(target));
}

Metric flag(bool ok) { return {ok ? 1.0 : 0.0, 0.0, Metric::Kind::flag, 1.0, ok}; }

std::string to_string(Metric::Kind kind) {
  switch (kind) {
    case Metric::Kind::at_most: return "at_most";
    case Metric::Kind::at_least: return "at_least";
    case Metric::Kind::within: return "within";
    case Metric::Kind::flag: return "flag";
  }
  return "?";
}

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> all = [] {
    std::vector<Experiment> v;
    for (auto make : {make_ring_spectrum, make_superposition_singlevalue, make_wallstrom_gate,
                      make_central_zsm_resolution, make_equivariance_free_gaussian,
                      make_stationary_node_avoidance, make_mean_acceleration_residual,
                      make_fp_vs_ensemble, make_nonlinear_classical_gaussian, make_bohr_table,
                      make_frequency_shifts, make_variational_stationarity})
      v.push_back(make());
    return v;
  }();
  return all;
}

const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw UnknownExperiment(name);
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> names;
  for (const auto& e : registry()) names.push_back(e.name);
  return names;
}

std::string describe(const Experiment& e) {
  std::ostringstream out;
  out << e.name << "\n  " << e.summary << "\n  reproduces: " << e.anchor << "\n  defaults:\n"
      << e.defaults.dump(2) << "\n";
  return out.str();
}

namespace {

json user_with_seed(const json& user, std::optional<std::uint64_t> seed) {
  json u = user.is_null() ? json::object() : user;
  if (seed) {
    if (!u.is_object()) throw ConfigError("/", "expected an object");
    u["seed"] = *seed;
  }
  return u;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

json resolved_config(const std::string& name, const json& user_config,
                     std::optional<std::uint64_t> seed_override) {
  const auto& e = find_experiment(name);
  return to_json(parse_config(user_with_seed(user_config, seed_override), e.defaults));
}

ExperimentVerdict run_experiment(const std::string& name, const json& user_config,
                                 const std::filesystem::path& out_dir,
                                 std::optional<std::uint64_t> seed_override, int threads) {
  const auto& e = find_experiment(name);
  const auto config = parse_config(user_with_seed(user_config, seed_override), e.defaults);
  const json canonical = to_json(config);
  if (threads < 1) throw InvalidArgument("threads must be >= 1");

  std::filesystem::create_directories(out_dir);
  RunContext ctx{out_dir, threads};

  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult r = e.run(config, ctx);
  const auto t1 = std::chrono::steady_clock::now();

  ExperimentVerdict v;
  v.experiment = e.name;
  v.metrics = std::move(r.metrics);
  v.passed = !v.metrics.empty() &&
             std::all_of(v.metrics.begin(), v.metrics.end(), [](const auto& m) { return m.second.passed; });
  v.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  v.config_hash = hex64(config_hash(canonical));
  v.seed = config.seed;
  v.threads = threads;
  v.details = std::move(r.details);

  write_json(ctx.path("config.json"), canonical);
  json plots = json::array();
  for (const auto& p : r.plots) plots.push_back(to_json(p));
  write_json(ctx.path("plots.json"), {{"plots", plots}});
  v.artifacts = std::move(r.artifacts);
  v.artifacts.push_back("config.json");
  v.artifacts.push_back("plots.json");
  v.artifacts.push_back("verdict.json");
  write_json(ctx.path("verdict.json"), to_json(v));
  return v;
}

int exit_code(const ExperimentVerdict& v) { return v.passed ? 0 : 1; }

json to_json(const Metric& m) {
  // non-finite values are written as null
  json j = {{"value", std::isfinite(m.value) ? json(m.value) : json(nullptr)}, {"tolerance", m.tolerance}, {"kind", to_string(m.kind)},
            {"passed", m.passed}};
  j["target"] = (m.kind == Metric::Kind::within || m.kind == Metric::Kind::flag) ? json(m.target) : json(nullptr);
  return j;
}

json to_json(const ExperimentVerdict& v) {
  json metrics = json::object();
  for (const auto& [k, m] : v.metrics) metrics[k] = to_json(m);
  return {{"schema", 1},
          {"experiment", v.experiment},
          {"passed", v.passed},
          {"metrics", metrics},
          {"artifacts", v.artifacts},
          {"wall_seconds", v.wall_seconds},
          {"config_hash", v.config_hash},
          {"seed", v.seed},
          {"threads", v.threads},
          {"details", v.details}};
}

json to_json(const PlotSpec& p) {
  json series = json::array();
  for (const auto& s : p.series)
    series.push_back({{"file", s.file}, {"x", s.x}, {"y", s.y}, {"label", s.label}});
  return {{"name", p.name},
          {"title", p.title},
          {"x", {{"label", p.x_label}, {"log", p.log_x}}},
          {"y", {{"label", p.y_label}, {"log", p.log_y}}},
          {"series", series}};
}

}  // namespace zsm::cli
