#pragma once

#include "zsm/core/config.hpp"
#include "zsm/core/error.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zsm::cli {

/// One named check. `at_most`: value <= tolerance; `at_least`: value >=
/// tolerance; `within`: |value - target| <= tolerance; `flag`: a boolean
/// claim stored as 1 / 0 against target 1.
struct Metric {
  enum class Kind { at_most, at_least, within, flag };

  double value = 0.0;
  double tolerance = 0.0;
  Kind kind = Kind::at_most;
  double target = 0.0;
  bool passed = false;
};

Metric at_most(double value, double bound);
Metric at_least(double value, double bound);
Metric within(double value, double target, double tolerance);
/// Relative band: |value - target| <= rel |target|.
Metric within_relative(double value, double target, double rel);
Metric flag(bool ok);

std::string to_string(Metric::Kind kind);

/// Declarative plot description written next to the CSV files.
struct PlotSeries {
  std::string file;
  std::string x;
  std::string y;
  std::string label;
};

struct PlotSpec {
  std::string name;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

struct RunContext {
  std::filesystem::path out_dir;
  int threads = 1;

  /// Absolute path of an artifact inside the output directory.
  std::string path(const std::string& file) const { return (out_dir / file).string(); }
};

struct ExperimentResult {
  std::map<std::string, Metric> metrics;
  /// File names relative to the output directory.
  std::vector<std::string> artifacts;
  std::vector<PlotSpec> plots;
  /// Extra scalar data that is reported but not judged.
  nlohmann::json details = nlohmann::json::object();
};

struct Experiment {
  std::string name;
  std::string summary;
  /// The claim being reproduced, in words.
  std::string anchor;
  nlohmann::json defaults;
  std::function<ExperimentResult(const ExperimentConfig&, const RunContext&)> run;
};

struct ExperimentVerdict {
  std::string experiment;
  bool passed = false;
  std::map<std::string, Metric> metrics;
  std::vector<std::string> artifacts;
  double wall_seconds = 0.0;
  std::string config_hash;
  std::uint64_t seed = 0;
  int threads = 1;
  nlohmann::json details = nlohmann::json::object();
};

class UnknownExperiment : public Error {
 public:
  explicit UnknownExperiment(const std::string& name)
      : Error("unknown experiment: " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

const std::vector<Experiment>& registry();
/// Throws UnknownExperiment.
const Experiment& find_experiment(const std::string& name);
std::vector<std::string> experiment_names();

/// Multi-line description: summary, reproduced claim and default config.
std::string describe(const Experiment& e);

/// Validates `user_config` against the experiment defaults (ConfigError on
/// failure), runs the pipeline and writes every artifact plus `config.json`,
/// `plots.json` and `verdict.json` into `out_dir`.
ExperimentVerdict run_experiment(const std::string& name, const nlohmann::json& user_config,
                                 const std::filesystem::path& out_dir,
                                 std::optional<std::uint64_t> seed_override = std::nullopt,
                                 int threads = 1);

/// The resolved configuration an experiment would run with.
nlohmann::json resolved_config(const std::string& name, const nlohmann::json& user_config,
                               std::optional<std::uint64_t> seed_override = std::nullopt);

/// 0 pass, 1 fail.
int exit_code(const ExperimentVerdict& v);

nlohmann::json to_json(const Metric& m);
nlohmann::json to_json(const ExperimentVerdict& v);
nlohmann::json to_json(const PlotSpec& p);

}  // namespace zsm::cli
