#include "experiments.hpp"

#include "zsm/core/io.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace zsm::cli {

ComplexField gaussian_packet(const GridPtr& g, double x0, double sigma, double momentum,
                             double hbar) {
  return normalize(sample_complex(g, [&](const Grid& gr, Index n) {
    const double x = gr.coordinate(n, 0);
    return std::polar(std::exp(-(x - x0) * (x - x0) / (4.0 * sigma * sigma)), momentum * x / hbar);
  }));
}

double parameter_or(const ExperimentConfig& c, const std::string& key, double fallback) {
  if (!c.parameters.contains(key)) return fallback;
  return c.parameter(key);
}

void emit_table(ExperimentResult& r, const RunContext& ctx, const std::string& file,
                const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& columns) {
  write_table_csv(ctx.path(file), header, columns);
  r.artifacts.push_back(file);
}

GridPtr config_grid(const ExperimentConfig& c, Topology expected) {
  if (!c.grid || c.grid->topology != expected)
    throw ConfigError("/grid/topology", "this experiment needs a " + to_string(expected) + " grid");
  return build_grid(*c.grid);
}

bool wants_output(const ExperimentConfig& c, const std::string& name) {
  return std::find(c.outputs.begin(), c.outputs.end(), name) != c.outputs.end();
}

}  // namespace zsm::cli
