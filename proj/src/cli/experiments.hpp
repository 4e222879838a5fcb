#pragma once

#include "zsm/cli/experiment.hpp"
#include "zsm/core/field.hpp"

#include <string>
#include <vector>

namespace zsm::cli {

Experiment make_ring_spectrum();
Experiment make_superposition_singlevalue();
Experiment make_wallstrom_gate();
Experiment make_central_zsm_resolution();
Experiment make_equivariance_free_gaussian();
Experiment make_stationary_node_avoidance();
Experiment make_mean_acceleration_residual();
Experiment make_fp_vs_ensemble();
Experiment make_nonlinear_classical_gaussian();
Experiment make_bohr_table();
Experiment make_frequency_shifts();
Experiment make_variational_stationarity();

// shared helpers

/// Normalised Gaussian packet exp(-(x - x0)^2 / 4 s^2 + i p x / hbar) on a 1-D grid.
ComplexField gaussian_packet(const GridPtr& g, double x0, double sigma, double momentum,
                             double hbar);
/// Parameter with a fallback when the key is absent.
double parameter_or(const ExperimentConfig& c, const std::string& key, double fallback);
/// Writes a column table and registers it as an artifact.
void emit_table(ExperimentResult& r, const RunContext& ctx, const std::string& file,
                const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& columns);
/// The grid from the config; throws ConfigError when it has the wrong topology.
GridPtr config_grid(const ExperimentConfig& c, Topology expected);
bool wants_output(const ExperimentConfig& c, const std::string& name);

}  // namespace zsm::cli
