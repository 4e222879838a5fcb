#pragma once

#include "zsm/core/constants.hpp"
#include "zsm/core/field.hpp"
#include "zsm/core/phase_field.hpp"
#include "zsm/core/potentials.hpp"
#include "zsm/diffusion/diffusion.hpp"

#include <json.hpp>

#include <functional>
#include <vector>

namespace zsm {

/// (rho, S) sampled at increasing times on one grid.
struct StateHistory {
  std::vector<double> times;
  std::vector<ScalarField> rho;
  std::vector<PhaseField> phase;

  std::size_t size() const { return times.size(); }
};

StateHistory history_from_frames(const std::vector<double>& times, const std::vector<ComplexField>& psi,
                                 const PhysicalConstants& k);
/// A stationary state held for `duration` with `steps` equal intervals.
StateHistory stationary_history(const ScalarField& rho, const PhaseField& S, double duration, int steps);

struct ActionOptions {
  /// Adds mc^2 (t_f - t_i) per unit mass of the ensemble.
  bool include_rest_energy = false;
  double node_floor = 1e-9;
};

struct ActionEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  double current_kinetic = 0.0;
  double osmotic_kinetic = 0.0;
  /// Integral of rho V_total (enters the value with a minus sign).
  double potential = 0.0;
  /// Integral of rho q A.v.
  double magnetic = 0.0;
  double rest_energy = 0.0;
  /// Same integral with the b.b* kinetic energy m (v^2 - u^2) / 2, for comparison.
  double alternative = 0.0;
  double duration = 0.0;
  Index samples = 0;
};

/// J = int dt int rho (m v^2/2 + m u^2/2 - V + q A.v) by grid quadrature and
/// the trapezoid rule in time.
ActionEstimate discrete_action(const StateHistory& history, const Potentials& pot,
                               const PhysicalConstants& k, const ActionOptions& options = {});

/// Monte Carlo estimate: the mean over particles of the trapezoid integral of
/// m (b^2 + b*^2)/4 - V + q A.v along each path, with b, b* from the history at
/// the particle. Frame times must equal the history times. Particles removed
/// at any point are dropped.
ActionEstimate discrete_action(const TrajectoryBundle& paths, const StateHistory& history,
                               const Potentials& pot, const PhysicalConstants& k,
                               const ActionOptions& options = {});

/// Displacement field eta(x, t); it must vanish at the first and last time.
using Perturbation = std::function<double(double x, double t)>;

/// sin(pi (t - t_i)/T) sin(2 pi mode (x - x0)/L).
Perturbation sinusoidal_perturbation(double t_i, double t_f, double x0, double length, int mode = 1);
/// sin(pi (t - t_i)/T) exp(-(x - center)^2 / 2 width^2).
Perturbation bump_perturbation(double t_i, double t_f, double center, double width);

struct StationarityOptions {
  /// Non-physical control hook: the base flow follows this multiple of v.
  double velocity_scale = 1.0;
  bool include_rest_energy = false;
  double node_floor = 1e-9;
};

struct StationarityReport {
  std::vector<double> epsilons;
  std::vector<double> delta_j;
  double base_action = 0.0;
  /// dJ = eps J1 + eps^2 J2.
  double first_order = 0.0;
  double second_order = 0.0;
  /// Least-squares slope of log |dJ| against log eps.
  double fit_power = 0.0;
};

/// First-variation test on 1-D grids. Each sample path is displaced by
/// eps eta(q, t) while expectations stay with the unperturbed density, so the
/// mean derivatives shift by D eta = (d_t + b d_x + nu d_xx) eta and
/// D* eta = (d_t + b* d_x - nu d_xx) eta. The potential is expanded to second
/// order in the displacement, which makes dJ exactly quadratic in eps.
StationarityReport stationarity_test(const StateHistory& history, const Potentials& pot,
                                     const PhysicalConstants& k, const Perturbation& eta,
                                     const std::vector<double>& epsilons,
                                     const StationarityOptions& options = {});

nlohmann::json to_json(const ActionEstimate& a);
nlohmann::json to_json(const StationarityReport& r);

}  // namespace zsm
