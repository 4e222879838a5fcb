#pragma once

#include "zsm/core/constants.hpp"
#include "zsm/core/field.hpp"
#include "zsm/core/phase_field.hpp"
#include "zsm/core/potentials.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <string>
#include <vector>

namespace zsm {

/// A sampled classical path in the plane with the external potentials seen
/// along it. Potential entries are energies (m Phi_g, e Phi_e + V); empty
/// vectors mean zero. Velocities are taken from the positions by second-order
/// differences in time when not supplied.
struct ClassicalPath {
  std::vector<double> times;
  std::vector<Eigen::Vector2d> positions;
  std::vector<Eigen::Vector2d> velocities;
  std::vector<double> gravitational;
  std::vector<double> electric;
  std::vector<Eigen::Vector2d> vector_potential;

  std::size_t size() const { return positions.size(); }
};

/// Fills the potential series of `path` by interpolating `pot` (Cartesian
/// positions, frame active at each sample time). V is added to the electric
/// series.
ClassicalPath sample_potentials(ClassicalPath path, const Potentials& pot);

struct ZbwPhaseRecord {
  std::vector<double> times;
  /// theta(t) in radians, starting at the initial phase.
  std::vector<double> theta;
  /// S(t) = -hbar theta(t).
  std::vector<double> action;
  /// Running integral of the matching Lagrangian, starting at S(0).
  std::vector<double> lagrangian_action;
  std::vector<double> gamma;
  std::vector<double> energy;
  std::vector<Eigen::Vector2d> momentum;
  double initial_phase = 0.0;
  bool relativistic = false;
};

/// Trapezoidal accumulation of (E dt - p'.dq) / hbar. Relativistic:
/// E = gamma (mc^2 + m Phi_g) + e Phi_e, p' = gamma m v + q A. Otherwise
/// E = mc^2 + m v^2 / 2 + m Phi_g + e Phi_e, p' = m v + q A. The start value
/// is S(0) = p'(0).q(0) - E(0) t(0) - hbar phi, so a free path reproduces
/// S = p.q - E t - hbar phi.
ZbwPhaseRecord phase_accumulate(const ClassicalPath& path, const PhysicalConstants& k,
                                bool relativistic, double initial_phase = 0.0);

enum class LoopKind { fixed_time, spacetime };

struct LoopPhaseReport {
  /// Closed integral of dS (action units).
  double action = 0.0;
  /// action / hbar.
  double phase = 0.0;
  long winding = 0;
  /// phase - 2 pi n.
  double residual = 0.0;
  double tolerance = 0.0;
  bool quantized = false;
};

/// Closed integral of p'.dq (fixed time) or p'.dq - E dt (space-time) along a
/// closed path. Endpoints must agree within closure_tol times the path scale;
/// space-time loops must also return to the starting time. `tol` is in units
/// of 2 pi.
LoopPhaseReport loop_phase(const ClassicalPath& loop, const PhysicalConstants& k, LoopKind kind,
                           bool relativistic = false, double tol = 1e-6, double closure_tol = 1e-9);

struct FrequencyShift {
  double omega_c = 0.0;
  double kappa = 0.0;
  double epsilon = 0.0;
  /// |q| over the reduced Compton wavelength; the point-like picture needs it large.
  double point_like_ratio = 0.0;
};

/// phi_g is per unit mass (g.q), phi_e an electric potential (E.q).
FrequencyShift frequency_shift(double phi_g, double phi_e, double displacement,
                               const PhysicalConstants& k);

struct ClassicalHjOptions {
  bool relativistic = false;
  /// Non-relativistic form only; the relativistic root always carries mc^2.
  bool include_rest_energy = false;
  double time = 0.0;
  /// Nodes entering the norms; all unmasked nodes when empty.
  std::vector<Index> nodes;
};

struct ClassicalHjReport {
  ScalarField residual;
  double l2 = 0.0;
  double linf = 0.0;
  /// Nodes where the supplied energy implies |v| >= c.
  std::vector<Index> superluminal;
};

/// dS/dt + H(grad S - q A, q). Non-relativistic H = P^2/2m + V_total (+ mc^2),
/// relativistic H = sqrt(m^2c^4 + P^2c^2) + gamma m Phi_g + e Phi_e + V.
ClassicalHjReport classical_hj_residual(const PhaseField& S, const ScalarField& ds_dt,
                                        const Potentials& pot, const PhysicalConstants& k,
                                        const ClassicalHjOptions& options = {});

/// Dispersion check along a record: E_i - H(p_i, q_i) per sample.
ClassicalHjReport classical_hj_residual(const ZbwPhaseRecord& record, const ClassicalPath& path,
                                        const PhysicalConstants& k);

struct BohrOrbit {
  int n = 1;
  double radius = 0.0;
  double energy = 0.0;
  double energy_ev = 0.0;
  double speed = 0.0;
  double angular_momentum = 0.0;
};

/// Circular Coulomb orbit with L = n hbar. SI constants only.
BohrOrbit bohr_orbit(int n, const PhysicalConstants& k);

/// Closed-form samples of one revolution (plus the closing sample) of a Bohr
/// orbit, with the Coulomb energy in the electric series.
ClassicalPath bohr_orbit_path(const BohrOrbit& orbit, const PhysicalConstants& k,
                              int samples = 16384);

/// CSV with columns n, r_n, E_n_eV, L_over_hbar.
void write_bohr_table(const std::string& path, int n_max, const PhysicalConstants& k);

nlohmann::json to_json(const LoopPhaseReport& r);
nlohmann::json to_json(const FrequencyShift& f);
nlohmann::json to_json(const BohrOrbit& b);

}  // namespace zsm
