#pragma once

#include "zsm/core/constants.hpp"
#include "zsm/core/field.hpp"
#include "zsm/core/phase_field.hpp"
#include "zsm/core/potentials.hpp"
#include "zsm/fields/fields.hpp"

#include <json.hpp>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace zsm {

struct ResidualOptions {
  /// Stationary input: d rho/dt = 0 and dS/dt = -energy.
  bool stationary = true;
  std::optional<double> energy;
  /// Time-dependent input (see `frame_derivatives`).
  std::optional<ScalarField> drho_dt;
  std::optional<ScalarField> ds_dt;
  /// Adds m c^2 to the right-hand side of the Hamilton-Jacobi equation; the
  /// supplied energy or dS/dt must then carry the rest energy too.
  bool include_rest_energy = false;
  double time = 0.0;
  double node_floor = default_node_floor;
  /// Nodes this close (in grid steps) to a bounded edge are left out of the
  /// norms. The polar origin is not an edge.
  int edge_margin = 0;
  double continuity_tolerance = 1e-8;
  double hj_tolerance = 1e-8;
};

struct ResidualReport {
  /// d rho/dt + div(v rho).
  ScalarField continuity;
  /// dS/dt + m v^2 / 2 + V_total + Q (+ m c^2).
  ScalarField hamilton_jacobi;
  double continuity_l2 = 0.0;
  double continuity_linf = 0.0;
  double hj_l2 = 0.0;
  double hj_linf = 0.0;
  double continuity_tolerance = 0.0;
  double hj_tolerance = 0.0;
  bool continuity_passed = false;
  bool hj_passed = false;
  bool rest_energy_included = false;
  bool passed() const { return continuity_passed && hj_passed; }
};

ResidualReport hjm_residuals(const ScalarField& rho, const PhaseField& S, const Potentials& pot,
                             const PhysicalConstants& k, const ResidualOptions& options = {});

struct FrameDerivatives {
  ScalarField rho;
  PhaseField phase;
  ScalarField drho_dt;
  ScalarField ds_dt;
};

/// Centred time derivatives at the middle of three frames spaced dt apart.
/// dS/dt comes from the phase of psi(t+dt) / psi(t-dt), so a global phase
/// such as the rest energy is carried along.
FrameDerivatives frame_derivatives(const ComplexField& before, const ComplexField& at,
                                   const ComplexField& after, double dt, const PhysicalConstants& k,
                                   double node_floor = default_node_floor);

enum class WindingClass { integer, non_integer };
std::string to_string(WindingClass c);

/// Extraneous central-potential solution: the m = 1 ground state of
/// V + a / r^2 read as a solution of the Madelung pair with velocity scaled by
/// sqrt(2 m a / hbar^2 + 1).
struct WallstromSolution {
  double a = 0.0;
  double winding = 1.0;
  WindingClass classification = WindingClass::integer;
  double energy = 0.0;
  ScalarField rho;
  /// S_a = hbar phi (paired with V_a) and S'_a = hbar w phi (paired with V).
  PhaseField phase_base;
  PhaseField phase_scaled;
  VectorField velocity_base;
  VectorField velocity_scaled;
  /// max |v'_a - w v_a| over unmasked nodes.
  double velocity_scaling_error = 0.0;
  ResidualReport residual_base;
  ResidualReport residual_scaled;
  bool residuals_passed = false;
};

inline constexpr double integer_window = 1e-9;

/// `v` must be radial on a polar grid. Throws if the radial solve fails.
WallstromSolution wallstrom_extraneous_solution(double a, const ScalarField& v,
                                                const PhysicalConstants& k, double tol = 1e-6);

struct GateReport {
  std::vector<WindingReport> windings;
  std::vector<std::string> notes;
  bool accepted = true;
  std::string verdict() const { return accepted ? "ACCEPT" : "REJECT"; }
};

/// Checks that the circulation of S around every loop is an integer multiple
/// of h within tol * h. Loops are the user's plus automatic ones: the domain
/// cycles (the ring, the polar core, periodic plane lines) and the smallest
/// index rectangle around each masked region.
GateReport quantization_gate(const PhaseField& S, const PhysicalConstants& k,
                             const std::vector<Loop>& loops = {}, double tol = 1e-6);

struct SuperpositionReport {
  double k1 = 0.0;
  double k2 = 0.0;
  /// max over theta of | |psi(theta + 2 pi)|^2 - |psi(theta)|^2 |.
  double max_mismatch = 0.0;
  bool single_valued = false;
  ScalarField density;
};

/// psi = N (c1 e^{i k1 theta} + c2 e^{i k2 theta}) on a ring grid, compared
/// with its continuation one turn further.
SuperpositionReport ring_superposition_check(const GridPtr& ring, double k1, double k2,
                                             std::complex<double> c1 = 1.0,
                                             std::complex<double> c2 = 1.0);

nlohmann::json to_json(const ResidualReport& r);
nlohmann::json to_json(const WallstromSolution& s);
nlohmann::json to_json(const GateReport& r);
nlohmann::json to_json(const SuperpositionReport& r);

}  // namespace zsm
