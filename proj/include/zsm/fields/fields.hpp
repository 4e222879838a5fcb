#pragma once

#include "zsm/core/constants.hpp"
#include "zsm/core/field.hpp"
#include "zsm/core/phase_field.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace zsm {

inline constexpr double default_node_floor = 1e-9;

/// Current, osmotic and the two drift velocities of one state. `forward` and
/// `backward` are built as `current + osmotic` and `current - osmotic`.
struct KinematicFields {
  VectorField current;
  VectorField osmotic;
  VectorField forward;
  VectorField backward;
};

struct PolarDecomposition {
  ScalarField rho;
  PhaseField phase;
  /// True when the node mask splits the grid into several regions; each
  /// region is then unwrapped from its own reference node.
  bool disconnected = false;
};

/// Nodes with rho < floor * max(rho).
Mask node_mask(const ScalarField& rho, double node_floor = default_node_floor);

/// psi = sqrt(rho) exp(i S / hbar). Edge increments of S are the wrapped
/// phase differences; windings land on plaquettes around phase singularities.
PolarDecomposition polar_decompose(const ComplexField& psi, const PhysicalConstants& k,
                                   double node_floor = default_node_floor);
ComplexField recompose(const ScalarField& rho, const PhaseField& S, const PhysicalConstants& k);

/// Minimal-coupling factor multiplying A in p - q A: e / c (Gaussian units,
/// natural) or e (SI).
double vector_coupling(const PhysicalConstants& k);

/// v = (grad S - q A) / m.
VectorField current_velocity(const PhaseField& S, const PhysicalConstants& k,
                             const VectorField* a_ext = nullptr);
/// u = (hbar / 2m) grad rho / rho with the grid gradient of rho itself, so
/// u rho equals nu grad rho node by node.
VectorField osmotic_velocity(const ScalarField& rho, const PhysicalConstants& k,
                             double node_floor = default_node_floor);
KinematicFields kinematic_fields(const ScalarField& rho, const PhaseField& S,
                                 const PhysicalConstants& k, const VectorField* a_ext = nullptr,
                                 double node_floor = default_node_floor);
/// -(hbar^2 / 2m) lap(sqrt rho) / sqrt rho.
ScalarField quantum_kinetic(const ScalarField& rho, const PhysicalConstants& k,
                            double node_floor = default_node_floor);

struct WindingReport {
  std::string loop;
  /// Sum of the edge increments of S around the loop (action units).
  double circulation = 0.0;
  long winding = 0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool accepted = false;
  /// q * enclosed flux of A (action units); zero without A.
  double flux_correction = 0.0;
  /// Circulation of m v, i.e. circulation - flux_correction.
  double kinetic_circulation = 0.0;
};

/// Circulation of S around a closed loop of neighbouring, unmasked nodes.
/// `tolerance` is in action units.
WindingReport circulation(const PhaseField& S, const Loop& loop, const PhysicalConstants& k,
                          double tolerance, const VectorField* a_ext = nullptr);

nlohmann::json to_json(const WindingReport& report);

}  // namespace zsm
