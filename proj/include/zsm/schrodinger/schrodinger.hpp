#pragma once

#include "zsm/core/constants.hpp"
#include "zsm/core/field.hpp"
#include "zsm/core/potentials.hpp"
#include "zsm/fields/fields.hpp"

#include <functional>
#include <vector>

namespace zsm {

/// Raised when the nonlinear classical evolution develops a node.
class NodeFormationError : public Error {
 public:
  NodeFormationError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct EvolutionOptions {
  /// Multiply by exp(-i m c^2 t / hbar) each step.
  bool rest_energy = false;
  /// Keep every `stride`-th frame (the initial and final frames are always kept).
  int stride = 1;
  /// Node threshold (relative to max rho) for the nonlinear solver's split check.
  double node_floor = default_node_floor;
  /// Support pieces lighter than this fraction of the norm are tail debris,
  /// not a split of the packet.
  double component_mass_floor = 1e-6;
  /// Called after every step with (time, psi).
  std::function<void(double, const ComplexField&)> observer;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ComplexField> frames;
};

/// Crank-Nicolson evolution of i hbar dpsi/dt = (-hbar^2/2m lap + V_total) psi.
/// Lines and rings use tridiagonal solves; planes use a symmetric split of
/// x and y Cayley steps, which keeps each step exactly unitary. A negative
/// dt runs the evolution backwards.
Trajectory evolve_linear(const ComplexField& psi0, const Potentials& pot, double dt, int steps,
                         const PhysicalConstants& k, const EvolutionOptions& options = {});

/// Evolution with the quantum kinetic term removed: i hbar dpsi/dt =
/// H psi - Q[|psi|] psi, i.e. the classical Hamilton-Jacobi and continuity
/// pair carried in psi = a exp(i theta). The phase is kept as its own
/// array, initialised from arg psi0 and continued outward from the region
/// where a >= 1e-12 max a. Steps are subdivided to hold the phase Courant
/// number at or below one. Aborts when the region rho >= node_floor * max rho
/// splits into more significant pieces than it started with.
Trajectory evolve_nonlinear_classical(const ComplexField& psi0, const Potentials& pot, double dt,
                                      int steps, const PhysicalConstants& k,
                                      const EvolutionOptions& options = {});

/// H psi with the same discrete Laplacian used by the evolution.
ComplexField apply_hamiltonian(const ComplexField& psi, const ScalarField& v_total,
                               const PhysicalConstants& k);

struct EigenstateResult {
  int quantum_number = 0;
  /// Winding used for the centrifugal term (equals quantum_number for
  /// integer sectors).
  double winding = 0.0;
  double energy = 0.0;
  bool rest_energy_included = false;
  ComplexField psi;
  /// max |H psi - E psi| / max |psi| for the discrete operator that produced psi.
  double residual = 0.0;
};

/// e^{i n s / r} / sqrt(2 pi r) on a ring of `count` nodes, E = n^2 hbar^2 / 2 m r^2.
EigenstateResult ring_eigenstate(int n, double radius, int count, const PhysicalConstants& k);

/// All eigenvalues of the discrete ring Hamiltonian, ascending.
Eigen::VectorXd ring_spectrum(double radius, int count, const PhysicalConstants& k);

struct RadialState {
  Eigen::ArrayXd profile;  // R(r_i), normalized so that sum R^2 r dr 2 pi = 1
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Lowest state of -hbar^2/2m (1/r)(r R')' + (hbar^2 w^2 / 2 m r^2 + V) R = E R
/// on the cell-centred radial axis of a polar grid, with R = 0 at the outer
/// radius. `winding` may be any real w >= 0.
RadialState radial_ground_state(const Grid& polar_grid, const Eigen::ArrayXd& v_radial,
                                double winding, const PhysicalConstants& k, double tol = 1e-10);

/// Lowest state of the central potential V (sampled on a polar grid) in the
/// integer winding sector m: psi = R(r) e^{i m phi}.
EigenstateResult central_eigenstate(const ScalarField& v, int winding, const PhysicalConstants& k,
                                    double tol = 1e-10);

/// Ground state of a 1-D potential on a bounded line (psi = 0 beyond the ends).
EigenstateResult line_ground_state(const ScalarField& v, const PhysicalConstants& k, double tol = 1e-10);

/// Radial profile of a polar field along phi = 0; throws if the field is not radial.
Eigen::ArrayXd radial_profile(const ScalarField& f, double tolerance = 1e-12);

}  // namespace zsm
