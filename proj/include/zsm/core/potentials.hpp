#pragma once

#include "zsm/core/field.hpp"

#include <optional>
#include <vector>

namespace zsm {

/// External potentials active from `start_time` until the next frame.
/// Scalar components are stored as energies: the gravitational entry already
/// carries the factor m, the electric entry the factor e.
struct PotentialFrame {
  double start_time = 0.0;
  ScalarField scalar;
  ScalarField gravitational;
  ScalarField electric;
  std::optional<VectorField> vector_potential;
};

/// Piecewise-constant-in-time external potentials on one grid.
class Potentials {
 public:
  /// All-zero static potentials.
  explicit Potentials(const GridPtr& grid);
  /// Static potentials with only the scalar part V.
  explicit Potentials(ScalarField scalar);
  explicit Potentials(std::vector<PotentialFrame> frames);

  const GridPtr& grid_ptr() const { return frames_.front().scalar.grid_ptr(); }
  bool time_dependent() const { return frames_.size() > 1; }
  bool has_vector_potential() const;
  const std::vector<PotentialFrame>& frames() const { return frames_; }

  const PotentialFrame& at(double t) const;
  /// V + m Phi_g + e Phi_e at time t.
  ScalarField total_scalar(double t = 0.0) const;
  /// Curl of A (z-component), if A is present.
  std::optional<ScalarField> magnetic_field(double t = 0.0) const;

  Potentials with_gravitational(const ScalarField& energy) const;
  Potentials with_electric(const ScalarField& energy) const;
  Potentials with_vector_potential(const VectorField& a) const;

 private:
  std::vector<PotentialFrame> frames_;
};

}  // namespace zsm
