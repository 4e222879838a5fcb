#pragma once

#include "zsm/core/constants.hpp"
#include "zsm/core/field.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>

namespace zsm {

/// A possibly multi-valued action S on a grid.
///
/// Stores principal values in [0, h) per node and the increment of S along
/// every grid edge. Circulations are sums of edge increments, so the
/// multi-valuedness of S is kept exactly: around every plaquette the
/// circulation is an integer multiple of h (recorded in `plaquette_winding`),
/// while loops around holes of the domain (the ring itself, the polar core)
/// may carry any value.
class PhaseField {
 public:
  /// Action function on lifted coordinates: on periodic axes the coordinate of
  /// a node's +neighbour across the seam is `x + spacing`, not wrapped.
  /// Arguments are the native coordinates (x), (s), (x, y) or (r, phi).
  using LiftedAction = std::function<double(double, double)>;

  /// Builds the field from an action function. Throws if some plaquette
  /// circulation is not an integer multiple of h (a singularity inside a
  /// plaquette cannot be represented by a lift).
  static PhaseField from_function(const GridPtr& grid, const LiftedAction& action,
                                  const PhysicalConstants& k, Mask mask = Mask());

  /// Builds the field from per-node principal values and per-edge increments
  /// (`increments(node, a)` is S(neighbor(node, a, +1)) - S(node)). Invalid
  /// edges are marked false in `edge_valid`.
  PhaseField(GridPtr grid, Eigen::ArrayXd principal, Eigen::ArrayXXd increments,
             Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> edge_valid, Mask mask,
             double action_quantum);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  double action_quantum() const { return h_; }
  const Eigen::ArrayXd& principal() const { return principal_; }
  const Eigen::ArrayXXd& increments() const { return increments_; }
  const Mask& mask() const { return mask_; }
  bool edge_valid(Index node, int a) const { return edge_valid_(node, a); }

  /// Increment of S along a directed edge; empty if the edge is invalid.
  std::optional<double> increment(const Edge& edge) const;

  /// Integer winding per plaquette (zero where the plaquette is invalid).
  const Eigen::ArrayXi& plaquette_winding() const { return plaquette_winding_; }
  const Eigen::Array<bool, Eigen::Dynamic, 1>& plaquette_valid() const { return plaquette_valid_; }
  /// Circulation / h around the polar core (the innermost ring), if defined.
  std::optional<double> core_circulation() const;

  /// S reconstructed along a breadth-first spanning tree from the largest
  /// connected region's reference node; per-region references otherwise.
  const Eigen::ArrayXd& unwrapped() const { return unwrapped_; }
  /// Connected-region label per node (-1 for masked nodes).
  const Eigen::ArrayXi& region() const { return region_; }
  int region_count() const { return region_count_; }

  /// Derivative of S along axis `a` in grid coordinates at every node, from
  /// edge increments (central where both edges exist, one-sided otherwise).
  Eigen::ArrayXd axis_derivative(int a, Mask* touched = nullptr) const;

  /// Returns a copy with S shifted by a constant (principal values wrapped).
  PhaseField shifted(double constant) const;

 private:
  void build_topology();

  GridPtr grid_;
  Eigen::ArrayXd principal_;
  Eigen::ArrayXXd increments_;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> edge_valid_;
  Mask mask_;
  double h_;
  Eigen::ArrayXi plaquette_winding_;
  Eigen::Array<bool, Eigen::Dynamic, 1> plaquette_valid_;
  Eigen::ArrayXd unwrapped_;
  Eigen::ArrayXi region_;
  int region_count_ = 0;
};

/// Wraps x into (-h/2, h/2].
double wrap_symmetric(double x, double h);
/// Wraps x into [0, h).
double wrap_positive(double x, double h);

}  // namespace zsm
