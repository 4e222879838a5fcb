#pragma once

#include <Eigen/Core>

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace zsm {

using Index = Eigen::Index;

enum class Topology { line, ring, plane, polar };
enum class Boundary { periodic, reflecting, absorbing };

std::string to_string(Topology topology);
std::string to_string(Boundary boundary);
Topology topology_from_string(const std::string& name);
Boundary boundary_from_string(const std::string& name);

/// One uniform axis. Node k sits at `origin + (k + offset) * spacing` where
/// offset is 0.5 for cell-centred axes (the polar radius) and 0 otherwise.
struct Axis {
  double origin = 0.0;
  double spacing = 1.0;
  int count = 0;
  Boundary boundary = Boundary::reflecting;
  bool cell_centered = false;

  double coordinate(int k) const {
    return origin + (static_cast<double>(k) + (cell_centered ? 0.5 : 0.0)) * spacing;
  }
  bool periodic() const { return boundary == Boundary::periodic; }
  /// Period length on periodic axes, node span otherwise.
  double length() const;

  bool operator==(const Axis&) const = default;
};

/// Directed grid edge: `node` -> its neighbour in `+axis` direction when
/// `sign` is +1, or the reverse traversal of that edge when `sign` is -1.
struct Edge {
  Index node;
  int axis;
  int sign;
};

/// Uniform grid over a line, ring, Cartesian plane or polar disk.
///
/// Node index is `i + n0 * j` (axis 0 fastest), so a 2-D field maps onto an
/// `n0 x n1` column-major Eigen array. Ring nodes are indexed by arc length
/// s in [0, 2 pi r); polar nodes by (r, phi) with r cell-centred on (0, R).
class Grid {
 public:
  static std::shared_ptr<const Grid> line(double x_min, double x_max, int count,
                                          Boundary boundary);
  static std::shared_ptr<const Grid> ring(double radius, int count);
  static std::shared_ptr<const Grid> plane(const Axis& x, const Axis& y);
  /// Bounded plane axis spanning [lo, hi] with `count` nodes, or periodic of
  /// period hi - lo.
  static Axis plane_axis(double lo, double hi, int count, Boundary boundary);
  static std::shared_ptr<const Grid> polar(double radius, int radial_count, int angular_count,
                                           Boundary outer = Boundary::absorbing);

  Topology topology() const { return topology_; }
  int dim() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
  int count(int a) const { return a < dim() ? axis(a).count : 1; }
  Index size() const;
  /// Ring radius (ring topology) or outer radius (polar).
  double radius() const { return radius_; }

  Index index(int i, int j = 0) const { return i + static_cast<Index>(count(0)) * j; }
  std::array<int, 2> coords(Index node) const;
  double coordinate(Index node, int a) const;
  /// Position in the embedding plane: (x, 0) on a line, (s, 0) on a ring,
  /// (x, y) on a plane and on the polar disk.
  Eigen::Vector2d cartesian(Index node) const;

  /// Neighbour in direction `dir` (+1 / -1) along `a`; empty past a bounded end.
  std::optional<Index> neighbor(Index node, int a, int dir) const;
  /// Edge linking two neighbouring nodes, traversed from `from` to `to`.
  std::optional<Edge> edge_between(Index from, Index to) const;

  /// Quadrature weights: trapezoid on bounded node-inclusive axes, rectangle
  /// rule on periodic axes, midpoint r dr dphi on the polar disk.
  const Eigen::ArrayXd& weights() const { return weights_; }
  /// Physical length of a unit step along `a` at `node` (r dphi on polar angle).
  double metric_step(Index node, int a) const;

  /// Number of plaquettes addressed by the lower-left node index.
  Index plaquette_count() const { return dim() == 2 ? size() : 0; }
  /// Corners in counter-clockwise order, empty if the plaquette leaves the grid.
  std::optional<std::array<Index, 4>> plaquette(Index lower_left) const;

  bool operator==(const Grid& other) const;

 private:
  Grid(Topology topology, std::vector<Axis> axes, double radius);
  void build_weights();

  Topology topology_;
  std::vector<Axis> axes_;
  double radius_ = 0.0;
  Eigen::ArrayXd weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

bool same_grid(const GridPtr& a, const GridPtr& b);

/// Closed loop of neighbouring nodes; the last node links back to the first.
struct Loop {
  std::vector<Index> nodes;
  std::string label;
};

Loop ring_loop(const Grid& grid);
/// Counter-clockwise boundary of the node rectangle [i0, i1] x [j0, j1].
Loop rectangle_loop(const Grid& grid, int i0, int j0, int i1, int j1);
/// Counter-clockwise circle through all nodes of radial index `ir` on a polar grid.
Loop polar_circle_loop(const Grid& grid, int ir);
/// Straight loop through a periodic axis of a plane at fixed other index.
Loop periodic_line_loop(const Grid& grid, int a, int fixed);
Loop reversed(const Loop& loop);
Loop rotated(const Loop& loop, std::size_t shift);

}  // namespace zsm
