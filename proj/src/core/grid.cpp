#include "zsm/core/grid.hpp"

#include "zsm/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace zsm {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void check_axis(const Axis& axis, const char* what) {
  if (axis.count < 8) throw InvalidArgument(std::string(what) + ": node count must be >= 8");
  if (!(axis.spacing > 0.0) || !std::isfinite(axis.spacing))
    throw InvalidArgument(std::string(what) + ": spacing must be strictly positive");
}

int wrap_index(int k, int n) {
  k %= n;
  return k < 0 ? k + n : k;
}

}  // namespace

std::string to_string(Topology topology) {
  switch (topology) {
    case Topology::line: return "line";
    case Topology::ring: return "ring";
    case Topology::plane: return "plane";
    case Topology::polar: return "polar";
  }
  return "?";
}

std::string to_string(Boundary boundary) {
  switch (boundary) {
    case Boundary::periodic: return "periodic";
    case Boundary::reflecting: return "reflecting";
    case Boundary::absorbing: return "absorbing";
  }
  return "?";
}

Topology topology_from_string(const std::string& name) {
  if (name == "line") return Topology::line;
  if (name == "ring") return Topology::ring;
  if (name == "plane") return Topology::plane;
  if (name == "polar") return Topology::polar;
  throw InvalidArgument("unknown topology '" + name + "'");
}

Boundary boundary_from_string(const std::string& name) {
  if (name == "periodic") return Boundary::periodic;
  if (name == "reflecting") return Boundary::reflecting;
  if (name == "absorbing") return Boundary::absorbing;
  throw InvalidArgument("unknown boundary '" + name + "'");
}

double Axis::length() const {
  if (periodic() || cell_centered) return count * spacing;
  return (count - 1) * spacing;
}

Grid::Grid(Topology topology, std::vector<Axis> axes, double radius)
    : topology_(topology), axes_(std::move(axes)), radius_(radius) {
  build_weights();
}

GridPtr Grid::line(double x_min, double x_max, int count, Boundary boundary) {
  if (!(x_max > x_min)) throw InvalidArgument("line: x_max must exceed x_min");
  Axis a;
  a.origin = x_min;
  a.count = count;
  a.boundary = boundary;
  a.spacing = boundary == Boundary::periodic ? (x_max - x_min) / count
                                             : (x_max - x_min) / (count - 1);
  check_axis(a, "line");
  return GridPtr(new Grid(Topology::line, {a}, 0.0));
}

GridPtr Grid::ring(double radius, int count) {
  if (!(radius > 0.0)) throw InvalidArgument("ring: radius must be strictly positive");
  Axis a;
  a.count = count;
  a.boundary = Boundary::periodic;
  a.spacing = two_pi * radius / count;
  check_axis(a, "ring");
  return GridPtr(new Grid(Topology::ring, {a}, radius));
}

Axis Grid::plane_axis(double lo, double hi, int count, Boundary boundary) {
  if (!(hi > lo)) throw InvalidArgument("plane axis: hi must exceed lo");
  Axis a;
  a.origin = lo;
  a.count = count;
  a.boundary = boundary;
  a.spacing = boundary == Boundary::periodic ? (hi - lo) / count : (hi - lo) / (count - 1);
  return a;
}

GridPtr Grid::plane(const Axis& x, const Axis& y) {
  check_axis(x, "plane x");
  check_axis(y, "plane y");
  if (x.cell_centered || y.cell_centered) throw InvalidArgument("plane: axes are node-inclusive");
  return GridPtr(new Grid(Topology::plane, {x, y}, 0.0));
}

GridPtr Grid::polar(double radius, int radial_count, int angular_count, Boundary outer) {
  if (!(radius > 0.0)) throw InvalidArgument("polar: radius must be strictly positive");
  if (outer == Boundary::periodic) throw InvalidArgument("polar: outer boundary cannot be periodic");
  if (angular_count % 2 != 0) throw InvalidArgument("polar: angular count must be even");
  Axis r;
  r.count = radial_count;
  r.spacing = radius / radial_count;
  r.boundary = outer;
  r.cell_centered = true;
  Axis phi;
  phi.count = angular_count;
  phi.spacing = two_pi / angular_count;
  phi.boundary = Boundary::periodic;
  check_axis(r, "polar r");
  check_axis(phi, "polar phi");
  return GridPtr(new Grid(Topology::polar, {r, phi}, radius));
}

Index Grid::size() const {
  Index n = 1;
  for (const auto& a : axes_) n *= a.count;
  return n;
}

std::array<int, 2> Grid::coords(Index node) const {
  const int n0 = count(0);
  return {static_cast<int>(node % n0), static_cast<int>(node / n0)};
}

double Grid::coordinate(Index node, int a) const {
  const auto c = coords(node);
  return axis(a).coordinate(c[static_cast<std::size_t>(a)]);
}

Eigen::Vector2d Grid::cartesian(Index node) const {
  if (topology_ == Topology::polar) {
    const double r = coordinate(node, 0);
    const double phi = coordinate(node, 1);
    return {r * std::cos(phi), r * std::sin(phi)};
  }
  if (dim() == 1) return {coordinate(node, 0), 0.0};
  return {coordinate(node, 0), coordinate(node, 1)};
}

std::optional<Index> Grid::neighbor(Index node, int a, int dir) const {
  auto c = coords(node);
  const Axis& ax = axis(a);
  int k = c[static_cast<std::size_t>(a)] + dir;
  if (ax.periodic()) {
    k = wrap_index(k, ax.count);
  } else if (k < 0 || k >= ax.count) {
    return std::nullopt;
  }
  c[static_cast<std::size_t>(a)] = k;
  return index(c[0], c[1]);
}

std::optional<Edge> Grid::edge_between(Index from, Index to) const {
  for (int a = 0; a < dim(); ++a) {
    if (neighbor(from, a, +1) == to) return Edge{from, a, +1};
    if (neighbor(from, a, -1) == to) return Edge{to, a, -1};
  }
  return std::nullopt;
}

void Grid::build_weights() {
  weights_.resize(size());
  auto axis_weight = [](const Axis& ax, int k) {
    if (ax.periodic() || ax.cell_centered) return ax.spacing;
    return (k == 0 || k == ax.count - 1) ? 0.5 * ax.spacing : ax.spacing;
  };
  for (Index n = 0; n < size(); ++n) {
    const auto c = coords(n);
    double w = axis_weight(axes_[0], c[0]);
    if (dim() == 2) w *= axis_weight(axes_[1], c[1]);
    if (topology_ == Topology::polar) w *= axes_[0].coordinate(c[0]);
    weights_(n) = w;
  }
}

double Grid::metric_step(Index node, int a) const {
  if (topology_ == Topology::polar && a == 1) return coordinate(node, 0) * axis(1).spacing;
  return axis(a).spacing;
}

std::optional<std::array<Index, 4>> Grid::plaquette(Index lower_left) const {
  if (dim() != 2) return std::nullopt;
  const auto right = neighbor(lower_left, 0, +1);
  const auto up = neighbor(lower_left, 1, +1);
  if (!right || !up) return std::nullopt;
  const auto diag = neighbor(*right, 1, +1);
  return std::array<Index, 4>{lower_left, *right, *diag, *up};
}

bool Grid::operator==(const Grid& other) const {
  return topology_ == other.topology_ && axes_ == other.axes_ && radius_ == other.radius_;
}

bool same_grid(const GridPtr& a, const GridPtr& b) { return a == b || (a && b && *a == *b); }

Loop ring_loop(const Grid& grid) {
  if (grid.dim() != 1 || !grid.axis(0).periodic())
    throw InvalidArgument("ring_loop: grid is not a periodic 1-D grid");
  Loop loop{{}, "ring"};
  for (int i = 0; i < grid.count(0); ++i) loop.nodes.push_back(i);
  return loop;
}

Loop rectangle_loop(const Grid& grid, int i0, int j0, int i1, int j1) {
  if (grid.dim() != 2) throw InvalidArgument("rectangle_loop: needs a 2-D grid");
  if (i1 <= i0 || j1 <= j0) throw InvalidArgument("rectangle_loop: empty rectangle");
  auto wrap = [&](int k, int a) {
    const Axis& ax = grid.axis(a);
    if (ax.periodic()) return wrap_index(k, ax.count);
    if (k < 0 || k >= ax.count) throw InvalidArgument("rectangle_loop: rectangle leaves the grid");
    return k;
  };
  Loop loop;
  loop.label = "rect[" + std::to_string(i0) + ":" + std::to_string(i1) + "," + std::to_string(j0) +
               ":" + std::to_string(j1) + "]";
  for (int i = i0; i < i1; ++i) loop.nodes.push_back(grid.index(wrap(i, 0), wrap(j0, 1)));
  for (int j = j0; j < j1; ++j) loop.nodes.push_back(grid.index(wrap(i1, 0), wrap(j, 1)));
  for (int i = i1; i > i0; --i) loop.nodes.push_back(grid.index(wrap(i, 0), wrap(j1, 1)));
  for (int j = j1; j > j0; --j) loop.nodes.push_back(grid.index(wrap(i0, 0), wrap(j, 1)));
  return loop;
}

Loop polar_circle_loop(const Grid& grid, int ir) {
  if (grid.topology() != Topology::polar) throw InvalidArgument("polar_circle_loop: not a polar grid");
  if (ir < 0 || ir >= grid.count(0)) throw InvalidArgument("polar_circle_loop: radial index out of range");
  Loop loop{{}, "circle r=" + std::to_string(grid.axis(0).coordinate(ir))};
  for (int j = 0; j < grid.count(1); ++j) loop.nodes.push_back(grid.index(ir, j));
  return loop;
}

Loop periodic_line_loop(const Grid& grid, int a, int fixed) {
  if (grid.dim() != 2 || !grid.axis(a).periodic())
    throw InvalidArgument("periodic_line_loop: axis is not periodic");
  Loop loop{{}, "line axis " + std::to_string(a) + " at " + std::to_string(fixed)};
  for (int k = 0; k < grid.count(a); ++k)
    loop.nodes.push_back(a == 0 ? grid.index(k, fixed) : grid.index(fixed, k));
  return loop;
}

Loop reversed(const Loop& loop) {
  Loop out{{loop.nodes.rbegin(), loop.nodes.rend()}, loop.label + " (reversed)"};
  return out;
}

Loop rotated(const Loop& loop, std::size_t shift) {
  Loop out{loop.nodes, loop.label};
  if (!out.nodes.empty())
    std::rotate(out.nodes.begin(), out.nodes.begin() + static_cast<long>(shift % out.nodes.size()),
                out.nodes.end());
  return out;
}

}  // namespace zsm
