#include "zsm/core/operators.hpp"

#include <cmath>
#include <deque>
#include <numbers>

namespace zsm {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

/// Access to f along one axis through a node, including the polar ghost ring.
struct AxisLine {
  const Grid& grid;
  const Eigen::ArrayXd& f;
  int a;
  double parity;
  const Mask* mask;

  /// Value at `offset` steps from `node`; false if past a bounded end.
  bool at(Index node, int offset, double& value, bool& hit_mask) const {
    auto c = grid.coords(node);
    const Axis& ax = grid.axis(a);
    int k = c[static_cast<std::size_t>(a)] + offset;
    double sign = 1.0;
    if (ax.periodic()) {
      k %= ax.count;
      if (k < 0) k += ax.count;
    } else if (k < 0 && grid.topology() == Topology::polar && a == 0) {
      k = -k - 1;
      c[1] = (c[1] + grid.count(1) / 2) % grid.count(1);
      sign = parity;
    } else if (k < 0 || k >= ax.count) {
      return false;
    }
    c[static_cast<std::size_t>(a)] = k;
    const Index m = grid.index(c[0], c[1]);
    value = sign * f(m);
    if (mask && (*mask)(m)) hit_mask = true;
    return true;
  }
};

Eigen::ArrayXd apply_axis(const Grid& grid, const Eigen::ArrayXd& f, int a, Parity parity,
                          double (*eval)(const double*, const bool*, double)) {
  if (f.size() != grid.size()) throw InvalidArgument("axis derivative: size mismatch");
  if (a < 0 || a >= grid.dim()) throw InvalidArgument("axis derivative: axis out of range");
  AxisLine line{grid, f, a, static_cast<double>(parity), nullptr};
  const double h = grid.axis(a).spacing;
  Eigen::ArrayXd d(grid.size());
  bool unused = false;
  for (Index n = 0; n < grid.size(); ++n) {
    double v[7];
    bool ok[7];
    v[3] = f(n);
    ok[3] = true;
    for (int o : {-3, -2, -1, 1, 2, 3}) ok[o + 3] = line.at(n, o, v[o + 3], unused);
    d(n) = eval(v, ok, h);
  }
  return d;
}

double first(const double* v, const bool* ok, double h) {
  if (ok[2] && ok[4]) return (v[4] - v[2]) / (2.0 * h);
  if (ok[4] && ok[5]) return (-3.0 * v[3] + 4.0 * v[4] - v[5]) / (2.0 * h);
  if (ok[2] && ok[1]) return (3.0 * v[3] - 4.0 * v[2] + v[1]) / (2.0 * h);
  return 0.0;
}

double second(const double* v, const bool* ok, double h) {
  if (ok[2] && ok[4]) return (v[4] - 2.0 * v[3] + v[2]) / (h * h);
  if (ok[4] && ok[5] && ok[6]) return (2.0 * v[3] - 5.0 * v[4] + 4.0 * v[5] - v[6]) / (h * h);
  if (ok[2] && ok[1] && ok[0]) return (2.0 * v[3] - 5.0 * v[2] + 4.0 * v[1] - v[0]) / (h * h);
  return 0.0;
}

/// Nodes whose stencil along some axis reads a masked node.
Mask stencil_mask(const Grid& grid, const Mask& mask, bool second_order) {
  Mask out = mask;
  if (!mask.any()) return out;
  const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(grid.size());
  for (int a = 0; a < grid.dim(); ++a) {
    AxisLine line{grid, zero, a, 1.0, &mask};
    for (Index n = 0; n < grid.size(); ++n) {
      if (out(n)) continue;
      double v;
      bool hit = false;
      const bool lo = line.at(n, -1, v, hit);
      const bool hi = line.at(n, +1, v, hit);
      if (hi && !lo) {
        for (int o = 1; o <= (second_order ? 3 : 2); ++o) line.at(n, o, v, hit);
      } else if (lo && !hi) {
        for (int o = 1; o <= (second_order ? 3 : 2); ++o) line.at(n, -o, v, hit);
      }
      if (hit) out(n) = true;
    }
  }
  return out;
}

void merge_touched(const Grid& grid, const Mask* mask, Mask* touched, bool second_order) {
  if (!mask || !touched) return;
  if (touched->size() != grid.size()) *touched = empty_mask(grid.size());
  *touched = *touched || stencil_mask(grid, *mask, second_order);
}

bool polar(const Grid& g) { return g.topology() == Topology::polar; }

Eigen::ArrayXd radius_of(const Grid& g) {
  Eigen::ArrayXd r(g.size());
  for (Index n = 0; n < g.size(); ++n) r(n) = g.coordinate(n, 0);
  return r;
}

void require_same(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": fields live on different grids");
}

}  // namespace

Eigen::ArrayXd axis_derivative(const Grid& grid, const Eigen::ArrayXd& f, int a, Parity parity,
                               const Mask* mask, Mask* touched) {
  merge_touched(grid, mask, touched, false);
  return apply_axis(grid, f, a, parity, first);
}

Eigen::ArrayXd axis_second_derivative(const Grid& grid, const Eigen::ArrayXd& f, int a, Parity parity,
                                      const Mask* mask, Mask* touched) {
  merge_touched(grid, mask, touched, true);
  return apply_axis(grid, f, a, parity, second);
}

VectorField gradient(const ScalarField& f) {
  const Grid& g = f.grid();
  Mask out = f.mask();
  Eigen::ArrayXXd w(g.size(), g.dim());
  for (int a = 0; a < g.dim(); ++a)
    w.col(a) = axis_derivative(g, f.values(), a, Parity::even, &f.mask(), &out);
  if (polar(g)) w.col(1) /= radius_of(g);
  return {f.grid_ptr(), std::move(w), out};
}

ScalarField divergence(const VectorField& w) {
  const Grid& g = w.grid();
  Mask out = w.mask();
  const Mask* m = &w.mask();
  Eigen::ArrayXd d = Eigen::ArrayXd::Zero(g.size());
  if (polar(g)) {
    const Eigen::ArrayXd r = radius_of(g);
    const Eigen::ArrayXd wr = w.values().col(0);
    const Eigen::ArrayXd wp = w.values().col(1);
    d = axis_derivative(g, wr, 0, Parity::odd, m, &out) + wr / r +
        axis_derivative(g, wp, 1, Parity::odd, m, &out) / r;
  } else {
    for (int a = 0; a < g.dim(); ++a)
      d += axis_derivative(g, w.values().col(a), a, Parity::even, m, &out);
  }
  return {w.grid_ptr(), std::move(d), out};
}

namespace {

Eigen::ArrayXd laplacian_values(const Grid& g, const Eigen::ArrayXd& f, Parity parity, const Mask* m,
                                Mask* out) {
  if (polar(g)) {
    const Eigen::ArrayXd r = radius_of(g);
    return axis_second_derivative(g, f, 0, parity, m, out) +
           axis_derivative(g, f, 0, parity, m, out) / r +
           axis_second_derivative(g, f, 1, parity, m, out) / (r * r);
  }
  Eigen::ArrayXd d = Eigen::ArrayXd::Zero(g.size());
  for (int a = 0; a < g.dim(); ++a) d += axis_second_derivative(g, f, a, parity, m, out);
  return d;
}

}  // namespace

ScalarField laplacian(const ScalarField& f) {
  Mask out = f.mask();
  Eigen::ArrayXd d = laplacian_values(f.grid(), f.values(), Parity::even, &f.mask(), &out);
  return {f.grid_ptr(), std::move(d), out};
}

VectorField advective_derivative(const VectorField& a, const VectorField& w) {
  require_same(a.grid(), w.grid(), "advective_derivative");
  const Grid& g = w.grid();
  Mask out = combine(a.mask(), w.mask());
  const Mask* m = &w.mask();
  Eigen::ArrayXXd d = Eigen::ArrayXXd::Zero(g.size(), g.dim());
  if (polar(g)) {
    const Eigen::ArrayXd r = radius_of(g);
    const Eigen::ArrayXd ar = a.values().col(0), ap = a.values().col(1);
    const Eigen::ArrayXd wr = w.values().col(0), wp = w.values().col(1);
    d.col(0) = ar * axis_derivative(g, wr, 0, Parity::odd, m, &out) +
               ap / r * axis_derivative(g, wr, 1, Parity::odd, m, &out) - ap * wp / r;
    d.col(1) = ar * axis_derivative(g, wp, 0, Parity::odd, m, &out) +
               ap / r * axis_derivative(g, wp, 1, Parity::odd, m, &out) + ap * wr / r;
  } else {
    for (int c = 0; c < g.dim(); ++c)
      for (int b = 0; b < g.dim(); ++b)
        d.col(c) += a.values().col(b) *
                    axis_derivative(g, w.values().col(c), b, Parity::even, m, &out);
  }
  return {w.grid_ptr(), std::move(d), out};
}

VectorField vector_laplacian(const VectorField& w) {
  const Grid& g = w.grid();
  Mask out = w.mask();
  const Mask* m = &w.mask();
  Eigen::ArrayXXd d(g.size(), g.dim());
  if (polar(g)) {
    const Eigen::ArrayXd r = radius_of(g);
    const Eigen::ArrayXd r2 = r * r;
    const Eigen::ArrayXd wr = w.values().col(0), wp = w.values().col(1);
    d.col(0) = laplacian_values(g, wr, Parity::odd, m, &out) - wr / r2 -
               2.0 / r2 * axis_derivative(g, wp, 1, Parity::odd, m, &out);
    d.col(1) = laplacian_values(g, wp, Parity::odd, m, &out) - wp / r2 +
               2.0 / r2 * axis_derivative(g, wr, 1, Parity::odd, m, &out);
  } else {
    for (int c = 0; c < g.dim(); ++c)
      d.col(c) = laplacian_values(g, w.values().col(c), Parity::even, m, &out);
  }
  return {w.grid_ptr(), std::move(d), out};
}

ScalarField curl(const VectorField& w) {
  const Grid& g = w.grid();
  if (g.dim() != 2) throw InvalidArgument("curl: needs a 2-D grid");
  Mask out = w.mask();
  const Mask* m = &w.mask();
  Eigen::ArrayXd c;
  if (polar(g)) {
    const Eigen::ArrayXd r = radius_of(g);
    const Eigen::ArrayXd wr = w.values().col(0), wp = w.values().col(1);
    c = axis_derivative(g, wp, 0, Parity::odd, m, &out) + wp / r -
        axis_derivative(g, wr, 1, Parity::odd, m, &out) / r;
  } else {
    c = axis_derivative(g, w.values().col(1), 0, Parity::even, m, &out) -
        axis_derivative(g, w.values().col(0), 1, Parity::even, m, &out);
  }
  return {w.grid_ptr(), std::move(c), out};
}

double edge_integral(const VectorField& w, const Edge& edge) {
  const Grid& g = w.grid();
  const auto other = g.neighbor(edge.node, edge.axis, +1);
  if (!other) throw InvalidArgument("edge_integral: edge leaves the grid");
  const double len = g.metric_step(edge.node, edge.axis);
  return edge.sign * 0.5 * (w.values()(edge.node, edge.axis) + w.values()(*other, edge.axis)) * len;
}

Eigen::ArrayXd plaquette_circulation(const VectorField& w) {
  const Grid& g = w.grid();
  Eigen::ArrayXd c = Eigen::ArrayXd::Zero(g.plaquette_count());
  for (Index p = 0; p < g.plaquette_count(); ++p) {
    const auto q = g.plaquette(p);
    if (!q) continue;
    c(p) = edge_integral(w, {(*q)[0], 0, +1}) + edge_integral(w, {(*q)[1], 1, +1}) -
           edge_integral(w, {(*q)[3], 0, +1}) - edge_integral(w, {(*q)[0], 1, +1});
  }
  return c;
}

Eigen::Vector2d to_cartesian(const Grid& grid, Index node, const Eigen::Vector2d& local) {
  if (!polar(grid)) return local;
  const double phi = grid.coordinate(node, 1);
  const double c = std::cos(phi), s = std::sin(phi);
  return {c * local(0) - s * local(1), s * local(0) + c * local(1)};
}

namespace {

struct Stencil {
  std::array<Index, 4> nodes;
  std::array<double, 4> weights;
  int corners;
};

/// Locates the bilinear stencil for a Cartesian position.
Stencil locate(const Grid& g, const Eigen::Vector2d& p) {
  double t[2];
  if (polar(g)) {
    const double r = p.norm();
    double phi = std::atan2(p(1), p(0));
    if (phi < 0.0) phi += two_pi;
    t[0] = r / g.axis(0).spacing - 0.5;
    t[1] = phi / g.axis(1).spacing;
  } else {
    for (int a = 0; a < g.dim(); ++a) t[a] = (p(a) - g.axis(a).origin) / g.axis(a).spacing;
  }
  int lo[2] = {0, 0}, hi[2] = {0, 0};
  double frac[2] = {0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) {
    const Axis& ax = g.axis(a);
    if (ax.periodic()) {
      double u = std::fmod(t[a], static_cast<double>(ax.count));
      if (u < 0.0) u += ax.count;
      int k = static_cast<int>(std::floor(u));
      if (k >= ax.count) k = ax.count - 1;
      lo[a] = k;
      hi[a] = (k + 1) % ax.count;
      frac[a] = u - k;
    } else {
      const double u = std::clamp(t[a], 0.0, static_cast<double>(ax.count - 1));
      int k = std::min(static_cast<int>(std::floor(u)), ax.count - 2);
      lo[a] = k;
      hi[a] = k + 1;
      frac[a] = u - k;
    }
  }
  Stencil s{};
  if (g.dim() == 1) {
    s.nodes = {lo[0], hi[0], 0, 0};
    s.weights = {1.0 - frac[0], frac[0], 0.0, 0.0};
    s.corners = 2;
  } else {
    s.nodes = {g.index(lo[0], lo[1]), g.index(hi[0], lo[1]), g.index(lo[0], hi[1]),
               g.index(hi[0], hi[1])};
    s.weights = {(1 - frac[0]) * (1 - frac[1]), frac[0] * (1 - frac[1]), (1 - frac[0]) * frac[1],
                 frac[0] * frac[1]};
    s.corners = 4;
  }
  return s;
}

/// Index of the unmasked corner with the largest weight, or -1.
int nearest_unmasked(const Stencil& s, const Mask& mask) {
  int best = -1;
  for (int c = 0; c < s.corners; ++c)
    if (!mask(s.nodes[c]) && (best < 0 || s.weights[c] > s.weights[best])) best = c;
  return best;
}

}  // namespace

double interpolate(const ScalarField& f, const Eigen::Vector2d& position) {
  const Stencil s = locate(f.grid(), position);
  const int fallback = nearest_unmasked(s, f.mask());
  double v = 0.0;
  for (int c = 0; c < s.corners; ++c) {
    Index n = s.nodes[c];
    if (f.masked(n) && fallback >= 0) n = s.nodes[fallback];
    v += s.weights[c] * f.values()(n);
  }
  return v;
}

Index nearest_node(const Grid& grid, const Eigen::Vector2d& position) {
  const Stencil s = locate(grid, position);
  int best = 0;
  for (int c = 1; c < s.corners; ++c)
    if (s.weights[c] > s.weights[best]) best = c;
  return s.nodes[best];
}

Eigen::Vector2d interpolate(const VectorField& w, const Eigen::Vector2d& position) {
  const Grid& g = w.grid();
  const Stencil s = locate(g, position);
  const int fallback = nearest_unmasked(s, w.mask());
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (int c = 0; c < s.corners; ++c) {
    Index n = s.nodes[c];
    if (w.masked(n) && fallback >= 0) n = s.nodes[fallback];
    Eigen::Vector2d local = Eigen::Vector2d::Zero();
    for (int a = 0; a < g.dim(); ++a) local(a) = w.values()(n, a);
    v += s.weights[c] * to_cartesian(g, n, local);
  }
  return v;
}

namespace {

template <class Field>
Field fill_masked(const Field& f) {
  const Grid& g = f.grid();
  auto values = f.values();
  Eigen::Array<bool, Eigen::Dynamic, 1> known = !f.mask();
  if (!known.any()) throw InvalidArgument("fill_masked_from_neighbors: every node is masked");
  std::deque<Index> queue;
  for (Index n = 0; n < g.size(); ++n)
    if (known(n)) queue.push_back(n);
  while (!queue.empty()) {
    const Index n = queue.front();
    queue.pop_front();
    for (int a = 0; a < g.dim(); ++a)
      for (int dir : {-1, 1}) {
        const auto m = g.neighbor(n, a, dir);
        if (m && !known(*m)) {
          known(*m) = true;
          values.row(*m) = values.row(n);
          queue.push_back(*m);
        }
      }
  }
  return Field(f.grid_ptr(), std::move(values));
}

}  // namespace

VectorField fill_masked_from_neighbors(const VectorField& w) { return fill_masked(w); }
ScalarField fill_masked_from_neighbors(const ScalarField& f) { return fill_masked(f); }

}  // namespace zsm
