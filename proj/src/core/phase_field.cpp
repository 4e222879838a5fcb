#include "zsm/core/phase_field.hpp"

#include <cmath>
#include <deque>

namespace zsm {

double wrap_symmetric(double x, double h) { return x - h * std::ceil(x / h - 0.5); }

double wrap_positive(double x, double h) {
  double r = std::fmod(x, h);
  if (r < 0.0) r += h;
  return r >= h ? 0.0 : r;
}

PhaseField::PhaseField(GridPtr grid, Eigen::ArrayXd principal, Eigen::ArrayXXd increments,
                       Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> edge_valid, Mask mask,
                       double action_quantum)
    : grid_(std::move(grid)),
      principal_(std::move(principal)),
      increments_(std::move(increments)),
      edge_valid_(std::move(edge_valid)),
      mask_(std::move(mask)),
      h_(action_quantum) {
  if (!grid_) throw InvalidArgument("PhaseField: null grid");
  const Index n = grid_->size();
  if (mask_.size() == 0) mask_ = empty_mask(n);
  if (principal_.size() != n || increments_.rows() != n || increments_.cols() != grid_->dim() ||
      edge_valid_.rows() != n || edge_valid_.cols() != grid_->dim() || mask_.size() != n)
    throw InvalidArgument("PhaseField: array sizes do not match the grid");
  if (!(h_ > 0.0)) throw InvalidArgument("PhaseField: action quantum must be positive");
  for (Index i = 0; i < n; ++i) {
    if (mask_(i)) {
      principal_(i) = 0.0;
    } else {
      if (!std::isfinite(principal_(i))) throw InvalidArgument("PhaseField: non-finite value");
      principal_(i) = wrap_positive(principal_(i), h_);
    }
    for (int a = 0; a < grid_->dim(); ++a) {
      const auto m = grid_->neighbor(i, a, +1);
      if (!m || mask_(i) || mask_(*m)) edge_valid_(i, a) = false;
      if (!edge_valid_(i, a)) increments_(i, a) = 0.0;
      else if (!std::isfinite(increments_(i, a)))
        throw InvalidArgument("PhaseField: non-finite increment at node " + std::to_string(i));
    }
  }
  build_topology();
}

PhaseField PhaseField::from_function(const GridPtr& grid, const LiftedAction& action,
                                     const PhysicalConstants& k, Mask mask) {
  const Index n = grid->size();
  const int d = grid->dim();
  if (mask.size() == 0) mask = empty_mask(n);
  Eigen::ArrayXd principal(n);
  Eigen::ArrayXXd inc = Eigen::ArrayXXd::Zero(n, d);
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, d, true);
  auto eval = [&](double x0, double x1) { return action(x0, x1); };
  for (Index i = 0; i < n; ++i) {
    const double x0 = grid->coordinate(i, 0);
    const double x1 = d == 2 ? grid->coordinate(i, 1) : 0.0;
    const double s = eval(x0, x1);
    principal(i) = s;
    for (int a = 0; a < d; ++a) {
      if (!grid->neighbor(i, a, +1)) {
        valid(i, a) = false;
        continue;
      }
      const double step = grid->axis(a).spacing;
      inc(i, a) = (a == 0 ? eval(x0 + step, x1) : eval(x0, x1 + step)) - s;
    }
  }
  PhaseField out(grid, std::move(principal), std::move(inc), std::move(valid), std::move(mask),
                 k.planck());
  for (Index p = 0; p < out.plaquette_winding_.size(); ++p) {
    if (!out.plaquette_valid_(p)) continue;
    const auto q = grid->plaquette(p);
    const double circ = out.increments_((*q)[0], 0) + out.increments_((*q)[1], 1) -
                        out.increments_((*q)[3], 0) - out.increments_((*q)[0], 1);
    if (std::abs(circ - out.plaquette_winding_(p) * out.h_) > 1e-9 * out.h_)
      throw InvalidArgument("PhaseField::from_function: plaquette " + std::to_string(p) +
                            " has non-integer circulation " + std::to_string(circ / out.h_) +
                            " h");
  }
  return out;
}

void PhaseField::build_topology() {
  const Grid& g = *grid_;
  const Index n = g.size();
  plaquette_winding_ = Eigen::ArrayXi::Zero(g.plaquette_count());
  plaquette_valid_ = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(g.plaquette_count(), false);
  for (Index p = 0; p < g.plaquette_count(); ++p) {
    const auto q = g.plaquette(p);
    if (!q) continue;
    if (!edge_valid_((*q)[0], 0) || !edge_valid_((*q)[1], 1) || !edge_valid_((*q)[3], 0) ||
        !edge_valid_((*q)[0], 1))
      continue;
    const double circ = increments_((*q)[0], 0) + increments_((*q)[1], 1) -
                        increments_((*q)[3], 0) - increments_((*q)[0], 1);
    plaquette_valid_(p) = true;
    plaquette_winding_(p) = static_cast<int>(std::lround(circ / h_));
  }

  region_ = Eigen::ArrayXi::Constant(n, -1);
  unwrapped_ = Eigen::ArrayXd::Zero(n);
  region_count_ = 0;
  for (Index seed = 0; seed < n; ++seed) {
    if (mask_(seed) || region_(seed) >= 0) continue;
    const int label = region_count_++;
    region_(seed) = label;
    unwrapped_(seed) = principal_(seed);
    std::deque<Index> queue{seed};
    while (!queue.empty()) {
      const Index i = queue.front();
      queue.pop_front();
      for (int a = 0; a < g.dim(); ++a) {
        if (edge_valid_(i, a)) {
          const Index m = *g.neighbor(i, a, +1);
          if (region_(m) < 0) {
            region_(m) = label;
            unwrapped_(m) = unwrapped_(i) + increments_(i, a);
            queue.push_back(m);
          }
        }
        const auto b = g.neighbor(i, a, -1);
        if (b && edge_valid_(*b, a) && region_(*b) < 0) {
          region_(*b) = label;
          unwrapped_(*b) = unwrapped_(i) - increments_(*b, a);
          queue.push_back(*b);
        }
      }
    }
  }
}

std::optional<double> PhaseField::increment(const Edge& edge) const {
  if (!edge_valid_(edge.node, edge.axis)) return std::nullopt;
  return edge.sign * increments_(edge.node, edge.axis);
}

std::optional<double> PhaseField::core_circulation() const {
  if (grid_->topology() != Topology::polar) return std::nullopt;
  double sum = 0.0;
  for (int j = 0; j < grid_->count(1); ++j) {
    const Index i = grid_->index(0, j);
    if (!edge_valid_(i, 1)) return std::nullopt;
    sum += increments_(i, 1);
  }
  return sum / h_;
}

Eigen::ArrayXd PhaseField::axis_derivative(int a, Mask* touched) const {
  const Grid& g = *grid_;
  const double h = g.axis(a).spacing;
  Eigen::ArrayXd d = Eigen::ArrayXd::Zero(g.size());
  if (touched && touched->size() != g.size()) *touched = mask_;
  for (Index i = 0; i < g.size(); ++i) {
    if (mask_(i)) {
      if (touched) (*touched)(i) = true;
      continue;
    }
    const bool fwd = edge_valid_(i, a);
    const auto b = g.neighbor(i, a, -1);
    const bool bwd = b && edge_valid_(*b, a);
    if (fwd && bwd) {
      d(i) = (increments_(*b, a) + increments_(i, a)) / (2.0 * h);
      continue;
    }
    if (fwd) {
      const Index m = *g.neighbor(i, a, +1);
      if (edge_valid_(m, a)) d(i) = (3.0 * increments_(i, a) - increments_(m, a)) / (2.0 * h);
      else d(i) = increments_(i, a) / h;
      continue;
    }
    if (bwd) {
      const auto bb = g.neighbor(*b, a, -1);
      if (bb && edge_valid_(*bb, a)) d(i) = (3.0 * increments_(*b, a) - increments_(*bb, a)) / (2.0 * h);
      else d(i) = increments_(*b, a) / h;
      continue;
    }
    if (touched) (*touched)(i) = true;
  }
  return d;
}

PhaseField PhaseField::shifted(double constant) const {
  PhaseField out = *this;
  for (Index i = 0; i < out.principal_.size(); ++i) {
    if (mask_(i)) continue;
    out.principal_(i) = wrap_positive(principal_(i) + constant, h_);
    out.unwrapped_(i) += constant;
  }
  return out;
}

}  // namespace zsm
