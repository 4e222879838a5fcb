#include "zsm/diffusion/diffusion.hpp"

#include "zsm/core/operators.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace zsm {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

enum class End { interior, low, high };

End end_of(const Grid& g, Index node, int a) {
  if (g.axis(a).periodic()) return End::interior;
  const int k = g.coords(node)[static_cast<std::size_t>(a)];
  if (k == 0) return End::low;
  if (k == g.axis(a).count - 1) return End::high;
  return End::interior;
}

/// Central difference along `a`; first-order one-sided at bounded ends.
SparseMatrix difference(const Grid& g, int a) {
  const double h = g.axis(a).spacing;
  std::vector<Triplet> t;
  for (Index n = 0; n < g.size(); ++n) {
    const auto lo = g.neighbor(n, a, -1), hi = g.neighbor(n, a, +1);
    switch (end_of(g, n, a)) {
      case End::interior:
        t.emplace_back(n, *hi, 0.5 / h);
        t.emplace_back(n, *lo, -0.5 / h);
        break;
      case End::low:
        t.emplace_back(n, *hi, 1.0 / h);
        t.emplace_back(n, n, -1.0 / h);
        break;
      case End::high:
        t.emplace_back(n, n, 1.0 / h);
        t.emplace_back(n, *lo, -1.0 / h);
        break;
    }
  }
  SparseMatrix m(g.size(), g.size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

template <class Keep>
SparseMatrix row_filter(Index n, const Keep& keep) {
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i)
    if (keep(i)) t.emplace_back(i, i, 1.0);
  SparseMatrix p(n, n);
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

/// Generator of the forward-time evolution: rho_t = L rho.
SparseMatrix generator(const ScalarField& rho, const VectorField& drift, const PhysicalConstants& k,
                       Direction direction) {
  const Grid& g = rho.grid();
  if (g.topology() == Topology::polar)
    throw UnsupportedFeature("fokker_planck: polar grids are not supported");
  if (!same_grid(rho.grid_ptr(), drift.grid_ptr()))
    throw InvalidArgument("fokker_planck: drift lives on a different grid than rho");
  const VectorField b = drift.any_masked() ? fill_masked_from_neighbors(drift) : drift;
  const double nu = direction == Direction::forward ? k.diffusion() : -k.diffusion();
  const Index n = g.size();
  SparseMatrix total(n, n);
  for (int a = 0; a < g.dim(); ++a) {
    const SparseMatrix d = difference(g, a);
    // flux = b rho - nu grad rho, zero on reflecting walls
    SparseMatrix flux = -nu * d;
    SparseMatrix drift_part(n, n);
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) t.emplace_back(i, i, b.values()(i, a));
    drift_part.setFromTriplets(t.begin(), t.end());
    flux += drift_part;
    if (g.axis(a).boundary == Boundary::reflecting)
      flux = row_filter(n, [&](Index i) { return end_of(g, i, a) == End::interior; }) * flux;
    total -= d * flux;
  }
  total.prune(0.0);
  return total;
}

bool absorbing_node(const Grid& g, Index node) {
  for (int a = 0; a < g.dim(); ++a)
    if (g.axis(a).boundary == Boundary::absorbing && end_of(g, node, a) != End::interior) return true;
  return false;
}

}  // namespace

ScalarField fokker_planck_rate(const ScalarField& rho, const VectorField& drift,
                               const PhysicalConstants& k, Direction direction) {
  const SparseMatrix l = generator(rho, drift, k, direction);
  Eigen::VectorXd r = l * rho.values().matrix();
  for (Index i = 0; i < rho.size(); ++i)
    if (absorbing_node(rho.grid(), i)) r(i) = 0.0;
  return {rho.grid_ptr(), r.array()};
}

ScalarField fokker_planck_step(const ScalarField& rho, const VectorField& drift, double dt,
                               const PhysicalConstants& k, Direction direction,
                               FokkerPlanckReport* report) {
  if (!(dt > 0.0)) throw InvalidArgument("fokker_planck_step: dt must be positive");
  const Grid& g = rho.grid();
  const Index n = g.size();
  const SparseMatrix l = generator(rho, drift, k, direction);
  // forward: (I - dt L) rho(t + dt) = rho(t); backward: (I + dt L) rho(t - dt) = rho(t)
  const double s = direction == Direction::forward ? -dt : dt;
  Eigen::VectorXd rhs = rho.values().matrix();
  for (Index i = 0; i < n; ++i)
    if (absorbing_node(g, i)) rhs(i) = 0.0;
  SparseMatrix a = row_filter(n, [](Index) { return true; });
  a += s * (row_filter(n, [&](Index i) { return !absorbing_node(g, i); }) * l);
  a.makeCompressed();
  Eigen::SparseLU<SparseMatrix> solver;
  solver.compute(a);
  if (solver.info() != Eigen::Success) throw Error("fokker_planck_step: factorisation failed");
  Eigen::VectorXd out = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !out.allFinite())
    throw Error("fokker_planck_step: linear solve failed");
  ScalarField next(rho.grid_ptr(), out.array());
  if (report) {
    report->courant = 0.0;
    for (Index i = 0; i < n; ++i)
      for (int ax = 0; ax < g.dim(); ++ax)
        report->courant =
            std::max(report->courant, std::abs(drift.values()(i, ax)) * dt / g.axis(ax).spacing);
    report->mass_before = integrate(rho);
    report->mass_after = integrate(next);
    if (report->courant > 1.0) {
      std::ostringstream msg;
      msg << "advective Courant number " << report->courant
          << " exceeds 1; the implicit step stays stable but smears transport";
      report->warnings.push_back(msg.str());
    }
  }
  return next;
}

nlohmann::json to_json(const FokkerPlanckReport& r) {
  return {{"courant", r.courant},
          {"mass_before", r.mass_before},
          {"mass_after", r.mass_after},
          {"warnings", r.warnings}};
}

}  // namespace zsm
