#include "zsm/core/field.hpp"

#include <cmath>

namespace zsm {

namespace {

void require_same(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": fields live on different grids");
}

}  // namespace

ScalarField sample(const GridPtr& grid, const std::function<double(const Grid&, Index)>& f) {
  Eigen::ArrayXd v(grid->size());
  for (Index n = 0; n < grid->size(); ++n) v(n) = f(*grid, n);
  return {grid, std::move(v)};
}

ComplexField sample_complex(const GridPtr& grid,
                            const std::function<std::complex<double>(const Grid&, Index)>& f) {
  Eigen::ArrayXcd v(grid->size());
  for (Index n = 0; n < grid->size(); ++n) v(n) = f(*grid, n);
  return {grid, std::move(v)};
}

VectorField zero_vector_field(const GridPtr& grid) {
  return {grid, Eigen::ArrayXXd::Zero(grid->size(), grid->dim())};
}

double integrate(const GridPtr& grid, const Eigen::ArrayXd& values) {
  return (grid->weights() * values).sum();
}

double integrate(const ScalarField& f) { return integrate(f.grid_ptr(), f.values()); }

double norm_squared(const ComplexField& psi) {
  return integrate(psi.grid_ptr(), psi.values().abs2());
}

ScalarField normalize_density(const ScalarField& rho) {
  for (Index n = 0; n < rho.size(); ++n)
    if (rho.values()(n) < 0.0)
      throw InvalidArgument("normalize_density: negative density at node " + std::to_string(n));
  const double mass = integrate(rho);
  if (!(mass > 0.0)) throw InvalidArgument("normalize_density: density integrates to zero");
  return {rho.grid_ptr(), rho.values() / mass, rho.mask()};
}

ComplexField normalize(const ComplexField& psi) {
  const double n2 = norm_squared(psi);
  if (!(n2 > 0.0)) throw InvalidArgument("normalize: wave function is identically zero");
  return {psi.grid_ptr(), psi.values() / std::sqrt(n2), psi.mask()};
}

ScalarField density(const ComplexField& psi) {
  return {psi.grid_ptr(), psi.values().abs2(), psi.mask()};
}

ScalarField add(const ScalarField& a, const ScalarField& b) {
  require_same(a.grid(), b.grid(), "add");
  return {a.grid_ptr(), a.values() + b.values(), combine(a.mask(), b.mask())};
}

VectorField add(const VectorField& a, const VectorField& b) {
  require_same(a.grid(), b.grid(), "add");
  return {a.grid_ptr(), a.values() + b.values(), combine(a.mask(), b.mask())};
}

VectorField subtract(const VectorField& a, const VectorField& b) {
  require_same(a.grid(), b.grid(), "subtract");
  return {a.grid_ptr(), a.values() - b.values(), combine(a.mask(), b.mask())};
}

VectorField scale(const VectorField& a, double s) { return {a.grid_ptr(), a.values() * s, a.mask()}; }

ScalarField dot(const VectorField& a, const VectorField& b) {
  require_same(a.grid(), b.grid(), "dot");
  return {a.grid_ptr(), (a.values() * b.values()).rowwise().sum(), combine(a.mask(), b.mask())};
}

Mask combine(const Mask& a, const Mask& b) { return a || b; }

double l2_norm(const ScalarField& f) {
  const auto& w = f.grid().weights();
  double s = 0.0;
  for (Index n = 0; n < f.size(); ++n)
    if (!f.masked(n)) s += w(n) * f.values()(n) * f.values()(n);
  return std::sqrt(s);
}

double linf_norm(const ScalarField& f) {
  double m = 0.0;
  for (Index n = 0; n < f.size(); ++n)
    if (!f.masked(n)) m = std::max(m, std::abs(f.values()(n)));
  return m;
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
  require_same(a.grid(), b.grid(), "l1_distance");
  return integrate(a.grid_ptr(), (a.values() - b.values()).abs());
}

}  // namespace zsm
