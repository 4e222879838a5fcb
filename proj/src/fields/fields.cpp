#include "zsm/fields/fields.hpp"

#include "zsm/core/operators.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace zsm {

Mask node_mask(const ScalarField& rho, double node_floor) {
  if (node_floor < 0.0) throw InvalidArgument("node_floor must be non-negative");
  const double peak = rho.values().maxCoeff();
  Mask m = rho.mask();
  for (Index i = 0; i < rho.size(); ++i)
    if (rho.values()(i) < node_floor * peak || rho.values()(i) <= 0.0) m(i) = true;
  return m;
}

PolarDecomposition polar_decompose(const ComplexField& psi, const PhysicalConstants& k,
                                   double node_floor) {
  const Grid& g = psi.grid();
  const Index n = g.size();
  ScalarField rho = density(psi);
  if (!(rho.values().maxCoeff() > 0.0)) throw InvalidArgument("polar_decompose: psi is identically zero");
  const Mask mask = node_mask(rho, node_floor);
  const double hbar = k.hbar();
  const double h = k.planck();

  Eigen::ArrayXd arg(n);
  for (Index i = 0; i < n; ++i) arg(i) = std::arg(psi.values()(i));
  Eigen::ArrayXd principal = (hbar * arg).unaryExpr([h](double s) { return wrap_positive(s, h); });
  Eigen::ArrayXXd inc = Eigen::ArrayXXd::Zero(n, g.dim());
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid(n, g.dim());
  for (Index i = 0; i < n; ++i)
    for (int a = 0; a < g.dim(); ++a) {
      const auto m = g.neighbor(i, a, +1);
      valid(i, a) = m && !mask(i) && !mask(*m);
      if (valid(i, a)) inc(i, a) = hbar * wrap_symmetric(arg(*m) - arg(i), 2.0 * std::numbers::pi);
    }
  PhaseField S(psi.grid_ptr(), std::move(principal), std::move(inc), std::move(valid), mask, h);
  const bool split = S.region_count() > 1;
  return {ScalarField(psi.grid_ptr(), rho.values(), mask), std::move(S), split};
}

ComplexField recompose(const ScalarField& rho, const PhaseField& S, const PhysicalConstants& k) {
  if (!(rho.grid() == S.grid())) throw InvalidArgument("recompose: grid mismatch");
  Eigen::ArrayXcd psi(rho.size());
  for (Index i = 0; i < rho.size(); ++i)
    psi(i) = std::polar(std::sqrt(std::max(rho.values()(i), 0.0)), S.principal()(i) / k.hbar());
  return {rho.grid_ptr(), std::move(psi), combine(rho.mask(), S.mask())};
}

double vector_coupling(const PhysicalConstants& k) {
  return k.unit_system() == UnitSystem::si ? k.charge() : k.charge() / k.light_speed();
}

VectorField current_velocity(const PhaseField& S, const PhysicalConstants& k, const VectorField* a_ext) {
  const Grid& g = S.grid();
  Mask out = S.mask();
  Eigen::ArrayXXd v(g.size(), g.dim());
  for (int a = 0; a < g.dim(); ++a) v.col(a) = S.axis_derivative(a, &out);
  if (g.topology() == Topology::polar)
    for (Index i = 0; i < g.size(); ++i) v(i, 1) /= g.coordinate(i, 0);
  if (a_ext) {
    if (!(a_ext->grid() == g)) throw InvalidArgument("current_velocity: A lives on a different grid");
    v -= vector_coupling(k) * a_ext->values();
    out = combine(out, a_ext->mask());
  }
  return {S.grid_ptr(), v / k.mass(), out};
}

VectorField osmotic_velocity(const ScalarField& rho, const PhysicalConstants& k, double node_floor) {
  const Mask mask = node_mask(rho, node_floor);
  const VectorField grad = gradient(ScalarField(rho.grid_ptr(), rho.values(), mask));
  Eigen::ArrayXXd u = Eigen::ArrayXXd::Zero(grad.size(), grad.components());
  for (Index i = 0; i < rho.size(); ++i)
    if (!grad.masked(i)) u.row(i) = k.diffusion() * grad.values().row(i) / rho.values()(i);
  return {rho.grid_ptr(), std::move(u), grad.mask()};
}

KinematicFields kinematic_fields(const ScalarField& rho, const PhaseField& S, const PhysicalConstants& k,
                                 const VectorField* a_ext, double node_floor) {
  VectorField v = current_velocity(S, k, a_ext);
  VectorField u = osmotic_velocity(rho, k, node_floor);
  VectorField b = add(v, u);
  VectorField bs = subtract(v, u);
  return {std::move(v), std::move(u), std::move(b), std::move(bs)};
}

ScalarField quantum_kinetic(const ScalarField& rho, const PhysicalConstants& k, double node_floor) {
  const Mask mask = node_mask(rho, node_floor);
  Eigen::ArrayXd amp(rho.size());
  for (Index i = 0; i < rho.size(); ++i) amp(i) = mask(i) ? 0.0 : std::sqrt(rho.values()(i));
  const ScalarField lap = laplacian(ScalarField(rho.grid_ptr(), amp, mask));
  Eigen::ArrayXd q = Eigen::ArrayXd::Zero(rho.size());
  const double c = -k.hbar() * k.hbar() / (2.0 * k.mass());
  for (Index i = 0; i < rho.size(); ++i)
    if (!lap.masked(i)) q(i) = c * lap.values()(i) / amp(i);
  return {rho.grid_ptr(), std::move(q), lap.mask()};
}

WindingReport circulation(const PhaseField& S, const Loop& loop, const PhysicalConstants& k,
                          double tolerance, const VectorField* a_ext) {
  const Grid& g = S.grid();
  if (loop.nodes.size() < 2) throw InvalidArgument("circulation: loop needs at least two nodes");
  WindingReport r;
  r.loop = loop.label;
  r.tolerance = tolerance;
  double flux = 0.0;
  for (std::size_t i = 0; i < loop.nodes.size(); ++i) {
    const Index from = loop.nodes[i];
    const Index to = loop.nodes[(i + 1) % loop.nodes.size()];
    if (S.mask()(from)) throw InvalidArgument("circulation: loop crosses masked node " + std::to_string(from));
    const auto edge = g.edge_between(from, to);
    if (!edge)
      throw InvalidArgument("circulation: nodes " + std::to_string(from) + " and " + std::to_string(to) +
                            " are not neighbours");
    const auto d = S.increment(*edge);
    if (!d) throw InvalidArgument("circulation: loop crosses masked node " + std::to_string(to));
    r.circulation += *d;
    if (a_ext) flux += edge_integral(*a_ext, *edge);
  }
  const double h = S.action_quantum();
  r.winding = std::lround(r.circulation / h);
  r.residual = std::abs(r.circulation - static_cast<double>(r.winding) * h);
  r.accepted = r.residual <= tolerance;
  r.flux_correction = a_ext ? vector_coupling(k) * flux : 0.0;
  r.kinetic_circulation = r.circulation - r.flux_correction;
  return r;
}

nlohmann::json to_json(const WindingReport& r) {
  return {{"loop", r.loop},
          {"circulation", r.circulation},
          {"winding", r.winding},
          {"residual", r.residual},
          {"tolerance", r.tolerance},
          {"accepted", r.accepted},
          {"flux_correction", r.flux_correction},
          {"kinetic_circulation", r.kinetic_circulation}};
}

}  // namespace zsm
