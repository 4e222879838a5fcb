#include <doctest.h>

#include "zsm/hjm/hjm.hpp"
#include "zsm/schrodinger/schrodinger.hpp"

#include <cmath>
#include <numbers>

using namespace zsm;
using std::numbers::pi;

namespace {

const PhysicalConstants nat = make_constants(UnitSystem::natural);

ScalarField disk_harmonic(const GridPtr& g) {
  return sample(g, [](const Grid& gr, Index n) { return 0.5 * std::pow(gr.coordinate(n, 0), 2); });
}

}  // namespace

TEST_CASE("ring eigenstate satisfies the Madelung pair exactly") {
  const auto st = ring_eigenstate(3, 1.2, 64, nat);
  const auto pd = polar_decompose(st.psi, nat);
  const Potentials none(st.psi.grid_ptr());
  ResidualOptions o;
  o.energy = st.energy;
  const auto r = hjm_residuals(pd.rho, pd.phase, none, nat, o);
  CHECK(r.continuity_linf <= 1e-10);
  CHECK(r.hj_linf <= 1e-10);
  CHECK(r.passed());

  o.energy = st.energy + nat.rest_energy();
  o.include_rest_energy = true;
  CHECK(hjm_residuals(pd.rho, pd.phase, none, nat, o).hj_linf <= 1e-10);

  o.include_rest_energy = false;
  o.energy = st.energy;
  const auto shifted = hjm_residuals(pd.rho, pd.phase.shifted(0.37), none, nat, o);
  CHECK((shifted.hamilton_jacobi.values() - r.hamilton_jacobi.values()).abs().maxCoeff() < 1e-14);
}

TEST_CASE("harmonic ground state residuals are small and shrink under refinement") {
  double prev = 0.0;
  for (int n : {201, 401}) {
    const auto g = Grid::line(-8, 8, n, Boundary::reflecting);
    const auto v = sample(g, [](const Grid& gr, Index i) { return 0.5 * std::pow(gr.coordinate(i, 0), 2); });
    const auto gs = line_ground_state(v, nat, 1e-12);
    const auto pd = polar_decompose(gs.psi, nat);
    ResidualOptions o;
    o.energy = gs.energy;
    o.hj_tolerance = 1e-6;
    const auto r = hjm_residuals(pd.rho, pd.phase, Potentials(v), nat, o);
    CHECK(r.continuity_linf < 1e-12);
    CHECK(r.hj_passed);
    CHECK(std::abs(gs.energy - 0.5) < 0.1 * std::pow(16.0 / (n - 1), 2));
    if (prev > 0.0) CHECK(std::abs(gs.energy - 0.5) < prev);
    prev = std::abs(gs.energy - 0.5);
  }
}

TEST_CASE("random smooth fields fail the residual check") {
  const auto g = Grid::line(-4, 4, 161, Boundary::reflecting);
  const auto rho = normalize_density(sample(g, [](const Grid& gr, Index n) {
    const double x = gr.coordinate(n, 0);
    return std::exp(-x * x) * (1.5 + std::sin(3 * x));
  }));
  const auto S = PhaseField::from_function(g, [](double x, double) { return 0.4 * x * x + std::cos(x); }, nat);
  ResidualOptions o;
  o.energy = 1.0;
  const auto r = hjm_residuals(rho, S, Potentials(g), nat, o);
  CHECK(r.continuity_linf > 1e-3);
  CHECK(r.hj_linf > 1e-3);
  CHECK(!r.passed());
  const auto j = to_json(r);
  CHECK(j.contains("continuity_l2"));
  CHECK(j.contains("hj_linf"));

  ResidualOptions td;
  td.stationary = false;
  CHECK_THROWS_AS(hjm_residuals(rho, S, Potentials(g), nat, td), InvalidArgument);
  CHECK_THROWS_AS(hjm_residuals(rho, S, Potentials(g), nat, ResidualOptions{}), InvalidArgument);
}

TEST_CASE("time-dependent residuals from evolution frames") {
  const auto g = Grid::line(-15, 15, 601, Boundary::reflecting);
  const auto psi0 = normalize(sample_complex(g, [](const Grid& gr, Index n) {
    const double x = gr.coordinate(n, 0) + 3;
    return std::polar(std::exp(-x * x / 4), 1.2 * x);
  }));
  const double dt = 0.002;
  EvolutionOptions eo;
  eo.rest_energy = true;
  const auto tr = evolve_linear(psi0, Potentials(g), dt, 2, nat, eo);
  const auto d = frame_derivatives(tr.frames[0], tr.frames[1], tr.frames[2], dt, nat);
  ResidualOptions o;
  o.stationary = false;
  o.drho_dt = d.drho_dt;
  o.ds_dt = d.ds_dt;
  o.include_rest_energy = true;
  o.continuity_tolerance = 1e-3;
  o.hj_tolerance = 1e-2;
  o.node_floor = 1e-8;
  const auto r = hjm_residuals(d.rho, d.phase, Potentials(g), nat, o);
  CHECK(r.continuity_passed);
  CHECK(r.hj_passed);
  o.include_rest_energy = false;
  CHECK(!hjm_residuals(d.rho, d.phase, Potentials(g), nat, o).hj_passed);
}

TEST_CASE("Wallstrom extraneous solutions") {
  const auto g = Grid::polar(6.0, 96, 32);
  const auto v = disk_harmonic(g);

  const auto two = wallstrom_extraneous_solution(1.5, v, nat);
  CHECK(two.winding == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(two.classification == WindingClass::integer);
  CHECK(two.residuals_passed);

  const auto root3 = wallstrom_extraneous_solution(1.0, v, nat);
  CHECK(root3.winding == doctest::Approx(std::sqrt(3.0)));
  CHECK(root3.classification == WindingClass::non_integer);
  CHECK(root3.residual_base.passed());
  CHECK(root3.residual_scaled.passed());
  CHECK(root3.velocity_scaling_error < 1e-12);
  // exact energy of the 2-D oscillator in winding sector w is (w + 1)
  CHECK(root3.energy == doctest::Approx(std::sqrt(3.0) + 1.0).epsilon(1e-3));

  const auto base = wallstrom_extraneous_solution(0.0, v, nat);
  const auto m1 = central_eigenstate(v, 1, nat, 1e-12);
  CHECK(base.winding == 1.0);
  CHECK((base.rho.values() - m1.psi.values().abs2()).abs().maxCoeff() < 1e-8);
  CHECK(base.energy == doctest::Approx(m1.energy).epsilon(1e-10));

  double prev = 0.0;
  const Index probe = g->index(30, 0);
  for (double a : {0.0, 0.25, 0.5, 1.0, 1.5, 2.5}) {
    const auto s = wallstrom_extraneous_solution(a, v, nat);
    const double speed = s.velocity_scaled.values()(probe, 1);
    CHECK(speed > prev);
    prev = speed;
  }
  CHECK_THROWS_AS(wallstrom_extraneous_solution(-1.0, v, nat), InvalidArgument);
}

TEST_CASE("quantization gate separates eigenstates from extraneous solutions") {
  const auto g = Grid::polar(6.0, 96, 32);
  const auto v = disk_harmonic(g);
  const auto e2 = central_eigenstate(v, 2, nat);
  const auto pd = polar_decompose(e2.psi, nat);
  const auto ok = quantization_gate(pd.phase, nat);
  CHECK(ok.accepted);
  REQUIRE(!ok.windings.empty());
  CHECK(ok.windings.front().winding == 2);

  const auto root3 = wallstrom_extraneous_solution(1.0, v, nat);
  const auto bad = quantization_gate(root3.phase_scaled, nat);
  CHECK(!bad.accepted);
  CHECK(bad.verdict() == "REJECT");
  CHECK(root3.residuals_passed);

  const auto two = wallstrom_extraneous_solution(1.5, v, nat);
  const auto good = quantization_gate(two.phase_scaled, nat);
  CHECK(good.accepted);
  CHECK(good.windings.front().winding == 2);
  CHECK(to_json(good)["verdict"] == "ACCEPT");
}

TEST_CASE("gate encloses a vortex node on the plane") {
  const auto g = Grid::plane(Grid::plane_axis(-4, 4, 41, Boundary::reflecting),
                             Grid::plane_axis(-4, 4, 41, Boundary::reflecting));
  const auto psi = sample_complex(g, [](const Grid& gr, Index n) {
    const auto p = gr.cartesian(n);
    return std::complex<double>(p(0), p(1)) * std::exp(-p.squaredNorm() / 2);
  });
  const auto pd = polar_decompose(normalize(psi), nat);
  const auto rep = quantization_gate(pd.phase, nat);
  CHECK(rep.accepted);
  bool vortex = false;
  for (const auto& w : rep.windings) vortex = vortex || w.winding == 1;
  CHECK(vortex);
}

TEST_CASE("ring superposition single-valuedness") {
  const auto ring = Grid::ring(1.0, 128);
  const auto a = ring_superposition_check(ring, 2.0, 1.0);
  CHECK(a.single_valued);
  CHECK(a.max_mismatch <= 1e-12);
  const auto b = ring_superposition_check(ring, 1.5, 0.0);
  CHECK(!b.single_valued);
  CHECK(b.max_mismatch > 0.1);
  const auto c = ring_superposition_check(ring, 0.7, 0.7);
  CHECK(c.single_valued);
  CHECK((c.density.values() - c.density.values()(0)).abs().maxCoeff() < 1e-12);
}
