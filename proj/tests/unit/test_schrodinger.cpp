#include <doctest.h>

#include "zsm/schrodinger/schrodinger.hpp"
#include "zsm/schrodinger/tridiagonal.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace zsm;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

const PhysicalConstants nat = make_constants(UnitSystem::natural);

ComplexField gaussian(const GridPtr& g, double x0, double sigma, double p) {
  auto psi = sample_complex(g, [&](const Grid& gr, Index n) {
    const double x = gr.coordinate(n, 0) - x0;
    return std::polar(std::exp(-x * x / (4 * sigma * sigma)), p * x);
  });
  return normalize(psi);
}

double variance(const ComplexField& psi) {
  const auto& g = psi.grid_ptr();
  Eigen::ArrayXd x(g->size());
  for (Index i = 0; i < g->size(); ++i) x(i) = g->coordinate(i, 0);
  const Eigen::ArrayXd rho = psi.values().abs2();
  const double m1 = integrate(g, rho * x);
  return integrate(g, rho * x * x) - m1 * m1;
}

double mean_position(const ComplexField& psi) {
  const auto& g = psi.grid_ptr();
  Eigen::ArrayXd x(g->size());
  for (Index i = 0; i < g->size(); ++i) x(i) = g->coordinate(i, 0);
  return integrate(g, psi.values().abs2() * x);
}

}  // namespace

TEST_CASE("Thomas and cyclic solvers match dense solves") {
  const int n = 9;
  Eigen::ArrayXcd lo(n), di(n), up(n), rhs(n);
  for (int i = 0; i < n; ++i) {
    lo(i) = cd(0.3 + 0.1 * i, -0.2);
    up(i) = cd(-0.4, 0.05 * i);
    di(i) = cd(3.0 + i, 0.7);
    rhs(i) = cd(std::sin(i), std::cos(2 * i));
  }
  for (bool cyclic : {false, true}) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      a(i, i) = di(i);
      if (i > 0) a(i, i - 1) = lo(i);
      if (i + 1 < n) a(i, i + 1) = up(i);
    }
    if (cyclic) {
      a(0, n - 1) = lo(0);
      a(n - 1, 0) = up(n - 1);
    }
    const Eigen::VectorXcd ref = a.fullPivLu().solve(rhs.matrix());
    const Eigen::ArrayXcd x = cyclic ? solve_cyclic_tridiagonal<cd>(lo, di, up, rhs)
                                     : solve_tridiagonal<cd>(lo, di, up, rhs);
    CHECK((x.matrix() - ref).norm() < 1e-12);
    CHECK((tridiagonal_apply<cd>(lo, di, up, x, cyclic).matrix() - rhs.matrix()).norm() < 1e-12);
  }
}

TEST_CASE("free Gaussian spreads per the closed-form law") {
  auto g = Grid::line(-40, 40, 2001, Boundary::absorbing);
  const double s0 = 1.0;
  auto psi0 = gaussian(g, 0.0, s0, 0.0);
  const double dt = 0.005;
  const int steps = 600;
  auto traj = evolve_linear(psi0, Potentials(g), dt, steps, nat);
  const double t = dt * steps;
  const double expected = s0 * s0 * (1 + std::pow(nat.hbar() * t / (2 * nat.mass() * s0 * s0), 2));
  CHECK(variance(traj.frames.back()) == doctest::Approx(expected).epsilon(2e-3));
}

TEST_CASE("ring eigenstate evolves by a pure phase") {
  const double r = 1.0;
  auto e1 = ring_eigenstate(1, r, 256, nat);
  auto g = e1.psi.grid_ptr();
  const double dt = 1e-3;
  auto traj = evolve_linear(e1.psi, Potentials(g), dt, 1000, nat);
  const double t = traj.times.back();
  double err = 0.0;
  for (Index i = 0; i < g->size(); ++i)
    err = std::max(err, std::abs(traj.frames.back().values()(i) - e1.psi.values()(i) * std::polar(1.0, -e1.energy * t)));
  CHECK(err < 1e-3 / std::sqrt(2 * pi));
}

TEST_CASE("harmonic ground state is stationary under evolution") {
  auto g = Grid::line(-10, 10, 401, Boundary::absorbing);
  auto v = sample(g, [](const Grid& gr, Index n) { return 0.5 * std::pow(gr.coordinate(n, 0), 2); });
  auto gs = line_ground_state(v, nat);
  auto traj = evolve_linear(gs.psi, Potentials(v), 0.01, 1000, nat, {.stride = 1000});
  const double drift = (traj.frames.back().values().abs2() - gs.psi.values().abs2()).abs().maxCoeff();
  CHECK(drift <= 1e-8);
  CHECK(gs.energy == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("unitarity and time reversal") {
  SUBCASE("line, reflecting ends, harmonic potential") {
    auto g = Grid::line(-8, 8, 513, Boundary::reflecting);
    auto v = sample(g, [](const Grid& gr, Index n) { return 0.5 * std::pow(gr.coordinate(n, 0), 2); });
    auto psi0 = gaussian(g, 1.0, 0.7, 1.5);
    auto fwd = evolve_linear(psi0, Potentials(v), 0.002, 1000, nat, {.stride = 1000});
    CHECK(std::abs(norm_squared(fwd.frames.back()) - 1.0) <= 1e-8);
    auto back = evolve_linear(fwd.frames.back(), Potentials(v), -0.002, 1000, nat, {.stride = 1000});
    CHECK((back.frames.back().values() - psi0.values()).abs().maxCoeff() <= 1e-6);
  }
  SUBCASE("ring") {
    auto g = Grid::ring(2.0, 256);
    auto psi0 = gaussian(g, 6.0, 0.8, 2.0);
    auto fwd = evolve_linear(psi0, Potentials(g), 0.004, 1000, nat, {.stride = 1000});
    CHECK(std::abs(norm_squared(fwd.frames.back()) - 1.0) <= 1e-8);
    auto back = evolve_linear(fwd.frames.back(), Potentials(g), -0.004, 1000, nat, {.stride = 1000});
    CHECK((back.frames.back().values() - psi0.values()).abs().maxCoeff() <= 1e-6);
  }
  SUBCASE("plane, split Cayley steps") {
    auto g = Grid::plane(Grid::plane_axis(-6, 6, 65, Boundary::reflecting),
                         Grid::plane_axis(-6, 6, 64, Boundary::periodic));
    auto v = sample(g, [](const Grid& gr, Index n) { return 0.3 * gr.cartesian(n).squaredNorm(); });
    auto psi0 = normalize(sample_complex(g, [](const Grid& gr, Index n) {
      const auto p = gr.cartesian(n);
      return std::polar(std::exp(-0.5 * (p - Eigen::Vector2d(0.5, -0.3)).squaredNorm()), 0.8 * p(1));
    }));
    auto fwd = evolve_linear(psi0, Potentials(v), 0.01, 200, nat, {.stride = 200});
    CHECK(std::abs(norm_squared(fwd.frames.back()) - 1.0) <= 1e-10);
    auto back = evolve_linear(fwd.frames.back(), Potentials(v), -0.01, 200, nat, {.stride = 200});
    CHECK((back.frames.back().values() - psi0.values()).abs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("rest energy is a global phase") {
  auto g = Grid::line(-10, 10, 201, Boundary::reflecting);
  const auto k = make_constants(UnitSystem::natural, {{"c", 3.0}});
  auto psi0 = gaussian(g, 0.0, 1.0, 1.0);
  auto a = evolve_linear(psi0, Potentials(g), 0.01, 50, k, {.stride = 50});
  auto b = evolve_linear(psi0, Potentials(g), 0.01, 50, k, {.rest_energy = true, .stride = 50});
  const cd phase = std::polar(1.0, -k.rest_energy() * 0.5 / k.hbar());
  CHECK((b.frames.back().values() - phase * a.frames.back().values()).abs().maxCoeff() < 1e-12);
  CHECK((b.frames.back().values().abs2() - a.frames.back().values().abs2()).abs().maxCoeff() < 1e-14);
}

TEST_CASE("evolution preconditions") {
  auto g = Grid::line(-5, 5, 64, Boundary::reflecting);
  auto psi = gaussian(g, 0, 1, 0);
  ComplexField twice(g, 2.0 * psi.values());
  CHECK_THROWS_AS(evolve_linear(twice, Potentials(g), 0.01, 1, nat), InvalidArgument);
  Eigen::ArrayXXd a = Eigen::ArrayXXd::Ones(64, 1);
  auto with_a = Potentials(g).with_vector_potential(VectorField(g, a));
  CHECK_THROWS_AS(evolve_linear(psi, with_a, 0.01, 1, nat), UnsupportedFeature);
  auto pg = Grid::polar(1.0, 16, 16);
  auto ppsi = normalize(sample_complex(pg, [](const Grid&, Index) { return cd(1.0, 0.0); }));
  CHECK_THROWS_AS(evolve_linear(ppsi, Potentials(pg), 0.01, 1, nat), UnsupportedFeature);
}

TEST_CASE("nonlinear classical evolution translates a Gaussian without spreading") {
  auto g = Grid::line(-20, 40, 3001, Boundary::absorbing);
  const double s0 = 0.5, p = 4.0;
  auto psi0 = gaussian(g, 0.0, s0, p);
  const double dt = 0.002;
  const int steps = 1000;
  auto nl = evolve_nonlinear_classical(psi0, Potentials(g), dt, steps, nat, {.stride = steps});
  auto lin = evolve_linear(psi0, Potentials(g), dt, steps, nat, {.stride = steps});
  const double w0 = std::sqrt(variance(psi0));
  const double w_nl = std::sqrt(variance(nl.frames.back()));
  const double w_lin = std::sqrt(variance(lin.frames.back()));
  CHECK(std::abs(w_nl / w0 - 1.0) < 0.01);
  CHECK(w_lin / w0 - 1.0 > 0.2);
  CHECK(mean_position(nl.frames.back()) == doctest::Approx(p * dt * steps).epsilon(1e-2));
  CHECK(std::abs(norm_squared(nl.frames.back()) - 1.0) < 1e-10 * steps);
}

TEST_CASE("nonlinear solver reduces to the linear one for constant amplitude") {
  auto g = Grid::ring(1.0, 128);
  auto psi0 = normalize(sample_complex(g, [](const Grid& gr, Index n) { return std::polar(1.0, 3.0 * gr.coordinate(n, 0)); }));
  auto a = evolve_linear(psi0, Potentials(g), 0.01, 100, nat, {.stride = 100});
  auto b = evolve_nonlinear_classical(psi0, Potentials(g), 0.01, 100, nat, {.stride = 100});
  CHECK((a.frames.back().values() - b.frames.back().values()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("nonlinear solver aborts when a node forms") {
  // two counter-propagating packets interfere and carve nodes into the support
  auto g = Grid::line(-15, 15, 1501, Boundary::absorbing);
  auto psi0 = normalize(sample_complex(g, [](const Grid& gr, Index n) {
    const double x = gr.coordinate(n, 0);
    return std::polar(std::exp(-x * x / 4.0), 0.0) * (1.0 + 0.9 * std::cos(6.0 * x));
  }));
  auto v = sample(g, [](const Grid& gr, Index n) { return 20.0 * std::cos(6.0 * gr.coordinate(n, 0)); });
  CHECK_THROWS_AS(evolve_nonlinear_classical(psi0, Potentials(v), 0.005, 400, nat, {.node_floor = 1e-3}),
                  NodeFormationError);
}

TEST_CASE("ring eigenstate examples") {
  auto e0 = ring_eigenstate(0, 1.0, 64, nat);
  CHECK(e0.energy == 0.0);
  CHECK((e0.psi.values() - e0.psi.values()(0)).abs().maxCoeff() < 1e-15);
  CHECK(ring_eigenstate(1, 1.0, 64, nat).energy == doctest::Approx(0.5));
  CHECK(ring_eigenstate(3, 2.0, 64, nat).energy == doctest::Approx(9.0 / 8.0));
  CHECK(ring_eigenstate(3, 2.0, 256, nat).residual < 2e-3);
}

TEST_CASE("ring spectrum approaches n^2 / 2 r^2 with doubled levels") {
  auto ev = ring_spectrum(1.0, 512, nat);
  CHECK(std::abs(ev(0)) < 1e-12);
  for (int n = 1; n <= 5; ++n) {
    const double e = 0.5 * n * n;
    CHECK(ev(2 * n - 1) == doctest::Approx(e).epsilon(1e-3));
    CHECK(ev(2 * n) == doctest::Approx(e).epsilon(1e-3));
  }
}

namespace {

/// Dense oracle: the same radial discretisation assembled as a full matrix.
double dense_radial_lowest(const Grid& g, const Eigen::ArrayXd& v, double w) {
  const int n = g.count(0);
  const double dr = g.axis(0).spacing;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) * dr, rp = (i + 1) * dr, rm = i * dr;
    a(i, i) = 0.5 / (dr * dr) * (rp * (i == n - 1 ? 2 : 1) + rm) / r + 0.5 * w * w / (r * r) + v(i);
    if (i + 1 < n) a(i, i + 1) = -0.5 / (dr * dr) * rp / r;
    if (i > 0) a(i, i - 1) = -0.5 / (dr * dr) * rm / r;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().real().minCoeff();
}

}  // namespace

TEST_CASE("central eigenstates of the 2-D harmonic oscillator") {
  auto g = Grid::polar(8.0, 160, 16);
  auto v = sample(g, [](const Grid& gr, Index n) { return 0.5 * std::pow(gr.coordinate(n, 0), 2); });
  const Eigen::ArrayXd vr = radial_profile(v);
  auto s0 = central_eigenstate(v, 0, nat);
  auto s1 = central_eigenstate(v, 1, nat);
  CHECK(s0.energy == doctest::Approx(dense_radial_lowest(*g, vr, 0.0)).epsilon(1e-10));
  CHECK(s1.energy == doctest::Approx(dense_radial_lowest(*g, vr, 1.0)).epsilon(1e-10));
  CHECK(s0.energy == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(s1.energy == doctest::Approx(2.0).epsilon(2e-3));
  CHECK(s0.residual <= 1e-10);
  CHECK(std::abs(norm_squared(s1.psi) - 1.0) < 1e-12);
  // non-integer windings interpolate between sectors
  auto half = radial_ground_state(*g, vr, 0.5, nat);
  CHECK(half.energy > s0.energy);
  CHECK(half.energy < s1.energy);
  CHECK(half.energy == doctest::Approx(1.5).epsilon(1e-2));
}

TEST_CASE("hard-wall disk ground state matches the first Bessel zero") {
  // root-finding oracle: bisection on J0
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::cyl_bessel_j(0.0, mid) > 0 ? lo : hi) = mid;
  }
  const double j01 = 0.5 * (lo + hi);
  auto g = Grid::polar(1.0, 400, 8);
  auto v = sample(g, [](const Grid&, Index) { return 0.0; });
  auto s = central_eigenstate(v, 0, nat);
  CHECK(s.energy == doctest::Approx(0.5 * j01 * j01).epsilon(1e-4));
}

TEST_CASE("central eigenstate preconditions") {
  auto g = Grid::polar(2.0, 32, 16);
  auto v = sample(g, [](const Grid& gr, Index n) { return gr.cartesian(n)(0); });
  CHECK_THROWS_AS(central_eigenstate(v, 0, nat), InvalidArgument);
  auto line = Grid::line(-1, 1, 16, Boundary::reflecting);
  CHECK_THROWS_AS(central_eigenstate(ScalarField(line, Eigen::ArrayXd::Zero(16)), 0, nat), InvalidArgument);
}
