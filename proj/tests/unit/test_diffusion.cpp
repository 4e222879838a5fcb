#include <doctest.h>

#include "zsm/core/operators.hpp"
#include "zsm/diffusion/diffusion.hpp"
#include "zsm/fields/fields.hpp"
#include "zsm/schrodinger/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

using namespace zsm;
using std::numbers::pi;

namespace {

const PhysicalConstants nat = make_constants(UnitSystem::natural);

ScalarField gaussian_density(const GridPtr& g, double x0, double s) {
  return normalize_density(sample(g, [&](const Grid& gr, Index n) {
    const double x = gr.coordinate(n, 0) - x0;
    return std::exp(-x * x / (2 * s * s));
  }));
}

double sample_variance(const Eigen::ArrayXd& x) {
  const double m = x.mean();
  return (x - m).square().sum() / static_cast<double>(x.size() - 1);
}

double grid_moment(const ScalarField& rho, int power) {
  Eigen::ArrayXd x(rho.size());
  for (Index i = 0; i < rho.size(); ++i) x(i) = rho.grid().coordinate(i, 0);
  return integrate(rho.grid_ptr(), rho.values() * x.pow(power));
}

VectorField constant_drift(const GridPtr& g, double bx, double by = 0.0) {
  Eigen::ArrayXXd b(g->size(), g->dim());
  b.col(0).setConstant(bx);
  if (g->dim() == 2) b.col(1).setConstant(by);
  return {g, b};
}

}  // namespace

TEST_CASE("Philox4x32-10 reproduces the published known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter streams give unit normals and open-interval uniforms") {
  CounterRng rng(42, 7, 3);
  const int n = 200000;
  double s = 0, s2 = 0, umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    const double u = rng.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
  }
  CHECK(std::abs(s / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  CounterRng a(1, 2, 3), b(1, 2, 4), c(1, 2, 3);
  const double first = a.uniform();
  CHECK(first != b.uniform());
  CHECK(first == c.uniform());
}

TEST_CASE("uniform ring density samples pass a KS test") {
  const auto g = Grid::ring(1.5, 128);
  const ScalarField rho = normalize_density(sample(g, [](const Grid&, Index) { return 1.0; }));
  const auto ens = sample_ensemble(rho, 100000, 11);
  std::vector<double> u(ens.size());
  const double L = 2 * pi * 1.5;
  for (Index i = 0; i < ens.size(); ++i) {
    REQUIRE(ens.positions(i, 0) >= 0.0);
    REQUIRE(ens.positions(i, 0) < L);
    u[i] = ens.positions(i, 0) / L;
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    ks = std::max({ks, std::abs((i + 1) / n - u[i]), std::abs(u[i] - i / n)});
  CHECK(ks < 0.01);
}

TEST_CASE("narrow Gaussian sample mean and determinism") {
  const auto g = Grid::line(-5, 5, 401, Boundary::reflecting);
  const auto rho = gaussian_density(g, 0.7, 0.2);
  const Index n = 20000;
  const auto a = sample_ensemble(rho, n, 5);
  CHECK(std::abs(a.positions.col(0).mean() - 0.7) < 5 * 0.2 / std::sqrt(double(n)));
  CHECK(std::sqrt(sample_variance(a.positions.col(0))) == doctest::Approx(0.2).epsilon(0.03));
  const auto b = sample_ensemble(rho, n, 5);
  CHECK((a.positions == b.positions).all());
  const auto c = sample_ensemble(rho, n, 6);
  CHECK(!(a.positions == c.positions).all());
}

TEST_CASE("2-D rejection sampling and its acceptance guard") {
  const auto g = Grid::plane(Grid::plane_axis(-4, 4, 65, Boundary::reflecting),
                             Grid::plane_axis(-4, 4, 65, Boundary::reflecting));
  const auto rho = normalize_density(sample(g, [](const Grid& gr, Index n) {
    const auto p = gr.cartesian(n);
    return std::exp(-(std::pow(p(0) - 0.5, 2) + std::pow(p(1) + 0.3, 2)) / 2);
  }));
  const auto ens = sample_ensemble(rho, 20000, 3);
  CHECK(std::abs(ens.positions.col(0).mean() - 0.5) < 5 / std::sqrt(20000.0));
  CHECK(std::abs(ens.positions.col(1).mean() + 0.3) < 5 / std::sqrt(20000.0));
  CHECK(sample_variance(ens.positions.col(1)) == doctest::Approx(1.0).epsilon(0.05));

  const auto big = Grid::plane(Grid::plane_axis(-100, 100, 201, Boundary::reflecting),
                               Grid::plane_axis(-100, 100, 201, Boundary::reflecting));
  const auto spike = sample(big, [](const Grid& gr, Index n) { return n == gr.index(100, 100) ? 1.0 : 0.0; });
  CHECK_THROWS_AS(sample_ensemble(spike, 10, 1), InvalidArgument);

  const auto disk = Grid::polar(2.0, 16, 32);
  const auto flat = sample(disk, [](const Grid&, Index) { return 1.0; });
  const auto d = sample_ensemble(flat, 5000, 9);
  CHECK((d.positions.rowwise().norm() <= 2.0).all());
}

TEST_CASE("pure noise step has displacement variance 2 nu dt per axis") {
  const auto g = Grid::plane(Grid::plane_axis(-10, 10, 32, Boundary::periodic),
                             Grid::plane_axis(-10, 10, 32, Boundary::periodic));
  EnsembleState ens;
  ens.grid = g;
  ens.seed = 99;
  const Index n = 100000;
  ens.positions = Eigen::ArrayXXd::Zero(n, 2);
  ens.alive = AliveFlags::Constant(n, true);
  const double dt = 0.02;
  const auto next = step_sde(ens, zero_vector_field(g), dt, nat, Direction::forward);
  const double var = 2 * nat.diffusion() * dt;
  for (int a = 0; a < 2; ++a) {
    Eigen::ArrayXd d = next.positions.col(a);
    for (Index i = 0; i < n; ++i) d(i) = d(i) - 20.0 * std::round(d(i) / 20.0);
    CHECK(std::abs(d.square().mean() - var) < 5 * var * std::sqrt(2.0 / n));
  }
}

TEST_CASE("zero-diffusion hook translates by the drift exactly") {
  const auto g = Grid::plane(Grid::plane_axis(0, 10, 32, Boundary::periodic),
                             Grid::plane_axis(0, 10, 32, Boundary::periodic));
  const auto rho = normalize_density(sample(g, [](const Grid&, Index) { return 1.0; }));
  auto ens = sample_ensemble(rho, 1000, 4);
  SdeOptions opt;
  opt.diffusion_override = 0.0;
  const auto next = step_sde(ens, constant_drift(g, 0.3, -0.2), 0.1, nat, Direction::forward, opt);
  for (Index i = 0; i < ens.size(); ++i) {
    const double dx = std::remainder(next.positions(i, 0) - ens.positions(i, 0), 10.0);
    const double dy = std::remainder(next.positions(i, 1) - ens.positions(i, 1), 10.0);
    REQUIRE(dx == doctest::Approx(0.03).epsilon(1e-10));
    REQUIRE(dy == doctest::Approx(-0.02).epsilon(1e-10));
  }
  const auto back = step_sde(next, constant_drift(g, 0.3, -0.2), 0.1, nat, Direction::backward, opt);
  CHECK(back.time == doctest::Approx(0.0));
  for (Index i = 0; i < ens.size(); ++i)
    REQUIRE(std::remainder(back.positions(i, 0) - ens.positions(i, 0), 10.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("particle stepping is bit-identical across thread counts") {
  const auto g = Grid::line(-6, 6, 241, Boundary::reflecting);
  const auto rho = gaussian_density(g, 0, 1);
  const auto u = osmotic_velocity(rho, nat);
  const auto ens = sample_ensemble(rho, 5000, 17);
  SimulationOptions opt;
  opt.dt = 0.01;
  opt.steps = 20;
  opt.store_increments = true;
  const auto one = simulate(ens, [&](double) { return u; }, nat, opt);
  opt.sde.threads = 4;
  const auto four = simulate(ens, [&](double) { return u; }, nat, opt);
  REQUIRE(one.frames.size() == four.frames.size());
  for (std::size_t f = 0; f < one.frames.size(); ++f) CHECK((one.frames[f] == four.frames[f]).all());
  CHECK(one.wiener.sum == four.wiener.sum);
}

TEST_CASE("reflecting and absorbing walls") {
  const auto g = Grid::line(0, 1, 33, Boundary::reflecting);
  EnsembleState ens;
  ens.grid = g;
  ens.positions = Eigen::ArrayXXd::Constant(2000, 1, 0.02);
  ens.alive = AliveFlags::Constant(2000, true);
  const auto next = step_sde(ens, zero_vector_field(g), 0.01, nat, Direction::forward);
  CHECK((next.positions >= 0.0).all());
  CHECK((next.positions <= 1.0).all());
  CHECK(next.removed == 0);
  const auto ga = Grid::line(0, 1, 33, Boundary::absorbing);
  ens.grid = ga;
  const auto dead = step_sde(ens, zero_vector_field(ga), 0.01, nat, Direction::forward);
  CHECK(dead.removed > 0);
  CHECK(dead.removed == (dead.alive == false).count());

  const auto disk = Grid::polar(1.0, 16, 32, Boundary::reflecting);
  EnsembleState d;
  d.grid = disk;
  d.positions = Eigen::ArrayXXd::Zero(2000, 2);
  d.positions.col(0).setConstant(0.98);
  d.alive = AliveFlags::Constant(2000, true);
  const auto dn = step_sde(d, zero_vector_field(disk), 0.01, nat, Direction::forward);
  CHECK((dn.positions.rowwise().norm() <= 1.0 + 1e-12).all());
}

TEST_CASE("osmotic drift keeps a static density stationary") {
  const auto g = Grid::line(-6, 6, 241, Boundary::reflecting);
  const auto rho = gaussian_density(g, 0, 1);
  const auto u = osmotic_velocity(rho, nat);
  const auto ens = sample_ensemble(rho, 20000, 23);
  SimulationOptions opt;
  opt.dt = 0.005;
  opt.steps = 200;
  opt.frame_stride = 200;
  const auto bundle = simulate(ens, [&](double) { return u; }, nat, opt);
  EnsembleState last = ens;
  last.positions = bundle.frames.back();
  last.alive = bundle.alive.back();
  const auto est = empirical_density(last, g);
  CHECK(l1_distance(est, rho) < 0.05);
  const auto w = wiener_check(bundle.wiener, 1, nat.diffusion(), opt.dt);
  CHECK(w.passed);
  CHECK(w.samples == 20000 * 200);
}

TEST_CASE("trajectory files round-trip") {
  const auto g = Grid::plane(Grid::plane_axis(-3, 3, 16, Boundary::periodic),
                             Grid::plane_axis(-2, 2, 12, Boundary::reflecting));
  const auto rho = normalize_density(sample(g, [](const Grid&, Index) { return 1.0; }));
  SimulationOptions opt;
  opt.dt = 0.01;
  opt.steps = 6;
  opt.frame_stride = 2;
  opt.store_increments = true;
  opt.direction = Direction::backward;
  const auto b = simulate(sample_ensemble(rho, 300, 8), [&](double) { return constant_drift(g, 0.1, 0.2); },
                          nat, opt);
  const std::string path = "zsm_test_trajectory.zsmt";
  write_trajectory(path, b);
  const auto r = read_trajectory(path);
  std::remove(path.c_str());
  CHECK(*r.grid == *b.grid);
  CHECK(r.direction == Direction::backward);
  CHECK(r.frame_stride == 2);
  CHECK(r.times == b.times);
  REQUIRE(r.frames.size() == 4);
  for (std::size_t f = 0; f < r.frames.size(); ++f) {
    CHECK((r.frames[f] == b.frames[f]).all());
    CHECK((r.alive[f] == b.alive[f]).all());
  }
  REQUIRE(r.increments.size() == 6);
  CHECK((r.increments[5] == b.increments[5]).all());
  CHECK(r.wiener.outer == b.wiener.outer);
  CHECK(b.times.back() == doctest::Approx(-0.06));
}

TEST_CASE("heat kernel: Fokker-Planck variance grows by 2 nu dt per step") {
  const auto g = Grid::line(-20, 20, 800, Boundary::periodic);
  auto rho = gaussian_density(g, 0.0, 1.0);
  const double dt = 0.05, nu = nat.diffusion();
  const auto b = zero_vector_field(g);
  for (int s = 0; s < 10; ++s) {
    const double m0 = grid_moment(rho, 2) - std::pow(grid_moment(rho, 1), 2);
    rho = fokker_planck_step(rho, b, dt, nat, Direction::forward);
    const double m1 = grid_moment(rho, 2) - std::pow(grid_moment(rho, 1), 2);
    CHECK(m1 - m0 == doctest::Approx(2 * nu * dt).epsilon(1e-9));
  }
  CHECK(integrate(rho) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("osmotic drift is an exact Fokker-Planck equilibrium") {
  const auto line = Grid::line(-6, 6, 201, Boundary::reflecting);
  const auto rho = gaussian_density(line, 0.5, 0.8);
  const auto u = osmotic_velocity(rho, nat);
  const auto next = fokker_planck_step(rho, u, 0.05, nat, Direction::forward);
  CHECK((next.values() - rho.values()).abs().maxCoeff() < 1e-8);

  const auto plane = Grid::plane(Grid::plane_axis(-5, 5, 41, Boundary::periodic),
                                 Grid::plane_axis(-5, 5, 41, Boundary::reflecting));
  const auto r2 = normalize_density(sample(plane, [](const Grid& gr, Index n) {
    const auto p = gr.cartesian(n);
    return std::exp(-p.squaredNorm() / 2) * (1.2 + std::cos(p(0)));
  }));
  const auto u2 = osmotic_velocity(r2, nat);
  const auto n2 = fokker_planck_step(r2, u2, 0.05, nat, Direction::forward);
  CHECK((n2.values() - r2.values()).abs().maxCoeff() < 1e-8);
}

TEST_CASE("forward and backward rates average to the continuity update") {
  const auto g = Grid::ring(1.0, 96);
  const auto rho = normalize_density(sample(g, [](const Grid& gr, Index n) {
    const double s = gr.coordinate(n, 0);
    return 1.5 + std::sin(s) + 0.3 * std::cos(3 * s);
  }));
  const auto u = osmotic_velocity(rho, nat);
  Eigen::ArrayXXd v(g->size(), 1);
  for (Index i = 0; i < g->size(); ++i) v(i, 0) = 0.4 + 0.2 * std::sin(2 * g->coordinate(i, 0));
  const VectorField vf(g, v);
  const auto fwd = fokker_planck_rate(rho, add(vf, u), nat, Direction::forward);
  const auto bwd = fokker_planck_rate(rho, subtract(vf, u), nat, Direction::backward);
  Eigen::ArrayXXd flux = v.colwise() * rho.values();
  const auto cont = divergence(VectorField(g, flux));
  CHECK((0.5 * (fwd.values() + bwd.values()) + cont.values()).abs().maxCoeff() < 1e-10);
}

TEST_CASE("stationary ring state survives forward then backward Fokker-Planck steps") {
  const auto state = ring_eigenstate(2, 1.0, 64, nat);
  const auto pd = polar_decompose(state.psi, nat);
  const auto kin = kinematic_fields(pd.rho, pd.phase, nat);
  const auto fwd = fokker_planck_step(pd.rho, kin.forward, 0.1, nat, Direction::forward);
  const auto back = fokker_planck_step(fwd, kin.backward, 0.1, nat, Direction::backward);
  CHECK((fwd.values() - pd.rho.values()).abs().maxCoeff() < 1e-8);
  CHECK((back.values() - pd.rho.values()).abs().maxCoeff() < 1e-8);
}

TEST_CASE("Fokker-Planck mass conservation, absorbing walls, polar guard") {
  const auto g = Grid::line(0, 4, 81, Boundary::reflecting);
  auto rho = gaussian_density(g, 1.0, 0.4);
  Eigen::ArrayXXd b(g->size(), 1);
  for (Index i = 0; i < g->size(); ++i) b(i, 0) = 2.0 * std::sin(3 * g->coordinate(i, 0));
  FokkerPlanckReport rep;
  for (int s = 0; s < 20; ++s) rho = fokker_planck_step(rho, VectorField(g, b), 0.05, nat, Direction::forward, &rep);
  CHECK(integrate(rho) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.courant == doctest::Approx(2.0 * 0.05 / 0.05).epsilon(0.01));
  CHECK(!rep.warnings.empty());

  const auto ga = Grid::line(0, 4, 81, Boundary::absorbing);
  auto ra = gaussian_density(ga, 0.5, 0.3);
  for (int s = 0; s < 10; ++s) ra = fokker_planck_step(ra, zero_vector_field(ga), 0.05, nat, Direction::forward);
  CHECK(integrate(ra) < 0.99);
  CHECK(std::abs(ra.values()(0)) < 1e-14);

  const auto disk = Grid::polar(1.0, 8, 16);
  const auto flat = sample(disk, [](const Grid&, Index) { return 1.0; });
  CHECK_THROWS_AS(fokker_planck_step(flat, zero_vector_field(disk), 0.1, nat, Direction::forward),
                  UnsupportedFeature);
}

TEST_CASE("mean forward derivative of q recovers a constant drift") {
  const auto g = Grid::line(0, 4, 41, Boundary::periodic);
  const auto rho = normalize_density(sample(g, [](const Grid&, Index) { return 1.0; }));
  SimulationOptions opt;
  opt.dt = 0.01;
  opt.steps = 10;
  const auto paths = simulate(sample_ensemble(rho, 20000, 31), [&](double) { return constant_drift(g, 0.8); },
                              nat, opt);
  const auto est = mean_derivative(paths, Direction::forward);
  CHECK(est.masked_bins == 0);
  int within = 0;
  for (Index i = 0; i < g->size(); ++i)
    within += std::abs(est.mean.values()(i, 0) - 0.8) < 2 * est.standard_error.values()(i, 0);
  CHECK(within >= 0.85 * g->size());
  double pooled = 0;
  for (Index i = 0; i < g->size(); ++i) pooled += est.mean.values()(i, 0) * est.counts(i);
  pooled /= est.counts.sum();
  CHECK(std::abs(pooled - 0.8) < 5 * std::sqrt(2 * nat.diffusion() / opt.dt / est.pairs));
}

TEST_CASE("mean derivative of a static linear field vanishes without drift") {
  const auto g = Grid::line(-10, 10, 81, Boundary::reflecting);
  const auto rho = gaussian_density(g, 0, 1);
  SimulationOptions opt;
  opt.dt = 0.01;
  opt.steps = 5;
  const auto paths = simulate(sample_ensemble(rho, 20000, 41), [&](double) { return zero_vector_field(g); },
                              nat, opt);
  const auto f = sample(g, [](const Grid& gr, Index n) { return gr.coordinate(n, 0); });
  const auto est = mean_derivative(paths, f, Direction::forward);
  int used = 0, within = 0;
  for (Index i = 0; i < g->size(); ++i) {
    if (est.mean.masked(i)) continue;
    ++used;
    within += std::abs(est.mean.values()(i, 0)) < 2 * est.standard_error.values()(i, 0);
  }
  CHECK(used > 10);
  CHECK(within >= 0.85 * used);
  CHECK(est.masked_bins > 0);
}

TEST_CASE("half difference of mean derivatives is the osmotic velocity") {
  const auto g = Grid::line(-5, 5, 41, Boundary::reflecting);
  const auto rho = gaussian_density(g, 0, 1);
  const auto u = osmotic_velocity(rho, nat);
  SimulationOptions opt;
  opt.dt = 0.002;
  opt.steps = 20;
  const auto paths = simulate(sample_ensemble(rho, 40000, 51), [&](double) { return u; }, nat, opt);
  const auto d = mean_derivative(paths, Direction::forward);
  const auto ds = mean_derivative(paths, Direction::backward);
  int used = 0, within = 0;
  for (Index i = 0; i < g->size(); ++i) {
    if (d.mean.masked(i) || ds.mean.masked(i)) continue;
    ++used;
    const double est = 0.5 * (d.mean.values()(i, 0) - ds.mean.values()(i, 0));
    const double se = 0.5 * std::hypot(d.standard_error.values()(i, 0), ds.standard_error.values()(i, 0));
    within += std::abs(est - u.values()(i, 0)) < 2 * se;
  }
  CHECK(used > 15);
  CHECK(within >= 0.85 * used);
}

TEST_CASE("mean acceleration of a free plane wave vanishes") {
  const auto state = ring_eigenstate(3, 1.0, 64, nat);
  const auto pd = polar_decompose(state.psi, nat);
  const auto rep = mean_acceleration(pd.rho, pd.phase, Potentials(pd.rho.grid_ptr()), nat);
  CHECK(rep.residual_max < 1e-10);
  CHECK(rep.acceleration.values().abs().maxCoeff() < 1e-10);
  AccelerationOptions opt;
  opt.stationary = false;
  CHECK_THROWS_AS(mean_acceleration(pd.rho, pd.phase, Potentials(pd.rho.grid_ptr()), nat, opt),
                  InvalidArgument);
}

TEST_CASE("harmonic ground state mean acceleration residual is second order") {
  double prev = 0.0;
  for (int n : {101, 201, 401}) {
    const auto g = Grid::line(-6, 6, n, Boundary::reflecting);
    const auto v = sample(g, [](const Grid& gr, Index i) { return 0.5 * std::pow(gr.coordinate(i, 0), 2); });
    const auto gs = line_ground_state(v, nat);
    const auto rho = density(gs.psi);
    const auto S = PhaseField::from_function(g, [](double, double) { return 0.0; }, nat);
    AccelerationOptions opt;
    opt.node_floor = 1e-6;
    const auto rep = mean_acceleration(rho, S, Potentials(v), nat, opt);
    if (prev > 0.0) CHECK(prev / rep.residual_l2 > 3.0);
    prev = rep.residual_l2;
  }
}

TEST_CASE("kernel density estimates converge") {
  const auto ring = Grid::ring(1.0, 128);
  const auto flat = normalize_density(sample(ring, [](const Grid&, Index) { return 1.0; }));
  CHECK(l1_distance(empirical_density(sample_ensemble(flat, 100000, 2), ring), flat) < 0.05);

  const auto g = Grid::line(-6, 6, 241, Boundary::reflecting);
  const auto rho = gaussian_density(g, 0.3, 1.0);
  const double big = l1_distance(empirical_density(sample_ensemble(rho, 100000, 3), g), rho);
  const double small = l1_distance(empirical_density(sample_ensemble(rho, 100, 3), g), rho);
  CHECK(big < 0.05);
  CHECK(big < small);
  CHECK_THROWS_AS(empirical_density(sample_ensemble(rho, 100, 3), g, 0.0), InvalidArgument);
  CHECK_THROWS_AS(empirical_density(sample_ensemble(rho, 50, 3), g), InvalidArgument);

  const auto plane = Grid::plane(Grid::plane_axis(-5, 5, 41, Boundary::reflecting),
                                 Grid::plane_axis(-5, 5, 41, Boundary::reflecting));
  const auto r2 = normalize_density(sample(plane, [](const Grid& gr, Index n) {
    return std::exp(-gr.cartesian(n).squaredNorm() / 2);
  }));
  CHECK(l1_distance(empirical_density(sample_ensemble(r2, 100000, 4), plane), r2) < 0.05);
}

TEST_CASE("node audit: node-free state clean, pure noise on a nodal state flagged") {
  const auto g = Grid::line(-6, 6, 241, Boundary::reflecting);
  const auto rho = gaussian_density(g, 0, 1);
  const auto u = osmotic_velocity(rho, nat);
  SimulationOptions opt;
  opt.dt = 0.01;
  opt.steps = 50;
  const auto paths = simulate(sample_ensemble(rho, 2000, 61), [&](double) { return u; }, nat, opt);
  const auto clean = node_avoidance_audit(paths, {rho});
  CHECK(clean.entries == 0);
  CHECK(clean.samples == 2000 * 51);
  CHECK(clean.min_rho > 0.0);

  const auto ring = Grid::ring(1.0, 128);
  const auto nodal = normalize_density(sample(ring, [](const Grid& gr, Index n) {
    return std::pow(std::sin(2 * gr.coordinate(n, 0)), 2);
  }));
  const auto noise = simulate(sample_ensemble(nodal, 2000, 62), [&](double) { return zero_vector_field(ring); },
                              nat, opt);
  const auto flagged = node_avoidance_audit(noise, {nodal});
  CHECK(flagged.entries > 0);
  CHECK(flagged.min_rho_relative < 1e-3);
}
