#include <doctest.h>

#include "zsm/zbw/zbw.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace zsm;
using std::numbers::pi;

namespace {

const PhysicalConstants nat = make_constants(UnitSystem::natural);
const PhysicalConstants si = make_constants(UnitSystem::si);

ScalarField constant_field(const GridPtr& g, double value) {
  return ScalarField(g, Eigen::ArrayXd::Constant(g->size(), value));
}

ClassicalPath straight(const Eigen::Vector2d& v, double T, int n) {
  ClassicalPath p;
  for (int i = 0; i <= n; ++i) {
    const double t = T * i / n;
    p.times.push_back(t);
    p.positions.push_back(v * t);
  }
  return p;
}

/// Smooth path with every kind of coupling switched on.
ClassicalPath wiggle(int n) {
  ClassicalPath p;
  for (int i = 0; i <= n; ++i) {
    const double t = 2.0 * i / n;
    const Eigen::Vector2d q(0.3 * std::cos(t), 0.2 * std::sin(2 * t));
    p.times.push_back(t);
    p.positions.push_back(q);
    p.velocities.emplace_back(-0.3 * std::sin(t), 0.4 * std::cos(2 * t));
    p.gravitational.push_back(0.05 * q(1));
    p.electric.push_back(-0.1 / (1.0 + q.squaredNorm()));
    p.vector_potential.emplace_back(-0.5 * q(1), 0.5 * q(0));
  }
  return p;
}

}  // namespace

TEST_CASE("zbw phase of a particle at rest advances at the Compton frequency") {
  const auto rec = phase_accumulate(straight(Eigen::Vector2d::Zero(), 7.5, 50), nat, true);
  CHECK(rec.theta.back() == doctest::Approx(nat.compton_frequency() * 7.5).epsilon(1e-14));
  CHECK(rec.gamma.front() == 1.0);
}

TEST_CASE("free non-relativistic and relativistic actions match the closed forms") {
  const Eigen::Vector2d v(0.3, 0.1);
  const double phi = 0.4;
  const auto path = straight(v, 3.0, 60);
  const auto nr = phase_accumulate(path, nat, false, phi);
  const auto rel = phase_accumulate(path, nat, true, phi);
  const double g = 1.0 / std::sqrt(1.0 - v.squaredNorm());
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double t = path.times[i];
    const Eigen::Vector2d& q = path.positions[i];
    CHECK(nr.action[i] == doctest::Approx(v.dot(q) - (1.0 + 0.5 * v.squaredNorm()) * t - phi).epsilon(1e-12));
    CHECK(rel.action[i] == doctest::Approx(g * v.dot(q) - g * t - phi).epsilon(1e-12));
    CHECK(rel.action[i] == doctest::Approx(rel.lagrangian_action[i]).epsilon(1e-12));
    CHECK(nr.theta[i] == doctest::Approx(-nr.action[i]));
  }
}

TEST_CASE("accumulated phase equals the Lagrangian action with fields") {
  for (bool relativistic : {false, true}) {
    double prev = 0.0;
    for (int n : {200, 400}) {
      const auto rec = phase_accumulate(wiggle(n), nat, relativistic);
      const double err = std::abs(rec.action.back() - rec.lagrangian_action.back());
      CHECK(err < 1e-4);
      if (prev > 0.0) CHECK(prev / err > 3.5);
      prev = err;
    }
    const auto rec = phase_accumulate(wiggle(200), nat, relativistic);
    CHECK(classical_hj_residual(rec, wiggle(200), nat).linf < 1e-12);
  }
}

TEST_CASE("non-relativistic phase is the slow limit of the relativistic one") {
  auto gap = [](double speed) {
    const auto p = straight(Eigen::Vector2d(speed, 0.0), 1.0, 10);
    return std::abs(phase_accumulate(p, nat, true).action.back() -
                    phase_accumulate(p, nat, false).action.back());
  };
  // the leading difference is m v^4 T / 8 c^2
  CHECK(gap(0.01) == doctest::Approx(std::pow(0.01, 4) / 8).epsilon(1e-3));
  CHECK(gap(0.02) / gap(0.01) == doctest::Approx(16.0).epsilon(1e-3));
  CHECK_THROWS_AS(phase_accumulate(straight(Eigen::Vector2d(1.0, 0.0), 1.0, 4), nat, true), InvalidArgument);
  CHECK_NOTHROW(phase_accumulate(straight(Eigen::Vector2d(1.0, 0.0), 1.0, 4), nat, false));
}

TEST_CASE("loop phase of closed paths") {
  ClassicalPath square;
  const Eigen::Vector2d corners[] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
  for (int i = 0; i < 5; ++i) {
    square.times.push_back(0.0);
    square.positions.push_back(corners[i]);
    square.velocities.emplace_back(0.7, -0.2);
  }
  const auto zero = loop_phase(square, nat, LoopKind::fixed_time);
  CHECK(zero.winding == 0);
  CHECK(std::abs(zero.action) < 1e-15);
  CHECK(zero.quantized);

  for (int n : {1, 3}) {
    const auto orbit = bohr_orbit(n, si);
    const auto lp = loop_phase(bohr_orbit_path(orbit, si), si, LoopKind::fixed_time);
    CHECK(lp.winding == n);
    CHECK(lp.quantized);
    CHECK(lp.action == doctest::Approx(n * si.planck()).epsilon(1e-7));
    CHECK(to_json(lp)["winding"] == n);
  }

  auto open = square;
  open.positions.back() = {0.0, 0.01};
  CHECK_THROWS_AS(loop_phase(open, nat, LoopKind::fixed_time), InvalidArgument);
  auto novel = square;
  novel.velocities.clear();
  CHECK_THROWS_AS(loop_phase(novel, nat, LoopKind::fixed_time), InvalidArgument);
}

TEST_CASE("space-time loops include the energy term") {
  ClassicalPath loop;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    const double s = 2 * pi * i / n;
    loop.times.push_back(0.5 * std::sin(s));
    loop.positions.emplace_back(std::cos(s), std::sin(s));
    loop.velocities.emplace_back(0.0, 0.1);
    loop.electric.push_back(std::cos(s));
  }
  loop.positions.back() = loop.positions.front();
  const auto st = loop_phase(loop, nat, LoopKind::spacetime);
  const auto ft = loop_phase(loop, nat, LoopKind::fixed_time);
  // closed integral of cos(s) d(0.5 sin s) = pi / 2
  CHECK(ft.action - st.action == doctest::Approx(pi / 2).epsilon(1e-4));
  auto late = loop;
  late.times.back() = 1.0;
  CHECK_THROWS_AS(loop_phase(late, nat, LoopKind::spacetime), InvalidArgument);
}

TEST_CASE("gravitational and electric frequency shifts") {
  // g = 10^3 cm/s^2 at 100 cm
  const auto grav = frequency_shift(10.0 * 1.0, 0.0, 1.0, si);
  CHECK(std::lround(std::log10(grav.kappa / grav.omega_c)) == -16);
  CHECK(grav.kappa == doctest::Approx(grav.omega_c * 10.0 / std::pow(si.light_speed(), 2)).epsilon(1e-15));
  // 0.03 statvolt/cm at 1 cm
  const double statvolt = 299.792458;
  const auto elec = frequency_shift(0.0, 0.03 * statvolt, 0.01, si);
  CHECK(std::lround(std::log10(elec.epsilon / elec.omega_c)) == -5);
  CHECK(elec.point_like_ratio > 1e9);
  const auto none = frequency_shift(0.0, 0.0, 1.0, si);
  CHECK(none.kappa == 0.0);
  CHECK(none.epsilon == 0.0);
  CHECK(to_json(elec).contains("epsilon_over_omega_c"));
}

TEST_CASE("classical Hamilton-Jacobi residuals") {
  const auto g = Grid::plane(Grid::plane_axis(-2, 2, 41, Boundary::reflecting),
                             Grid::plane_axis(-2, 2, 41, Boundary::reflecting));
  const Eigen::Vector2d p(0.6, -0.3);
  const auto S = PhaseField::from_function(g, [&](double x, double y) { return p(0) * x + p(1) * y; }, nat);
  const Potentials none(g);
  const double enr = 1.0 + 0.5 * p.squaredNorm();
  ClassicalHjOptions o;
  o.include_rest_energy = true;
  CHECK(classical_hj_residual(S, constant_field(g, -enr), none, nat, o).linf <= 1e-12);
  o.relativistic = true;
  const auto rel = classical_hj_residual(S, constant_field(g, -std::sqrt(1.0 + p.squaredNorm())), none, nat, o);
  CHECK(rel.linf <= 1e-10);
  CHECK(rel.superluminal.empty());
  CHECK(!classical_hj_residual(S, constant_field(g, -0.5), none, nat, o).superluminal.empty());
}

TEST_CASE("circular Coulomb orbit satisfies the orbital HJ equation") {
  // ring j = 10 sits at r = 1, where L = hbar balances the Coulomb pull
  const double h = 2.0 / 21.0;
  const auto g = Grid::polar(40 * h, 40, 64);
  const auto v = sample(g, [](const Grid& gr, Index n) { return -1.0 / gr.coordinate(n, 0); });
  const auto S = PhaseField::from_function(g, [](double, double phi) { return phi; }, nat);
  const double energy = 0.5 - 1.0;
  ClassicalHjOptions o;
  for (int j = 0; j < 64; ++j) o.nodes.push_back(g->index(10, j));
  const auto r = classical_hj_residual(S, constant_field(g, -energy), Potentials(v), nat, o);
  CHECK(std::abs(g->coordinate(o.nodes[0], 0) - 1.0) < 1e-14);
  CHECK(r.linf <= 1e-10);
  o.nodes.clear();
  CHECK(classical_hj_residual(S, constant_field(g, -energy), Potentials(v), nat, o).linf > 0.1);
}

TEST_CASE("Bohr orbits") {
  const auto b1 = bohr_orbit(1, si);
  CHECK(b1.energy_ev == doctest::Approx(-13.6).epsilon(1e-3));
  // tests/oracles/bohr_oracle.py
  CHECK(b1.radius == doctest::Approx(5.291772102576113e-11).epsilon(1e-10));
  CHECK(bohr_orbit(2, si).energy == doctest::Approx(b1.energy / 4).epsilon(1e-15));
  for (int n = 1; n <= 10; ++n) {
    const auto b = bohr_orbit(n, si);
    CHECK(b.energy * n * n == doctest::Approx(b1.energy).epsilon(1e-12));
    CHECK(b.angular_momentum / n == doctest::Approx(si.hbar()).epsilon(1e-12));
    CHECK(b.radius / (n * n) == doctest::Approx(b1.radius).epsilon(1e-12));
    CHECK(0.5 * si.mass() * b.speed * b.speed + b.energy * 2 == doctest::Approx(b.energy).epsilon(1e-12));
  }
  CHECK_THROWS_AS(bohr_orbit(1, nat), InvalidArgument);
  CHECK_THROWS_AS(bohr_orbit(0, si), InvalidArgument);

  const auto path = (std::filesystem::temp_directory_path() / "zsm_bohr.csv").string();
  write_bohr_table(path, 10, si);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line == "n,r_n,E_n_eV,L_over_hbar");
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 10);
}
