#include "zsm/zbw/zbw.hpp"

#include "zsm/core/error.hpp"
#include "zsm/core/io.hpp"
#include "zsm/core/operators.hpp"
#include "zsm/fields/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace zsm {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double at_or_zero(const std::vector<double>& v, std::size_t i) { return v.empty() ? 0.0 : v[i]; }

Eigen::Vector2d at_or_zero(const std::vector<Eigen::Vector2d>& v, std::size_t i) {
  return v.empty() ? Eigen::Vector2d::Zero() : v[i];
}

void validate(const ClassicalPath& p) {
  const std::size_t n = p.size();
  if (n < 2) throw InvalidArgument("classical path: need at least two samples");
  if (p.times.size() != n) throw InvalidArgument("classical path: times and positions differ in length");
  auto check = [&](std::size_t len, const char* what) {
    if (len != 0 && len != n)
      throw InvalidArgument(std::string("classical path: ") + what + " series has the wrong length");
  };
  check(p.velocities.size(), "velocity");
  check(p.gravitational.size(), "gravitational");
  check(p.electric.size(), "electric");
  check(p.vector_potential.size(), "vector potential");
}

/// Second-order differences on a possibly non-uniform time grid.
std::vector<Eigen::Vector2d> velocities_of(const ClassicalPath& p) {
  if (!p.velocities.empty()) return p.velocities;
  const std::size_t n = p.size();
  std::vector<Eigen::Vector2d> v(n);
  auto slope = [&](std::size_t a, std::size_t b) {
    const double dt = p.times[b] - p.times[a];
    if (!(dt != 0.0)) throw InvalidArgument("classical path: repeated sample time; supply velocities");
    return Eigen::Vector2d((p.positions[b] - p.positions[a]) / dt);
  };
  if (n == 2) {
    v[0] = v[1] = slope(0, 1);
    return v;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = p.times[i] - p.times[i - 1], h1 = p.times[i + 1] - p.times[i];
    v[i] = (h0 * slope(i, i + 1) + h1 * slope(i - 1, i)) / (h0 + h1);
  }
  v[0] = 2.0 * slope(0, 1) - v[1];
  v[n - 1] = 2.0 * slope(n - 2, n - 1) - v[n - 2];
  return v;
}

struct Sample {
  double gamma = 1.0;
  double energy = 0.0;
  Eigen::Vector2d momentum = Eigen::Vector2d::Zero();
  double lagrangian = 0.0;
};

Sample dynamics(const ClassicalPath& p, const Eigen::Vector2d& v, std::size_t i,
                const PhysicalConstants& k, bool relativistic) {
  const double m = k.mass(), c = k.light_speed(), c2 = c * c;
  const double grav = at_or_zero(p.gravitational, i), elec = at_or_zero(p.electric, i);
  const Eigen::Vector2d qa = vector_coupling(k) * at_or_zero(p.vector_potential, i);
  Sample s;
  if (relativistic) {
    const double beta2 = v.squaredNorm() / c2;
    if (!(beta2 < 1.0)) {
      std::ostringstream msg;
      msg << "phase_accumulate: sample " << i << " moves at |v|/c = " << std::sqrt(beta2);
      throw InvalidArgument(msg.str());
    }
    s.gamma = 1.0 / std::sqrt(1.0 - beta2);
    s.energy = s.gamma * (m * c2 + grav) + elec;
    s.momentum = s.gamma * m * v + qa;
  } else {
    s.energy = m * c2 + 0.5 * m * v.squaredNorm() + grav + elec;
    s.momentum = m * v + qa;
  }
  s.lagrangian = s.momentum.dot(v) - s.energy;
  return s;
}

double path_scale(const ClassicalPath& p) {
  double len = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) len += (p.positions[i] - p.positions[i - 1]).norm();
  return std::max(len, 1e-300);
}

}  // namespace

ClassicalPath sample_potentials(ClassicalPath path, const Potentials& pot) {
  const std::size_t n = path.size();
  if (path.times.size() != n) throw InvalidArgument("sample_potentials: times and positions differ in length");
  path.gravitational.assign(n, 0.0);
  path.electric.assign(n, 0.0);
  path.vector_potential.clear();
  if (pot.has_vector_potential()) path.vector_potential.assign(n, Eigen::Vector2d::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    const PotentialFrame& f = pot.at(path.times[i]);
    const Eigen::Vector2d& q = path.positions[i];
    path.gravitational[i] = interpolate(f.gravitational, q);
    path.electric[i] = interpolate(f.electric, q) + interpolate(f.scalar, q);
    if (f.vector_potential) path.vector_potential[i] = interpolate(*f.vector_potential, q);
  }
  return path;
}

ZbwPhaseRecord phase_accumulate(const ClassicalPath& path, const PhysicalConstants& k,
                                bool relativistic, double initial_phase) {
  validate(path);
  const std::vector<Eigen::Vector2d> v = velocities_of(path);
  const std::size_t n = path.size();
  const double hbar = k.hbar();
  ZbwPhaseRecord r;
  r.times = path.times;
  r.initial_phase = initial_phase;
  r.relativistic = relativistic;
  std::vector<Sample> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = dynamics(path, v[i], i, k, relativistic);
    r.gamma.push_back(s[i].gamma);
    r.energy.push_back(s[i].energy);
    r.momentum.push_back(s[i].momentum);
  }
  double S = s[0].momentum.dot(path.positions[0]) - s[0].energy * path.times[0] - hbar * initial_phase;
  double L = S;
  r.action.push_back(S);
  r.lagrangian_action.push_back(L);
  for (std::size_t i = 1; i < n; ++i) {
    const double dt = path.times[i] - path.times[i - 1];
    const Eigen::Vector2d dq = path.positions[i] - path.positions[i - 1];
    S += 0.5 * (s[i].momentum + s[i - 1].momentum).dot(dq) - 0.5 * (s[i].energy + s[i - 1].energy) * dt;
    L += 0.5 * (s[i].lagrangian + s[i - 1].lagrangian) * dt;
    r.action.push_back(S);
    r.lagrangian_action.push_back(L);
  }
  for (double a : r.action) r.theta.push_back(-a / hbar);
  return r;
}

LoopPhaseReport loop_phase(const ClassicalPath& loop, const PhysicalConstants& k, LoopKind kind,
                           bool relativistic, double tol, double closure_tol) {
  validate(loop);
  const std::size_t n = loop.size();
  const double gap = (loop.positions[n - 1] - loop.positions[0]).norm();
  if (gap > closure_tol * path_scale(loop)) {
    std::ostringstream msg;
    msg << "loop_phase: path does not close (endpoint gap " << gap << ")";
    throw InvalidArgument(msg.str());
  }
  if (kind == LoopKind::spacetime) {
    const double span = std::abs(loop.times.back() - loop.times.front());
    double extent = 0.0;
    for (std::size_t i = 1; i < n; ++i) extent += std::abs(loop.times[i] - loop.times[i - 1]);
    if (span > closure_tol * std::max(extent, 1e-300))
      throw InvalidArgument("loop_phase: space-time loop does not return to its starting time");
    if (loop.velocities.empty())
      throw InvalidArgument("loop_phase: space-time loops need explicit velocities");
  } else if (loop.velocities.empty()) {
    throw InvalidArgument("loop_phase: fixed-time loops need the velocity at each sample");
  }
  LoopPhaseReport r;
  for (std::size_t i = 1; i < n; ++i) {
    const Sample a = dynamics(loop, loop.velocities[i - 1], i - 1, k, relativistic);
    const Sample b = dynamics(loop, loop.velocities[i], i, k, relativistic);
    r.action += 0.5 * (a.momentum + b.momentum).dot(loop.positions[i] - loop.positions[i - 1]);
    if (kind == LoopKind::spacetime)
      r.action -= 0.5 * (a.energy + b.energy) * (loop.times[i] - loop.times[i - 1]);
  }
  r.phase = r.action / k.hbar();
  r.winding = std::lround(r.phase / two_pi);
  r.residual = r.phase - two_pi * static_cast<double>(r.winding);
  r.tolerance = tol;
  r.quantized = std::abs(r.residual) <= tol * two_pi;
  return r;
}

FrequencyShift frequency_shift(double phi_g, double phi_e, double displacement,
                               const PhysicalConstants& k) {
  const double wc = k.compton_frequency(), c2 = k.light_speed() * k.light_speed();
  return {wc, wc * phi_g / c2, wc * k.charge() * phi_e / k.rest_energy(),
          std::abs(displacement) / k.compton_wavelength()};
}

ClassicalHjReport classical_hj_residual(const PhaseField& S, const ScalarField& ds_dt,
                                        const Potentials& pot, const PhysicalConstants& k,
                                        const ClassicalHjOptions& o) {
  const GridPtr& gp = S.grid_ptr();
  if (!same_grid(gp, ds_dt.grid_ptr()) || !same_grid(gp, pot.grid_ptr()))
    throw InvalidArgument("classical_hj_residual: S, dS/dt and the potentials must share one grid");
  const PotentialFrame& f = pot.at(o.time);
  const VectorField v = current_velocity(S, k, f.vector_potential ? &*f.vector_potential : nullptr);
  const double m = k.mass(), c = k.light_speed(), mc2 = k.rest_energy();
  const Mask mask = combine(v.mask(), ds_dt.mask());
  Eigen::ArrayXd res(gp->size());
  std::vector<Index> superluminal;
  for (Index i = 0; i < gp->size(); ++i) {
    const double p2 = m * m * v.values().row(i).square().sum();
    const double grav = f.gravitational.values()(i);
    const double rest = f.electric.values()(i) + f.scalar.values()(i);
    if (o.relativistic) {
      const double root = std::sqrt(mc2 * mc2 + p2 * c * c);
      res(i) = ds_dt.values()(i) + root + (root / mc2) * grav + rest;
      const double kinetic = -ds_dt.values()(i) - rest;
      if (std::sqrt(p2) * c >= kinetic && !mask(i)) superluminal.push_back(i);
    } else {
      res(i) = ds_dt.values()(i) + p2 / (2.0 * m) + grav + rest + (o.include_rest_energy ? mc2 : 0.0);
    }
  }
  ClassicalHjReport r{ScalarField(gp, res, mask)};
  r.superluminal = std::move(superluminal);
  double sum = 0.0;
  auto visit = [&](Index i) {
    if (r.residual.masked(i)) return;
    sum += gp->weights()(i) * res(i) * res(i);
    r.linf = std::max(r.linf, std::abs(res(i)));
  };
  if (o.nodes.empty()) {
    for (Index i = 0; i < gp->size(); ++i) visit(i);
  } else {
    for (Index i : o.nodes) {
      if (i < 0 || i >= gp->size()) throw InvalidArgument("classical_hj_residual: node index out of range");
      visit(i);
    }
  }
  r.l2 = std::sqrt(sum);
  return r;
}

ClassicalHjReport classical_hj_residual(const ZbwPhaseRecord& record, const ClassicalPath& path,
                                        const PhysicalConstants& k) {
  validate(path);
  const std::size_t n = path.size();
  if (record.energy.size() != n || record.momentum.size() != n)
    throw InvalidArgument("classical_hj_residual: record and path differ in length");
  const double m = k.mass(), c = k.light_speed(), mc2 = k.rest_energy();
  const auto grid = Grid::line(0.0, static_cast<double>(n - 1), static_cast<int>(n), Boundary::reflecting);
  Eigen::ArrayXd res(static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d P =
        record.momentum[i] - vector_coupling(k) * at_or_zero(path.vector_potential, i);
    const double grav = at_or_zero(path.gravitational, i), elec = at_or_zero(path.electric, i);
    double h;
    if (record.relativistic) {
      const double root = std::sqrt(mc2 * mc2 + P.squaredNorm() * c * c);
      h = root + (root / mc2) * grav + elec;
    } else {
      h = mc2 + P.squaredNorm() / (2.0 * m) + grav + elec;
    }
    res(static_cast<Index>(i)) = record.energy[i] - h;
  }
  ClassicalHjReport r{ScalarField(grid, res)};
  r.linf = res.abs().maxCoeff();
  r.l2 = std::sqrt(res.square().sum() / static_cast<double>(n));
  return r;
}

BohrOrbit bohr_orbit(int n, const PhysicalConstants& k) {
  if (k.unit_system() != UnitSystem::si)
    throw InvalidArgument("bohr_orbit: needs SI constants (dimensional radius and energy)");
  if (n < 1) throw InvalidArgument("bohr_orbit: n must be >= 1");
  const double hbar = k.hbar(), m = k.mass(), e = k.charge(), eps0 = k.vacuum_permittivity();
  const double four_pi_eps0 = 4.0 * std::numbers::pi * eps0;
  BohrOrbit b;
  b.n = n;
  b.radius = four_pi_eps0 * hbar * hbar / (m * e * e) * n * n;
  b.energy = -e * e / (2.0 * four_pi_eps0 * b.radius);
  b.energy_ev = b.energy / codata2018::electron_volt;
  b.angular_momentum = n * hbar;
  b.speed = b.angular_momentum / (m * b.radius);
  return b;
}

ClassicalPath bohr_orbit_path(const BohrOrbit& orbit, const PhysicalConstants& k, int samples) {
  if (samples < 8) throw InvalidArgument("bohr_orbit_path: need at least 8 samples");
  const double omega = orbit.speed / orbit.radius;
  const double period = two_pi / omega;
  const double coulomb =
      -k.charge() * k.charge() / (4.0 * std::numbers::pi * k.vacuum_permittivity() * orbit.radius);
  ClassicalPath p;
  for (int i = 0; i <= samples; ++i) {
    const double t = period * i / samples;
    const double a = i == samples ? 0.0 : omega * t;
    p.times.push_back(t);
    p.positions.emplace_back(orbit.radius * std::cos(a), orbit.radius * std::sin(a));
    p.velocities.emplace_back(-orbit.speed * std::sin(a), orbit.speed * std::cos(a));
    p.electric.push_back(coulomb);
  }
  return p;
}

void write_bohr_table(const std::string& path, int n_max, const PhysicalConstants& k) {
  if (n_max < 1) throw InvalidArgument("write_bohr_table: n_max must be >= 1");
  std::vector<std::vector<double>> cols(4);
  for (int n = 1; n <= n_max; ++n) {
    const BohrOrbit b = bohr_orbit(n, k);
    cols[0].push_back(n);
    cols[1].push_back(b.radius);
    cols[2].push_back(b.energy_ev);
    cols[3].push_back(b.angular_momentum / k.hbar());
  }
  write_table_csv(path, {"n", "r_n", "E_n_eV", "L_over_hbar"}, cols);
}

nlohmann::json to_json(const LoopPhaseReport& r) {
  return {{"action", r.action},   {"phase", r.phase},         {"winding", r.winding},
          {"residual", r.residual}, {"tolerance", r.tolerance}, {"quantized", r.quantized}};
}

nlohmann::json to_json(const FrequencyShift& f) {
  return {{"omega_c", f.omega_c},
          {"kappa", f.kappa},
          {"epsilon", f.epsilon},
          {"kappa_over_omega_c", f.kappa / f.omega_c},
          {"epsilon_over_omega_c", f.epsilon / f.omega_c},
          {"point_like_ratio", f.point_like_ratio}};
}

nlohmann::json to_json(const BohrOrbit& b) {
  return {{"n", b.n},
          {"radius", b.radius},
          {"energy", b.energy},
          {"energy_ev", b.energy_ev},
          {"speed", b.speed},
          {"angular_momentum", b.angular_momentum}};
}

}  // namespace zsm
