#include "zsm/variational/variational.hpp"

#include "zsm/core/error.hpp"
#include "zsm/core/operators.hpp"
#include "zsm/fields/fields.hpp"

#include <cmath>
#include <numbers>

namespace zsm {

namespace {

void validate(const StateHistory& h) {
  if (h.size() < 2) throw InvalidArgument("state history: need at least two frames");
  if (h.rho.size() != h.size() || h.phase.size() != h.size())
    throw InvalidArgument("state history: times, rho and phase differ in length");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i > 0 && !(h.times[i] > h.times[i - 1]))
      throw InvalidArgument("state history: times must increase");
    if (!same_grid(h.rho[i].grid_ptr(), h.rho[0].grid_ptr()) ||
        !same_grid(h.phase[i].grid_ptr(), h.rho[0].grid_ptr()))
      throw InvalidArgument("state history: frames live on different grids");
  }
}

/// Trapezoid weights for the sample times.
std::vector<double> time_weights(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double dt = 0.5 * (t[i] - t[i - 1]);
    w[i - 1] += dt;
    w[i] += dt;
  }
  return w;
}

const VectorField* vector_potential_at(const Potentials& pot, double t) {
  const PotentialFrame& f = pot.at(t);
  return f.vector_potential ? &*f.vector_potential : nullptr;
}

void finish(ActionEstimate& a, const PhysicalConstants& k, double mass_total, bool rest) {
  a.rest_energy = rest ? k.rest_energy() * a.duration * mass_total : 0.0;
  a.value = a.current_kinetic + a.osmotic_kinetic - a.potential + a.magnetic + a.rest_energy;
}

}  // namespace

StateHistory history_from_frames(const std::vector<double>& times, const std::vector<ComplexField>& psi,
                                 const PhysicalConstants& k) {
  if (times.size() != psi.size()) throw InvalidArgument("history_from_frames: times and frames differ in length");
  StateHistory h;
  h.times = times;
  for (const auto& f : psi) {
    PolarDecomposition pd = polar_decompose(f, k);
    h.rho.push_back(std::move(pd.rho));
    h.phase.push_back(std::move(pd.phase));
  }
  return h;
}

StateHistory stationary_history(const ScalarField& rho, const PhaseField& S, double duration, int steps) {
  if (!(duration > 0.0) || steps < 1) throw InvalidArgument("stationary_history: need duration > 0 and steps >= 1");
  StateHistory h;
  for (int i = 0; i <= steps; ++i) {
    h.times.push_back(duration * i / steps);
    h.rho.push_back(rho);
    h.phase.push_back(S);
  }
  return h;
}

ActionEstimate discrete_action(const StateHistory& h, const Potentials& pot, const PhysicalConstants& k,
                               const ActionOptions& o) {
  validate(h);
  const GridPtr& gp = h.rho[0].grid_ptr();
  if (!same_grid(gp, pot.grid_ptr())) throw InvalidArgument("discrete_action: potentials on a different grid");
  const Eigen::ArrayXd& w = gp->weights();
  const std::vector<double> tw = time_weights(h.times);
  const double m = k.mass(), q = vector_coupling(k);
  ActionEstimate a;
  a.duration = h.times.back() - h.times.front();
  a.samples = static_cast<Index>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double t = h.times[i];
    const VectorField* A = vector_potential_at(pot, t);
    const KinematicFields kf = kinematic_fields(h.rho[i], h.phase[i], k, A, o.node_floor);
    const Eigen::ArrayXd rw = h.rho[i].values() * w;
    const ScalarField vt = pot.total_scalar(t);
    double cur = 0.0, osm = 0.0, mag = 0.0;
    for (Index n = 0; n < gp->size(); ++n) {
      if (!kf.current.masked(n)) cur += rw(n) * 0.5 * m * kf.current.values().row(n).square().sum();
      if (!kf.osmotic.masked(n)) osm += rw(n) * 0.5 * m * kf.osmotic.values().row(n).square().sum();
      if (A && !kf.current.masked(n))
        mag += rw(n) * q * (A->values().row(n) * kf.current.values().row(n)).sum();
    }
    a.current_kinetic += tw[i] * cur;
    a.osmotic_kinetic += tw[i] * osm;
    a.magnetic += tw[i] * mag;
    a.potential += tw[i] * (rw * vt.values()).sum();
    a.alternative += tw[i] * (cur - osm);
  }
  a.alternative += a.magnetic;
  finish(a, k, integrate(h.rho[0]), o.include_rest_energy);
  a.alternative += a.rest_energy - a.potential;
  return a;
}

ActionEstimate discrete_action(const TrajectoryBundle& paths, const StateHistory& h, const Potentials& pot,
                               const PhysicalConstants& k, const ActionOptions& o) {
  validate(h);
  if (paths.times.size() != h.size()) throw InvalidArgument("discrete_action: path frames and history differ in count");
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double scale = std::max({1.0, std::abs(h.times[i]), std::abs(h.times.back() - h.times.front())});
    if (std::abs(paths.times[i] - h.times[i]) > 1e-12 * scale)
      throw InvalidArgument("discrete_action: path frame times do not match the history");
  }
  const std::vector<double> tw = time_weights(h.times);
  const double m = k.mass(), q = vector_coupling(k);
  const Index np = paths.particles();
  AliveFlags keep = AliveFlags::Constant(np, true);
  for (const auto& al : paths.alive) keep = keep && al;

  Eigen::ArrayXd cur = Eigen::ArrayXd::Zero(np), osm = cur, pot_e = cur, mag = cur;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double t = h.times[i];
    const VectorField* A = vector_potential_at(pot, t);
    const KinematicFields kf = kinematic_fields(h.rho[i], h.phase[i], k, A, o.node_floor);
    const ScalarField vt = pot.total_scalar(t);
    const Eigen::ArrayXXd& frame = paths.frames[i];
    for (Index p = 0; p < np; ++p) {
      if (!keep(p)) continue;
      Eigen::Vector2d x = Eigen::Vector2d::Zero();
      for (int d = 0; d < frame.cols(); ++d) x(d) = frame(p, d);
      const Eigen::Vector2d b = interpolate(kf.forward, x), bs = interpolate(kf.backward, x);
      const Eigen::Vector2d v = 0.5 * (b + bs), u = 0.5 * (b - bs);
      cur(p) += tw[i] * 0.5 * m * v.squaredNorm();
      osm(p) += tw[i] * 0.5 * m * u.squaredNorm();
      pot_e(p) += tw[i] * interpolate(vt, x);
      if (A) mag(p) += tw[i] * q * interpolate(*A, x).dot(v);
    }
  }
  const Index alive = keep.count();
  if (alive < 2) throw InvalidArgument("discrete_action: fewer than two surviving paths");
  auto mean = [&](const Eigen::ArrayXd& x) { return (keep.select(x, 0.0)).sum() / static_cast<double>(alive); };
  ActionEstimate a;
  a.duration = h.times.back() - h.times.front();
  a.samples = alive;
  a.current_kinetic = mean(cur);
  a.osmotic_kinetic = mean(osm);
  a.potential = mean(pot_e);
  a.magnetic = mean(mag);
  a.alternative = a.current_kinetic - a.osmotic_kinetic - a.potential + a.magnetic;
  finish(a, k, 1.0, o.include_rest_energy);
  a.alternative += a.rest_energy;
  const Eigen::ArrayXd per = cur + osm - pot_e + mag;
  const double mu = mean(per);
  const double var = (keep.select((per - mu).square(), 0.0)).sum() / static_cast<double>(alive - 1);
  a.standard_error = std::sqrt(var / static_cast<double>(alive));
  return a;
}

Perturbation sinusoidal_perturbation(double t_i, double t_f, double x0, double length, int mode) {
  if (!(t_f > t_i) || !(length > 0.0)) throw InvalidArgument("sinusoidal_perturbation: bad window");
  return [=](double x, double t) {
    return std::sin(std::numbers::pi * (t - t_i) / (t_f - t_i)) *
           std::sin(2.0 * std::numbers::pi * mode * (x - x0) / length);
  };
}

Perturbation bump_perturbation(double t_i, double t_f, double center, double width) {
  if (!(t_f > t_i) || !(width > 0.0)) throw InvalidArgument("bump_perturbation: bad window");
  return [=](double x, double t) {
    const double z = (x - center) / width;
    return std::sin(std::numbers::pi * (t - t_i) / (t_f - t_i)) * std::exp(-0.5 * z * z);
  };
}

StationarityReport stationarity_test(const StateHistory& h, const Potentials& pot, const PhysicalConstants& k,
                                     const Perturbation& eta, const std::vector<double>& epsilons,
                                     const StationarityOptions& o) {
  validate(h);
  const GridPtr& gp = h.rho[0].grid_ptr();
  const Grid& g = *gp;
  if (g.dim() != 1) throw UnsupportedFeature("stationarity_test: only 1-D grids are supported");
  if (!same_grid(gp, pot.grid_ptr())) throw InvalidArgument("stationarity_test: potentials on a different grid");
  if (epsilons.size() < 2) throw InvalidArgument("stationarity_test: need at least two amplitudes");
  const Index n = g.size();
  const std::size_t nt = h.size();
  const double m = k.mass(), nu = k.diffusion();
  const double t0 = h.times.front(), t1 = h.times.back();

  Eigen::ArrayXd x(n);
  for (Index j = 0; j < n; ++j) x(j) = g.coordinate(j, 0);
  double eta_max = 0.0, eta_end = 0.0;
  for (Index j = 0; j < n; ++j)
    for (std::size_t i = 0; i < nt; ++i) {
      const double e = std::abs(eta(x(j), h.times[i]));
      eta_max = std::max(eta_max, e);
      if (i == 0 || i + 1 == nt) eta_end = std::max(eta_end, e);
    }
  if (eta_end > 1e-12 * std::max(eta_max, 1e-300))
    throw InvalidArgument("stationarity_test: perturbation does not vanish at the end times");

  // J(eps) = J0 + eps J1 + eps^2 J2 with the potential expanded to second order
  const std::vector<double> tw = time_weights(h.times);
  const double dt_probe = 1e-5 * (t1 - t0);
  double j0 = 0.0, j1 = 0.0, j2 = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    const double t = h.times[i];
    const KinematicFields kf = kinematic_fields(h.rho[i], h.phase[i], k, vector_potential_at(pot, t), o.node_floor);
    const Eigen::ArrayXd v = o.velocity_scale * kf.current.values().col(0);
    const Eigen::ArrayXd u = kf.osmotic.values().col(0);
    const Eigen::ArrayXd b = v + u, bs = v - u;
    Eigen::ArrayXd e(n), et(n);
    for (Index j = 0; j < n; ++j) {
      e(j) = eta(x(j), t);
      et(j) = (eta(x(j), t + dt_probe) - eta(x(j), t - dt_probe)) / (2.0 * dt_probe);
    }
    const Eigen::ArrayXd ex = axis_derivative(g, e, 0), exx = axis_second_derivative(g, e, 0);
    const Eigen::ArrayXd de = et + b * ex + nu * exx;
    const Eigen::ArrayXd dse = et + bs * ex - nu * exx;
    const Eigen::ArrayXd V = pot.total_scalar(t).values();
    const Eigen::ArrayXd vx = axis_derivative(g, V, 0), vxx = axis_second_derivative(g, V, 0);
    const Eigen::ArrayXd rw = h.rho[i].values() * g.weights();
    const Mask& mask = kf.osmotic.mask();
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (mask(j)) continue;
      a0 += rw(j) * (0.25 * m * (b(j) * b(j) + bs(j) * bs(j)) - V(j));
      a1 += rw(j) * (0.5 * m * (b(j) * de(j) + bs(j) * dse(j)) - vx(j) * e(j));
      a2 += rw(j) * (0.25 * m * (de(j) * de(j) + dse(j) * dse(j)) - 0.5 * vxx(j) * e(j) * e(j));
    }
    j0 += tw[i] * a0;
    j1 += tw[i] * a1;
    j2 += tw[i] * a2;
  }

  StationarityReport r;
  r.epsilons = epsilons;
  r.base_action = j0 + (o.include_rest_energy ? k.rest_energy() * (t1 - t0) * integrate(h.rho[0]) : 0.0);
  r.first_order = j1;
  r.second_order = j2;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw InvalidArgument("stationarity_test: amplitudes must be positive");
    const double d = eps * j1 + eps * eps * j2;
    r.delta_j.push_back(d);
    const double lx = std::log(eps), ly = std::log(std::max(std::abs(d), 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double ne = static_cast<double>(epsilons.size());
  r.fit_power = (ne * sxy - sx * sy) / (ne * sxx - sx * sx);
  return r;
}

nlohmann::json to_json(const ActionEstimate& a) {
  return {{"action", a.value},
          {"standard_error", a.standard_error},
          {"parts",
           {{"current_kinetic", a.current_kinetic},
            {"osmotic_kinetic", a.osmotic_kinetic},
            {"potential", a.potential},
            {"magnetic", a.magnetic},
            {"rest_energy", a.rest_energy}}},
          {"alternative_bbstar", a.alternative},
          {"duration", a.duration},
          {"samples", a.samples}};
}

nlohmann::json to_json(const StationarityReport& r) {
  return {{"epsilons", r.epsilons}, {"delta_j", r.delta_j}, {"base_action", r.base_action},
          {"first_order", r.first_order}, {"second_order", r.second_order}, {"fit_power", r.fit_power}};
}

}  // namespace zsm
