#include "experiments.hpp"

#include "zsm/fields/fields.hpp"
#include "zsm/schrodinger/schrodinger.hpp"
#include "zsm/variational/variational.hpp"

#include <cmath>
#include <numbers>

namespace zsm::cli {

using nlohmann::json;
using std::numbers::pi;

namespace {

struct Moments {
  double mean = 0.0;
  double width = 0.0;
};

Moments moments(const ComplexField& psi) {
  const auto rho = density(psi);
  Eigen::ArrayXd x(rho.size());
  for (Index i = 0; i < rho.size(); ++i) x(i) = rho.grid().coordinate(i, 0);
  const double norm = integrate(rho);
  const double m1 = integrate(rho.grid_ptr(), rho.values() * x) / norm;
  const double m2 = integrate(rho.grid_ptr(), rho.values() * (x - m1).square()) / norm;
  return {m1, std::sqrt(m2)};
}

ExperimentResult run_nonlinear(const ExperimentConfig& c, const RunContext& ctx) {
  const auto k = c.constants();
  const auto g = config_grid(c, Topology::line);
  const double p = c.initial_state.value("momentum", 4.0);
  const auto psi0 = gaussian_packet(g, c.initial_state.value("x0", 0.0), c.initial_state.value("sigma", 0.5), p,
                                    k.hbar());
  const Potentials pot(g);
  EvolutionOptions opt;
  opt.stride = c.steps;
  const auto nl = evolve_nonlinear_classical(psi0, pot, c.dt, c.steps, k, opt);
  const auto lin = evolve_linear(psi0, pot, c.dt, c.steps, k, opt);

  const auto m0 = moments(psi0), mn = moments(nl.frames.back()), ml = moments(lin.frames.back());
  const double horizon = nl.times.back() - nl.times.front();
  const double speed = (mn.mean - m0.mean) / horizon;

  ExperimentResult res;
  res.metrics["nonlinear_width_drift"] = at_most(std::abs(mn.width / m0.width - 1.0), c.tolerance("width_drift"));
  res.metrics["linear_width_growth"] = at_least(ml.width / m0.width - 1.0, c.tolerance("linear_spread_min"));
  res.metrics["nonlinear_speed"] = within_relative(speed, p / k.mass(), c.tolerance("speed_relative"));
  res.metrics["nonlinear_norm_drift"] = at_most(std::abs(norm_squared(nl.frames.back()) - 1.0), c.tolerance("norm"));
  res.details["horizon"] = horizon;
  res.details["widths"] = {{"initial", m0.width}, {"nonlinear", mn.width}, {"linear", ml.width}};

  std::vector<double> x, r0, rn, rl;
  const auto d0 = density(psi0), dn = density(nl.frames.back()), dl = density(lin.frames.back());
  for (Index i = 0; i < g->size(); ++i) {
    x.push_back(g->coordinate(i, 0));
    r0.push_back(d0.values()(i));
    rn.push_back(dn.values()(i));
    rl.push_back(dl.values()(i));
  }
  emit_table(res, ctx, "profiles.csv", {"x", "rho_initial", "rho_nonlinear", "rho_linear"}, {x, r0, rn, rl});
  res.plots.push_back({"profiles", "Packet profiles at the horizon", "x", "rho", false, false,
                       {{"profiles.csv", "x", "rho_initial", "initial"},
                        {"profiles.csv", "x", "rho_nonlinear", "classical (no quantum kinetic term)"},
                        {"profiles.csv", "x", "rho_linear", "Schrodinger"}}});
  return res;
}

// ---------------------------------------------------------------------------

std::vector<double> epsilons(const ExperimentConfig& c) {
  if (!c.parameters.contains("epsilons") || !c.parameters["epsilons"].is_array() ||
      c.parameters["epsilons"].size() < 2)
    throw ConfigError("/parameters/epsilons", "expected at least two amplitudes");
  std::vector<double> out;
  for (const auto& e : c.parameters["epsilons"]) {
    if (!e.is_number() || !(e.get<double>() > 0.0))
      throw ConfigError("/parameters/epsilons", "amplitudes must be positive numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

int count_parameter(const ExperimentConfig& c, const std::string& key) {
  const double v = c.parameter(key);
  if (v != std::floor(v) || v < 8) throw ConfigError("/parameters/" + key, "must be an integer >= 8");
  return static_cast<int>(v);
}

ExperimentResult run_variational(const ExperimentConfig& c, const RunContext& ctx) {
  const auto k = c.constants();
  const auto eps = epsilons(c);
  const double duration = c.parameter("duration");
  const double min_power = c.tolerance("min_power");

  // plane wave on a ring
  const int ring_n = count_parameter(c, "ring_count");
  const auto ring_state = polar_decompose(ring_eigenstate(2, 1.0, ring_n, k).psi, k);
  const auto plane = stationarity_test(stationary_history(ring_state.rho, ring_state.phase, duration, 40),
                                       Potentials(ring_state.rho.grid_ptr()), k,
                                       sinusoidal_perturbation(0.0, duration, 0.0, 2 * pi), eps);

  // harmonic ground state
  const auto hg = Grid::line(-8, 8, count_parameter(c, "line_count"), Boundary::reflecting);
  const auto hv = sample(hg, [&](const Grid& gr, Index i) {
    return 0.5 * k.mass() * std::pow(gr.coordinate(i, 0), 2);
  });
  const auto hs = polar_decompose(line_ground_state(hv, k).psi, k);
  const auto harmonic = stationarity_test(stationary_history(hs.rho, hs.phase, duration, 40), Potentials(hv), k,
                                          bump_perturbation(0.0, duration, 0.3, 0.7), eps);

  // spreading free Gaussian and the scaled-drift control on the same history
  const auto fg = Grid::line(-20, 20, count_parameter(c, "line_count"), Boundary::reflecting);
  const auto psi0 = gaussian_packet(fg, 0.0, std::sqrt(0.5), 0.0, k.hbar());
  const int steps = static_cast<int>(std::lround(duration / c.dt));
  const auto tr = evolve_linear(psi0, Potentials(fg), c.dt, steps, k);
  const auto fh = history_from_frames(tr.times, tr.frames, k);
  const auto eta = bump_perturbation(0.0, tr.times.back(), 0.5, 1.0);
  const auto free = stationarity_test(fh, Potentials(fg), k, eta, eps);
  StationarityOptions scaled;
  scaled.velocity_scale = c.parameter("control_velocity_scale");
  const auto control = stationarity_test(fh, Potentials(fg), k, eta, eps, scaled);

  ExperimentResult res;
  res.metrics["plane_wave_power"] = at_least(plane.fit_power, min_power);
  res.metrics["harmonic_power"] = at_least(harmonic.fit_power, min_power);
  res.metrics["free_gaussian_power"] = at_least(free.fit_power, min_power);
  res.metrics["control_power"] = within(control.fit_power, 1.0, c.tolerance("control_band"));
  res.details["plane_wave"] = to_json(plane);
  res.details["harmonic"] = to_json(harmonic);
  res.details["free_gaussian"] = to_json(free);
  res.details["control"] = to_json(control);

  auto mag = [](const std::vector<double>& v) {
    std::vector<double> out;
    for (double d : v) out.push_back(std::abs(d));
    return out;
  };
  emit_table(res, ctx, "variations.csv", {"epsilon", "plane_wave", "harmonic", "free_gaussian", "control"},
             {eps, mag(plane.delta_j), mag(harmonic.delta_j), mag(free.delta_j), mag(control.delta_j)});
  res.plots.push_back({"variations", "|dJ| against the displacement amplitude", "epsilon", "|dJ|", true, true,
                       {{"variations.csv", "epsilon", "plane_wave", "plane wave"},
                        {"variations.csv", "epsilon", "harmonic", "harmonic ground state"},
                        {"variations.csv", "epsilon", "free_gaussian", "free Gaussian"},
                        {"variations.csv", "epsilon", "control", "scaled drift"}}});
  return res;
}

}  // namespace

Experiment make_nonlinear_classical_gaussian() {
  return {"nonlinear-classical-gaussian",
          "A moving Gaussian evolved with the quantum kinetic term removed keeps its width and speed "
          "while the Schrodinger evolution of the same packet spreads.",
          "without the osmotic kinetic term the packet propagates as a classical ensemble with a fixed "
          "profile and speed",
          json{{"grid", {{"topology", "line"}, {"lo", {-20.0, -1.0}}, {"hi", {40.0, 1.0}}, {"count", {3001, 8}},
                         {"boundary", {"absorbing", "absorbing"}}}},
               {"initial_state", {{"x0", 0.0}, {"sigma", 0.5}, {"momentum", 4.0}}},
               {"dt", 0.002},
               {"steps", 1000},
               {"tolerances", {{"width_drift", 0.01}, {"linear_spread_min", 0.2}, {"speed_relative", 0.01}, {"norm", 1e-7}}}},
          run_nonlinear};
}

Experiment make_variational_stationarity() {
  return {"variational-stationarity",
          "Sample-path displacements eps eta of solution histories change the stochastic action at "
          "order eps^2; a history whose current velocity is scaled by 1.5 changes it at order eps.",
          "the stochastic action is extremal on the solutions of the Schrodinger equation",
          json{{"dt", 0.01},
               {"parameters", {{"duration", 1.0}, {"ring_count", 128}, {"line_count", 1601},
                               {"control_velocity_scale", 1.5}, {"epsilons", {5e-4, 1e-3, 2e-3, 4e-3}}}},
               {"tolerances", {{"min_power", 1.9}, {"control_band", 0.2}}}},
          run_variational};
}

}  // namespace zsm::cli
