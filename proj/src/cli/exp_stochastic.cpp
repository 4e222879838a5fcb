#include "experiments.hpp"

#include "zsm/core/io.hpp"
#include "zsm/diffusion/diffusion.hpp"
#include "zsm/fields/fields.hpp"
#include "zsm/schrodinger/schrodinger.hpp"

#include <algorithm>
#include <cmath>

namespace zsm::cli {

using nlohmann::json;

namespace {

/// Forward drifts b = v + u of every stored frame.
std::vector<VectorField> forward_drifts(const Trajectory& tr, const PhysicalConstants& k) {
  std::vector<VectorField> out;
  out.reserve(tr.frames.size());
  for (const auto& psi : tr.frames) {
    const auto pd = polar_decompose(psi, k);
    out.push_back(kinematic_fields(pd.rho, pd.phase, k).forward);
  }
  return out;
}

DriftProvider frame_provider(const std::vector<VectorField>& drifts, double t0, double dt) {
  return [&drifts, t0, dt](double t) -> VectorField {
    const long i = std::lround((t - t0) / dt);
    return drifts[static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(drifts.size()) - 1))];
  };
}

std::vector<double> column(const Eigen::ArrayXd& a) { return {a.data(), a.data() + a.size()}; }

std::vector<double> coordinates(const Grid& g) {
  std::vector<double> x;
  for (Index n = 0; n < g.size(); ++n) x.push_back(g.coordinate(n, 0));
  return x;
}

// ---------------------------------------------------------------------------

ExperimentResult run_equivariance(const ExperimentConfig& c, const RunContext& ctx) {
  const auto k = c.constants();
  const auto g = config_grid(c, Topology::line);
  const auto& init = c.initial_state;
  const auto psi0 = gaussian_packet(g, init.value("x0", 0.0), init.value("sigma", 1.0),
                                    init.value("momentum", 0.0), k.hbar());
  const Potentials pot(g);

  const auto tr = evolve_linear(psi0, pot, c.dt, c.steps, k);
  const auto drifts = forward_drifts(tr, k);

  SimulationOptions opt;
  opt.dt = c.dt;
  opt.steps = c.steps;
  opt.frame_stride = c.steps;
  opt.sde.threads = ctx.threads;
  const auto paths = simulate(sample_ensemble(density(psi0), c.ensemble_size, c.seed),
                              frame_provider(drifts, 0.0, c.dt), k, opt);

  EnsembleState last;
  last.grid = g;
  last.time = paths.times.back();
  last.positions = paths.frames.back();
  last.alive = paths.alive.back();
  const auto rho_exact = density(tr.frames.back());
  const auto rho_kde = empirical_density(last, g);
  const auto wiener = wiener_check(paths.wiener, 1, k.diffusion(), c.dt, c.tolerance("wiener_sigmas"));

  ExperimentResult res;
  res.metrics["l1_final"] = at_most(l1_distance(rho_kde, rho_exact), c.tolerance("l1"));
  res.metrics["wiener_max_z"] = at_most(wiener.max_z, c.tolerance("wiener_sigmas"));
  res.metrics["particles_removed"] = at_most(static_cast<double>(paths.removed), 0.0);
  res.details["wiener"] = to_json(wiener);
  res.details["final_time"] = last.time;

  emit_table(res, ctx, "density_final.csv", {"x", "rho_psi", "rho_ensemble"},
             {coordinates(*g), column(rho_exact.values()), column(rho_kde.values())});
  res.plots.push_back({"density", "Ensemble density against |psi|^2 at the final time", "x", "rho", false, false,
                       {{"density_final.csv", "x", "rho_psi", "|psi|^2"},
                        {"density_final.csv", "x", "rho_ensemble", "ensemble (KDE)"}}});
  if (wants_output(c, "trajectories")) {
    write_trajectory(ctx.path("trajectories.zsmt"), paths);
    res.artifacts.push_back("trajectories.zsmt");
  }
  return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_node_avoidance(const ExperimentConfig& c, const RunContext& ctx) {
  const auto k = c.constants();
  const auto g = config_grid(c, Topology::polar);
  const double omega = c.potential.value("omega", 1.0);
  const auto v = sample(g, [&](const Grid& gr, Index n) {
    return 0.5 * k.mass() * omega * omega * gr.cartesian(n).squaredNorm();
  });
  const int m = static_cast<int>(c.initial_state.value("winding", 1));
  const auto st = central_eigenstate(v, m, k);
  const auto pd = polar_decompose(st.psi, k);
  const auto drift = kinematic_fields(pd.rho, pd.phase, k).forward;
  const auto still = zero_vector_field(g);
  const double floor = c.tolerance("mask_floor");

  SimulationOptions opt;
  opt.dt = c.dt;
  opt.steps = c.steps;
  opt.sde.threads = ctx.threads;
  const auto start = sample_ensemble(pd.rho, c.ensemble_size, c.seed);

  const auto run = simulate(start, [&](double) { return drift; }, k, opt);
  const auto audit = node_avoidance_audit(run, {pd.rho}, floor);
  if (wants_output(c, "trajectories")) {
    write_trajectory(ctx.path("trajectories.zsmt"), run);
  }
  NodeAuditReport control;
  {
    const auto noise = simulate(start, [&](double) { return still; }, k, opt);
    control = node_avoidance_audit(noise, {pd.rho}, floor);
  }

  ExperimentResult res;
  res.metrics["entries"] = at_most(static_cast<double>(audit.entries), 0.0);
  res.metrics["control_entries"] = at_least(static_cast<double>(control.entries), 1.0);
  res.details["audit"] = to_json(audit);
  res.details["control"] = to_json(control);
  res.details["energy"] = st.energy;
  if (wants_output(c, "trajectories")) res.artifacts.push_back("trajectories.zsmt");

  std::vector<double> r, rho;
  for (int i = 0; i < g->count(0); ++i) {
    r.push_back(g->axis(0).coordinate(i));
    rho.push_back(pd.rho.values()(g->index(i, 0)));
  }
  emit_table(res, ctx, "radial_density.csv", {"r", "rho"}, {r, rho});
  emit_table(res, ctx, "audit.csv", {"drift", "entries", "samples_in_mask", "min_rho_relative"},
             {{1.0, 0.0},
              {static_cast<double>(audit.entries), static_cast<double>(control.entries)},
              {static_cast<double>(audit.samples_in_mask), static_cast<double>(control.samples_in_mask)},
              {audit.min_rho_relative, control.min_rho_relative}});
  res.plots.push_back({"radial", "Radial density of the m = 1 state", "r", "rho", false, false,
                       {{"radial_density.csv", "r", "rho", "rho(r)"}}});
  return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_mean_acceleration(const ExperimentConfig& c, const RunContext& ctx) {
  const auto k = c.constants();
  const double omega = c.potential.value("omega", 1.0);
  const double lo = c.grid->lo[0], hi = c.grid->hi[0];
  if (!c.parameters.contains("counts") || !c.parameters["counts"].is_array() || c.parameters["counts"].size() < 3)
    throw ConfigError("/parameters/counts", "expected at least three grid sizes");

  std::vector<double> ns, hs, l2s, orders;
  for (const auto& n_json : c.parameters["counts"]) {
    if (!n_json.is_number_integer() || n_json.get<int>() < 8)
      throw ConfigError("/parameters/counts", "entries must be integers >= 8");
    const int n = n_json.get<int>();
    const auto g = Grid::line(lo, hi, n, Boundary::reflecting);
    const auto v = sample(g, [&](const Grid& gr, Index i) {
      return 0.5 * k.mass() * omega * omega * std::pow(gr.coordinate(i, 0), 2);
    });
    const auto gs = line_ground_state(v, k);
    const auto S = PhaseField::from_function(g, [](double, double) { return 0.0; }, k);
    AccelerationOptions opt;
    opt.node_floor = c.tolerance("node_floor");
    const auto rep = mean_acceleration(density(gs.psi), S, Potentials(v), k, opt);
    ns.push_back(n);
    hs.push_back(g->axis(0).spacing);
    l2s.push_back(rep.residual_l2);
  }
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < l2s.size(); ++i) {
    const double p = std::log(l2s[i - 1] / l2s[i]) / std::log(hs[i - 1] / hs[i]);
    orders.push_back(p);
    worst = std::min(worst, p);
  }

  ExperimentResult res;
  res.metrics["min_observed_order"] = at_least(worst, c.tolerance("min_order"));
  res.details["orders"] = orders;
  res.details["residual_l2"] = l2s;
  emit_table(res, ctx, "convergence.csv", {"count", "h", "residual_l2"}, {ns, hs, l2s});
  res.plots.push_back({"convergence", "Mean acceleration residual under refinement", "h", "L2 residual", true,
                       true, {{"convergence.csv", "h", "residual_l2", "kinematic minus force"}}});
  return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_fp_vs_ensemble(const ExperimentConfig& c, const RunContext& ctx) {
  const auto k = c.constants();
  const auto g = config_grid(c, Topology::line);
  const double omega = c.potential.value("omega", 1.0);
  const auto v = sample(g, [&](const Grid& gr, Index i) {
    return 0.5 * k.mass() * omega * omega * std::pow(gr.coordinate(i, 0), 2);
  });
  const Potentials pot(v);
  const double sigma = std::sqrt(k.hbar() / (2.0 * k.mass() * omega));
  const auto psi0 = gaussian_packet(g, c.initial_state.value("x0", 1.0), sigma,
                                    c.initial_state.value("momentum", 0.0), k.hbar());

  const auto tr = evolve_linear(psi0, pot, c.dt, c.steps, k);
  const auto drifts = forward_drifts(tr, k);

  std::optional<FieldDumpWriter> dump;
  const int dump_stride = std::max(1, c.steps / 20);
  if (wants_output(c, "density_dump")) dump.emplace(ctx.path("fp_density.zsmf"), *g, FieldKind::scalar, 1);

  auto rho = density(psi0);
  const double mass0 = integrate(rho);
  double worst_fp = 0.0;
  if (dump) dump->append(0.0, rho);
  for (int s = 0; s < c.steps; ++s) {
    rho = fokker_planck_step(rho, drifts[static_cast<std::size_t>(s + 1)], c.dt, k, Direction::forward);
    worst_fp = std::max(worst_fp, l1_distance(rho, density(tr.frames[static_cast<std::size_t>(s + 1)])));
    if (dump && (s + 1) % dump_stride == 0) dump->append(tr.times[static_cast<std::size_t>(s + 1)], rho);
  }
  dump.reset();

  SimulationOptions opt;
  opt.dt = c.dt;
  opt.steps = c.steps;
  opt.frame_stride = c.steps;
  opt.sde.threads = ctx.threads;
  const auto paths = simulate(sample_ensemble(density(psi0), c.ensemble_size, c.seed),
                              frame_provider(drifts, 0.0, c.dt), k, opt);
  EnsembleState last;
  last.grid = g;
  last.positions = paths.frames.back();
  last.alive = paths.alive.back();
  const auto rho_kde = empirical_density(last, g);
  const auto rho_psi = density(tr.frames.back());

  ExperimentResult res;
  res.metrics["l1_fokker_planck_vs_psi_max"] = at_most(worst_fp, c.tolerance("l1_fp"));
  res.metrics["l1_ensemble_vs_fokker_planck"] = at_most(l1_distance(rho_kde, rho), c.tolerance("l1_ensemble"));
  res.metrics["fokker_planck_mass_drift"] = at_most(std::abs(integrate(rho) - mass0), c.tolerance("mass"));
  res.details["l1_ensemble_vs_psi"] = l1_distance(rho_kde, rho_psi);

  emit_table(res, ctx, "densities_final.csv", {"x", "rho_psi", "rho_fokker_planck", "rho_ensemble"},
             {coordinates(*g), column(rho_psi.values()), column(rho.values()), column(rho_kde.values())});
  res.plots.push_back({"densities", "Fokker-Planck, ensemble and |psi|^2 at the final time", "x", "rho", false,
                       false,
                       {{"densities_final.csv", "x", "rho_psi", "|psi|^2"},
                        {"densities_final.csv", "x", "rho_fokker_planck", "Fokker-Planck"},
                        {"densities_final.csv", "x", "rho_ensemble", "ensemble (KDE)"}}});
  if (wants_output(c, "density_dump")) res.artifacts.push_back("fp_density.zsmf");
  return res;
}

}  // namespace

Experiment make_equivariance_free_gaussian() {
  return {"equivariance-free-gaussian",
          "Particles sampled from |psi|^2 and driven by the forward drift of a spreading free "
          "Gaussian stay distributed as |psi(t)|^2; Wiener increments have covariance 2 nu dt.",
          "an ensemble moving with the drift of the diffusion keeps the density |psi|^2 at all times",
          json{{"grid", {{"topology", "line"}, {"lo", {-16.0, -1.0}}, {"hi", {16.0, 1.0}}, {"count", {801, 8}},
                         {"boundary", {"reflecting", "reflecting"}}}},
               {"initial_state", {{"x0", 0.0}, {"sigma", 1.0}, {"momentum", 0.5}}},
               {"dt", 0.002},
               {"steps", 1000},
               {"ensemble_size", 100000},
               {"seed", 20240501},
               {"tolerances", {{"l1", 0.05}, {"wiener_sigmas", 5.0}}}},
          run_equivariance};
}

Experiment make_stationary_node_avoidance() {
  return {"stationary-node-avoidance",
          "Paths driven by b = v + u of the m = 1 disk eigenstate never enter the nodal core; the "
          "same start points under pure noise do.",
          "a path that starts where the density is positive keeps a positive density for all times",
          json{{"grid", {{"topology", "polar"}, {"radius", 3.0}, {"count", {512, 64}}, {"boundary", {"absorbing", "periodic"}}}},
               {"potential", {{"kind", "harmonic"}, {"omega", 1.0}}},
               {"initial_state", {{"winding", 1}}},
               {"dt", 1e-4},
               {"steps", 1000},
               {"ensemble_size", 10000},
               {"seed", 7},
               {"tolerances", {{"mask_floor", 1e-4}}}},
          run_node_avoidance};
}

Experiment make_mean_acceleration_residual() {
  return {"mean-acceleration-residual",
          "Kinematic side (v.grad v - u.grad u - nu lap u) against -grad V / m on the harmonic ground "
          "state for a sequence of grids; the residual must fall at second order.",
          "the mean stochastic acceleration of the conservative diffusion equals the external force "
          "per unit mass",
          json{{"grid", {{"topology", "line"}, {"lo", {-6.0, -1.0}}, {"hi", {6.0, 1.0}}}},
               {"potential", {{"kind", "harmonic"}, {"omega", 1.0}}},
               {"parameters", {{"counts", {101, 201, 401, 801}}}},
               {"tolerances", {{"min_order", 1.8}, {"node_floor", 1e-6}}}},
          run_mean_acceleration};
}

Experiment make_fp_vs_ensemble() {
  return {"fp-vs-ensemble",
          "A displaced oscillator ground state: the forward Fokker-Planck equation with drift b(t), "
          "an SDE ensemble with the same drift and |psi(t)|^2 must agree.",
          "the forward diffusion's density obeys the forward Fokker-Planck equation, whose solution "
          "with the quantum drift is |psi|^2",
          json{{"grid", {{"topology", "line"}, {"lo", {-8.0, -1.0}}, {"hi", {8.0, 1.0}}, {"count", {801, 8}},
                         {"boundary", {"reflecting", "reflecting"}}}},
               {"potential", {{"kind", "harmonic"}, {"omega", 1.0}}},
               {"initial_state", {{"x0", 1.0}, {"momentum", 0.0}}},
               {"dt", 0.0025},
               {"steps", 800},
               {"ensemble_size", 20000},
               {"seed", 11},
               {"outputs", {"density_dump"}},
               {"tolerances", {{"l1_fp", 0.02}, {"l1_ensemble", 0.05}, {"mass", 1e-10}}}},
          run_fp_vs_ensemble};
}

}  // namespace zsm::cli
