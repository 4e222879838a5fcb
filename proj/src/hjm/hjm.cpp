#include "zsm/hjm/hjm.hpp"

#include "zsm/core/operators.hpp"
#include "zsm/schrodinger/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace zsm {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

bool near_edge(const Grid& g, Index n, int margin) {
  if (margin <= 0) return false;
  const auto c = g.coords(n);
  for (int a = 0; a < g.dim(); ++a) {
    const Axis& ax = g.axis(a);
    if (ax.periodic()) continue;
    const bool inner_polar = g.topology() == Topology::polar && a == 0;
    if ((!inner_polar && c[a] < margin) || c[a] >= ax.count - margin) return true;
  }
  return false;
}

struct Norms {
  double l2 = 0.0;
  double linf = 0.0;
};

Norms norms(const ScalarField& f, int margin) {
  const Grid& g = f.grid();
  Norms out;
  double sum = 0.0;
  for (Index i = 0; i < f.size(); ++i) {
    if (f.masked(i) || near_edge(g, i, margin)) continue;
    const double v = f.values()(i);
    sum += g.weights()(i) * v * v;
    out.linf = std::max(out.linf, std::abs(v));
  }
  out.l2 = std::sqrt(sum);
  return out;
}

/// Connected pieces of a mask, as node lists.
std::vector<std::vector<Index>> regions_of(const Grid& g, const Mask& mask) {
  std::vector<std::vector<Index>> out;
  Mask seen = empty_mask(g.size());
  for (Index s = 0; s < g.size(); ++s) {
    if (!mask(s) || seen(s)) continue;
    std::vector<Index> piece{s};
    seen(s) = true;
    for (std::size_t k = 0; k < piece.size(); ++k)
      for (int a = 0; a < g.dim(); ++a)
        for (int dir : {-1, 1}) {
          const auto m = g.neighbor(piece[k], a, dir);
          if (m && mask(*m) && !seen(*m)) {
            seen(*m) = true;
            piece.push_back(*m);
          }
        }
    out.push_back(std::move(piece));
  }
  return out;
}

bool loop_clear(const Loop& loop, const Mask& mask) {
  return std::none_of(loop.nodes.begin(), loop.nodes.end(), [&](Index n) { return mask(n); });
}

}  // namespace

ResidualReport hjm_residuals(const ScalarField& rho, const PhaseField& S, const Potentials& pot,
                             const PhysicalConstants& k, const ResidualOptions& o) {
  const GridPtr& gp = rho.grid_ptr();
  if (!same_grid(gp, S.grid_ptr()) || !same_grid(gp, pot.grid_ptr()))
    throw InvalidArgument("hjm_residuals: rho, S and the potentials must share one grid");
  if (!o.stationary && (!o.drho_dt || !o.ds_dt))
    throw InvalidArgument(
        "hjm_residuals: time-dependent input needs d rho/dt and dS/dt; build them from evolution frames");
  if (o.stationary && !o.energy && !o.ds_dt)
    throw InvalidArgument("hjm_residuals: stationary input needs the energy or dS/dt");

  const PotentialFrame& frame = pot.at(o.time);
  const VectorField* a_ext = frame.vector_potential ? &*frame.vector_potential : nullptr;
  const VectorField v = current_velocity(S, k, a_ext);
  const Mask nodes = node_mask(rho, o.node_floor);

  const Eigen::ArrayXXd flux = v.values().colwise() * rho.values();
  const ScalarField div = divergence(VectorField(gp, flux, v.mask()));
  Eigen::ArrayXd cont = div.values();
  Mask cont_mask = combine(div.mask(), nodes);
  if (o.drho_dt) {
    cont += o.drho_dt->values();
    cont_mask = combine(cont_mask, o.drho_dt->mask());
  }

  const ScalarField q = quantum_kinetic(rho, k, o.node_floor);
  const ScalarField vt = pot.total_scalar(o.time);
  Eigen::ArrayXd hj = 0.5 * k.mass() * v.values().square().rowwise().sum() + vt.values() + q.values();
  Mask hj_mask = combine(combine(v.mask(), q.mask()), nodes);
  if (o.ds_dt) {
    hj += o.ds_dt->values();
    hj_mask = combine(hj_mask, o.ds_dt->mask());
  } else {
    hj -= *o.energy;
  }
  if (o.include_rest_energy) hj += k.rest_energy();

  ResidualReport r{ScalarField(gp, cont, cont_mask), ScalarField(gp, hj, hj_mask)};
  const Norms cn = norms(r.continuity, o.edge_margin), hn = norms(r.hamilton_jacobi, o.edge_margin);
  r.continuity_l2 = cn.l2;
  r.continuity_linf = cn.linf;
  r.hj_l2 = hn.l2;
  r.hj_linf = hn.linf;
  r.continuity_tolerance = o.continuity_tolerance;
  r.hj_tolerance = o.hj_tolerance;
  r.continuity_passed = cn.linf <= o.continuity_tolerance;
  r.hj_passed = hn.linf <= o.hj_tolerance;
  r.rest_energy_included = o.include_rest_energy;
  return r;
}

FrameDerivatives frame_derivatives(const ComplexField& before, const ComplexField& at,
                                   const ComplexField& after, double dt, const PhysicalConstants& k,
                                   double node_floor) {
  if (!(dt != 0.0)) throw InvalidArgument("frame_derivatives: dt must be non-zero");
  const PolarDecomposition pd = polar_decompose(at, k, node_floor);
  const Mask mask = node_mask(pd.rho, node_floor);
  const Eigen::ArrayXd drho = (after.values().abs2() - before.values().abs2()) / (2.0 * dt);
  Eigen::ArrayXd ds(at.size());
  for (Index i = 0; i < at.size(); ++i)
    ds(i) = mask(i) ? 0.0 : k.hbar() * std::arg(after.values()(i) * std::conj(before.values()(i))) / (2.0 * dt);
  return {pd.rho, pd.phase, ScalarField(at.grid_ptr(), drho), ScalarField(at.grid_ptr(), ds, mask)};
}

std::string to_string(WindingClass c) { return c == WindingClass::integer ? "integer" : "non-integer"; }

WallstromSolution wallstrom_extraneous_solution(double a, const ScalarField& v, const PhysicalConstants& k,
                                                double tol) {
  const GridPtr& gp = v.grid_ptr();
  const Grid& g = *gp;
  if (g.topology() != Topology::polar) throw InvalidArgument("wallstrom: needs a polar grid");
  if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("wallstrom: a must be finite and >= 0");
  const double hbar = k.hbar(), m = k.mass();
  const double w = std::sqrt(2.0 * m * a / (hbar * hbar) + 1.0);

  RadialState rs;
  try {
    rs = radial_ground_state(g, radial_profile(v), w, k, 1e-12);
  } catch (const Error& e) {
    throw Error(std::string("wallstrom: radial solve failed: ") + e.what());
  }
  const ScalarField rho = sample(gp, [&](const Grid& gr, Index n) {
    const double r = rs.profile(gr.coords(n)[0]);
    return r * r;
  });
  const PhaseField base = PhaseField::from_function(gp, [&](double, double phi) { return hbar * phi; }, k);
  const PhaseField scaled = PhaseField::from_function(gp, [&](double, double phi) { return hbar * w * phi; }, k);
  const VectorField vb = current_velocity(base, k), vs = current_velocity(scaled, k);
  double scaling = 0.0;
  for (Index i = 0; i < g.size(); ++i)
    if (!vb.masked(i) && !vs.masked(i))
      scaling = std::max(scaling, (vs.values().row(i) - w * vb.values().row(i)).abs().maxCoeff());

  const ScalarField va = sample(gp, [&](const Grid& gr, Index n) {
    const double r = gr.coordinate(n, 0);
    return v.values()(n) + a / (r * r);
  });
  ResidualOptions opt;
  opt.energy = rs.energy;
  opt.edge_margin = 1;
  opt.continuity_tolerance = tol;
  opt.hj_tolerance = tol;
  WallstromSolution s{a,
                      w,
                      std::abs(w - std::round(w)) <= integer_window ? WindingClass::integer
                                                                     : WindingClass::non_integer,
                      rs.energy,
                      rho,
                      base,
                      scaled,
                      vb,
                      vs,
                      scaling,
                      hjm_residuals(rho, base, Potentials(va), k, opt),
                      hjm_residuals(rho, scaled, Potentials(v), k, opt),
                      false};
  s.residuals_passed = s.residual_base.passed() && s.residual_scaled.passed();
  return s;
}

GateReport quantization_gate(const PhaseField& S, const PhysicalConstants& k, const std::vector<Loop>& loops,
                             double tol) {
  const Grid& g = S.grid();
  const Mask& mask = S.mask();
  const double tolerance = tol * S.action_quantum();
  GateReport report;
  std::vector<Loop> all = loops;

  if (g.topology() == Topology::ring) {
    if (mask.any()) report.notes.push_back("ring loop broken by masked nodes");
    else all.push_back(ring_loop(g));
  }
  const auto regions = regions_of(g, mask);
  if (g.topology() == Topology::polar) {
    int core = -1;
    for (const auto& piece : regions)
      if (std::any_of(piece.begin(), piece.end(), [&](Index n) { return g.coords(n)[0] == 0; }))
        for (Index n : piece) core = std::max(core, g.coords(n)[0]);
    int ir = core + 1;
    while (ir < g.count(0) && !loop_clear(polar_circle_loop(g, ir), mask)) ++ir;
    if (ir < g.count(0)) {
      Loop loop = polar_circle_loop(g, ir);
      loop.label = "core " + loop.label;
      all.push_back(loop);
    } else {
      report.notes.push_back("no clear circle around the polar core");
    }
  }
  if (g.topology() == Topology::plane)
    for (int a = 0; a < 2; ++a) {
      if (!g.axis(a).periodic()) continue;
      const int other = 1 - a;
      bool found = false;
      for (int f = 0; f < g.count(other) && !found; ++f) {
        const Loop loop = periodic_line_loop(g, a, f);
        if (loop_clear(loop, mask)) {
          all.push_back(loop);
          found = true;
        }
      }
      if (!found) report.notes.push_back("no clear periodic line along axis " + std::to_string(a));
    }
  if (g.dim() == 2)
    for (std::size_t r = 0; r < regions.size(); ++r) {
      const auto& piece = regions[r];
      if (g.topology() == Topology::polar &&
          std::any_of(piece.begin(), piece.end(), [&](Index n) { return g.coords(n)[0] == 0; }))
        continue;
      int lo[2] = {g.count(0), g.count(1)}, hi[2] = {-1, -1};
      for (Index n : piece)
        for (int a = 0; a < 2; ++a) {
          lo[a] = std::min(lo[a], g.coords(n)[a]);
          hi[a] = std::max(hi[a], g.coords(n)[a]);
        }
      bool enclosed = false;
      for (int margin = 1; margin <= 4 && !enclosed; ++margin) {
        try {
          Loop loop = rectangle_loop(g, lo[0] - margin, lo[1] - margin, hi[0] + margin, hi[1] + margin);
          if (hi[0] - lo[0] + 2 * margin >= g.count(0) && g.axis(0).periodic()) break;
          if (hi[1] - lo[1] + 2 * margin >= g.count(1) && g.axis(1).periodic()) break;
          if (!loop_clear(loop, mask)) continue;
          loop.label = "masked region " + std::to_string(r) + " " + loop.label;
          all.push_back(loop);
          enclosed = true;
        } catch (const InvalidArgument&) {
          break;
        }
      }
      if (!enclosed)
        report.notes.push_back("masked region " + std::to_string(r) + " cannot be enclosed by a clear loop");
    }
  if (all.empty()) report.notes.push_back("no closed loops on this grid");

  for (const Loop& loop : all) {
    report.windings.push_back(circulation(S, loop, k, tolerance));
    report.accepted = report.accepted && report.windings.back().accepted;
  }
  return report;
}

SuperpositionReport ring_superposition_check(const GridPtr& ring, double k1, double k2, std::complex<double> c1,
                                             std::complex<double> c2) {
  if (!ring || ring->topology() != Topology::ring)
    throw InvalidArgument("ring_superposition_check: needs a ring grid");
  const double radius = ring->radius();
  auto psi = [&](double theta) {
    return c1 * std::polar(1.0, k1 * theta) + c2 * std::polar(1.0, k2 * theta);
  };
  Eigen::ArrayXd dens(ring->size()), shifted(ring->size());
  for (Index i = 0; i < ring->size(); ++i) {
    const double theta = ring->coordinate(i, 0) / radius;
    dens(i) = std::norm(psi(theta));
    shifted(i) = std::norm(psi(theta + two_pi));
  }
  const double norm = integrate(ring, dens);
  if (!(norm > 0.0)) throw InvalidArgument("ring_superposition_check: superposition vanishes");
  const double dk = k1 - k2;
  return {k1, k2, (shifted - dens).abs().maxCoeff() / norm,
          std::abs(dk - std::round(dk)) <= integer_window, ScalarField(ring, dens / norm)};
}

nlohmann::json to_json(const ResidualReport& r) {
  return {{"continuity_l2", r.continuity_l2},
          {"continuity_linf", r.continuity_linf},
          {"hj_l2", r.hj_l2},
          {"hj_linf", r.hj_linf},
          {"continuity_tolerance", r.continuity_tolerance},
          {"hj_tolerance", r.hj_tolerance},
          {"continuity_passed", r.continuity_passed},
          {"hj_passed", r.hj_passed},
          {"rest_energy_included", r.rest_energy_included}};
}

nlohmann::json to_json(const WallstromSolution& s) {
  return {{"a", s.a},
          {"winding", s.winding},
          {"classification", to_string(s.classification)},
          {"energy", s.energy},
          {"velocity_scaling_error", s.velocity_scaling_error},
          {"residual_base", to_json(s.residual_base)},
          {"residual_scaled", to_json(s.residual_scaled)},
          {"residuals_passed", s.residuals_passed}};
}

nlohmann::json to_json(const GateReport& r) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& x : r.windings) w.push_back(to_json(x));
  return {{"windings", w}, {"notes", r.notes}, {"verdict", r.verdict()}};
}

nlohmann::json to_json(const SuperpositionReport& r) {
  return {{"k1", r.k1}, {"k2", r.k2}, {"max_mismatch", r.max_mismatch}, {"single_valued", r.single_valued}};
}

}  // namespace zsm
