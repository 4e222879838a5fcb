#include "zsm/diffusion/diffusion.hpp"

#include "zsm/core/operators.hpp"
#include "zsm/fields/fields.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace zsm {

namespace {

bool periodic_axis(const Grid& g, int a) {
  return g.topology() != Topology::polar && a < g.dim() && g.axis(a).periodic();
}

double minimum_image(const Grid& g, int a, double d) {
  if (!periodic_axis(g, a)) return d;
  const double L = g.axis(a).length();
  return d - L * std::round(d / L);
}

/// Cartesian vector to the grid's local basis at `node`.
Eigen::Vector2d to_local(const Grid& g, Index node, const Eigen::Vector2d& v) {
  if (g.topology() != Topology::polar) return v;
  const double phi = g.coordinate(node, 1);
  const double c = std::cos(phi), s = std::sin(phi);
  return {c * v(0) + s * v(1), -s * v(0) + c * v(1)};
}

struct BinSums {
  Eigen::ArrayXXd sum, sumsq;
  Eigen::ArrayXi counts;
};

template <class Sample>
MeanDerivativeEstimate bin_pairs(const TrajectoryBundle& paths, Direction direction, int components,
                                 int min_samples, const Sample& sample) {
  if (paths.frames.size() < 2) throw InvalidArgument("mean_derivative: need at least two frames");
  if (min_samples < 2) throw InvalidArgument("mean_derivative: min_samples must be >= 2");
  const Grid& g = *paths.grid;
  const Index n = g.size();
  BinSums s{Eigen::ArrayXXd::Zero(n, components), Eigen::ArrayXXd::Zero(n, components),
            Eigen::ArrayXi::Zero(n)};
  Index pairs = 0;
  for (std::size_t f = 0; f + 1 < paths.frames.size(); ++f) {
    const double dtp = paths.times[f + 1] - paths.times[f];
    if (dtp == 0.0) continue;
    const bool increasing = dtp > 0.0;
    const auto& qa = increasing ? paths.frames[f] : paths.frames[f + 1];
    const auto& qb = increasing ? paths.frames[f + 1] : paths.frames[f];
    const double tau = std::abs(dtp);
    for (Index i = 0; i < paths.particles(); ++i) {
      if (!paths.alive[f](i) || !paths.alive[f + 1](i)) continue;
      Eigen::Vector2d early = Eigen::Vector2d::Zero(), late = Eigen::Vector2d::Zero();
      for (int a = 0; a < paths.dim(); ++a) {
        early(a) = qa(i, a);
        late(a) = qb(i, a);
      }
      const Eigen::Vector2d& cond = direction == Direction::forward ? early : late;
      const Index node = nearest_node(g, cond);
      const Eigen::VectorXd value = sample(node, early, late, tau);
      s.sum.row(node) += value.array().transpose();
      s.sumsq.row(node) += value.array().square().transpose();
      ++s.counts(node);
      ++pairs;
    }
  }
  MeanDerivativeEstimate e{VectorField(paths.grid, Eigen::ArrayXXd::Zero(n, components)),
                           VectorField(paths.grid, Eigen::ArrayXXd::Zero(n, components)),
                           s.counts, 0, pairs};
  Eigen::ArrayXXd mean = Eigen::ArrayXXd::Zero(n, components), se = mean;
  Mask mask = empty_mask(n);
  for (Index node = 0; node < n; ++node) {
    const int c = s.counts(node);
    if (c < min_samples) {
      mask(node) = true;
      ++e.masked_bins;
      continue;
    }
    mean.row(node) = s.sum.row(node) / c;
    const Eigen::ArrayXd var =
        ((s.sumsq.row(node) - c * mean.row(node).square()) / (c - 1)).max(0.0).transpose();
    se.row(node) = (var / c).sqrt().transpose();
  }
  e.mean = VectorField(paths.grid, std::move(mean), mask);
  e.standard_error = VectorField(paths.grid, std::move(se), mask);
  return e;
}

/// Pieces of the low-density set that stay clear of the grid's bounded edges.
Mask nodal_regions(const ScalarField& rho, double floor) {
  const Grid& g = rho.grid();
  const Mask low = node_mask(rho, floor);
  auto on_edge = [&](Index n) {
    const auto c = g.coords(n);
    for (int a = 0; a < g.dim(); ++a) {
      if (g.axis(a).periodic()) continue;
      const bool inner_polar = g.topology() == Topology::polar && a == 0;
      if ((c[a] == 0 && !inner_polar) || c[a] == g.axis(a).count - 1) return true;
    }
    return false;
  };
  Mask out = empty_mask(g.size());
  Mask seen = empty_mask(g.size());
  for (Index start = 0; start < g.size(); ++start) {
    if (!low(start) || seen(start)) continue;
    std::vector<Index> piece{start};
    seen(start) = true;
    bool edge = false;
    for (std::size_t k = 0; k < piece.size(); ++k) {
      const Index n = piece[k];
      edge = edge || on_edge(n);
      for (int a = 0; a < g.dim(); ++a)
        for (int dir : {-1, 1}) {
          const auto m = g.neighbor(n, a, dir);
          if (m && low(*m) && !seen(*m)) {
            seen(*m) = true;
            piece.push_back(*m);
          }
        }
    }
    if (!edge)
      for (Index n : piece) out(n) = true;
  }
  return out;
}

}  // namespace

MeanDerivativeEstimate mean_derivative(const TrajectoryBundle& paths, Direction direction,
                                       int min_samples) {
  const Grid& g = *paths.grid;
  const int d = g.dim();
  return bin_pairs(paths, direction, d, min_samples,
                   [&](Index node, const Eigen::Vector2d& early, const Eigen::Vector2d& late,
                       double tau) {
                     Eigen::Vector2d disp = late - early;
                     for (int a = 0; a < d; ++a) disp(a) = minimum_image(g, a, disp(a));
                     const Eigen::Vector2d local = to_local(g, node, disp / tau);
                     return Eigen::VectorXd(local.head(d));
                   });
}

MeanDerivativeEstimate mean_derivative(const TrajectoryBundle& paths, const ScalarField& f,
                                       Direction direction, int min_samples) {
  if (!same_grid(paths.grid, f.grid_ptr()))
    throw InvalidArgument("mean_derivative: field lives on a different grid than the paths");
  return bin_pairs(paths, direction, 1, min_samples,
                   [&](Index, const Eigen::Vector2d& early, const Eigen::Vector2d& late, double tau) {
                     Eigen::VectorXd v(1);
                     v(0) = (interpolate(f, late) - interpolate(f, early)) / tau;
                     return v;
                   });
}

AccelerationReport mean_acceleration(const ScalarField& rho, const PhaseField& S,
                                     const Potentials& pot, const PhysicalConstants& k,
                                     const AccelerationOptions& options) {
  if (!options.stationary && !options.dv_dt)
    throw InvalidArgument(
        "mean_acceleration: time-dependent state needs dv/dt; supply it from evolution frames");
  const PotentialFrame& frame = pot.at(options.time);
  const VectorField* a_ext = frame.vector_potential ? &*frame.vector_potential : nullptr;
  const KinematicFields kin = kinematic_fields(rho, S, k, a_ext, options.node_floor);
  const VectorField& v = kin.current;
  const VectorField& u = kin.osmotic;
  VectorField acc = subtract(subtract(advective_derivative(v, v), advective_derivative(u, u)),
                             scale(vector_laplacian(u), k.diffusion()));
  if (options.dv_dt) acc = add(acc, *options.dv_dt);

  const VectorField grad_v = gradient(pot.total_scalar(options.time));
  VectorField force = scale(grad_v, -1.0 / k.mass());
  if (a_ext) {
    const ScalarField b = *pot.magnetic_field(options.time);
    const double q_over_m = vector_coupling(k) / k.mass();
    Eigen::ArrayXXd lorentz = Eigen::ArrayXXd::Zero(v.size(), v.components());
    if (v.components() == 2) {
      lorentz.col(0) = q_over_m * v.values().col(1) * b.values();
      lorentz.col(1) = -q_over_m * v.values().col(0) * b.values();
    }
    force = add(force, VectorField(v.grid_ptr(), std::move(lorentz), combine(v.mask(), b.mask())));
  }
  VectorField residual = subtract(acc, force);
  AccelerationReport r{acc, force, residual, 0.0, 0.0};
  const Eigen::ArrayXd& w = rho.grid().weights();
  double sum = 0.0;
  for (Index i = 0; i < residual.size(); ++i) {
    if (residual.masked(i)) continue;
    const double m2 = residual.values().row(i).square().sum();
    sum += w(i) * m2;
    r.residual_max = std::max(r.residual_max, std::sqrt(m2));
  }
  r.residual_l2 = std::sqrt(sum);
  return r;
}

double silverman_bandwidth(const EnsembleState& ens) {
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(ens.dim()));
  for (Index i = 0; i < ens.size(); ++i)
    if (ens.alive(i))
      for (int a = 0; a < ens.dim(); ++a) cols[a].push_back(ens.positions(i, a));
  const double n = static_cast<double>(cols.front().size());
  if (n < 2) throw InvalidArgument("silverman_bandwidth: need at least two live particles");
  auto sigma = [&](const std::vector<double>& x) {
    double m = 0.0, s = 0.0;
    for (double v : x) m += v;
    m /= n;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / (n - 1));
  };
  if (ens.dim() == 1) {
    std::vector<double> x = cols[0];
    std::sort(x.begin(), x.end());
    const double iqr = x[static_cast<std::size_t>(0.75 * (n - 1))] - x[static_cast<std::size_t>(0.25 * (n - 1))];
    const double spread = iqr > 0.0 ? std::min(sigma(x), iqr / 1.34) : sigma(x);
    return 0.9 * spread * std::pow(n, -0.2);
  }
  const double s = std::sqrt(0.5 * (std::pow(sigma(cols[0]), 2) + std::pow(sigma(cols[1]), 2)));
  return s * std::pow(n, -1.0 / 6.0);
}

ScalarField empirical_density(const EnsembleState& ens, const GridPtr& grid,
                              std::optional<double> bandwidth) {
  if (!same_grid(ens.grid, grid))
    throw InvalidArgument("empirical_density: grid differs from the ensemble's grid");
  if (ens.alive.count() < 100) throw InvalidArgument("empirical_density: need at least 100 live particles");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(ens);
  if (!(h > 0.0)) throw InvalidArgument("empirical_density: bandwidth must be positive");
  const Grid& g = *grid;
  const int d = ens.dim();

  // Cartesian buckets of side >= 4h; periodic axes get a whole number of buckets.
  double lo[2] = {0, 0}, cell[2] = {1, 1};
  int nb[2] = {1, 1};
  for (int a = 0; a < d; ++a) {
    double span;
    if (periodic_axis(g, a)) {
      lo[a] = g.axis(a).origin;
      span = g.axis(a).length();
    } else {
      double mn = ens.positions.col(a).minCoeff(), mx = ens.positions.col(a).maxCoeff();
      for (Index n = 0; n < g.size(); ++n) {
        mn = std::min(mn, g.cartesian(n)(a));
        mx = std::max(mx, g.cartesian(n)(a));
      }
      lo[a] = mn;
      span = std::max(mx - mn, h);
    }
    nb[a] = std::max(1, static_cast<int>(std::floor(span / (4.0 * h))));
    cell[a] = span / nb[a];
  }
  auto bucket_of = [&](const Eigen::Vector2d& p, int a) {
    return std::clamp(static_cast<int>(std::floor((p(a) - lo[a]) / cell[a])), 0, nb[a] - 1);
  };
  std::vector<std::vector<Index>> buckets(static_cast<std::size_t>(nb[0] * nb[1]));
  for (Index i = 0; i < ens.size(); ++i) {
    if (!ens.alive(i)) continue;
    const Eigen::Vector2d p = ens.position(i);
    buckets[static_cast<std::size_t>(bucket_of(p, 0) + nb[0] * (d == 2 ? bucket_of(p, 1) : 0))]
        .push_back(i);
  }
  auto neighbours = [&](int b, int a) {
    std::set<int> out;
    for (int o = -1; o <= 1; ++o) {
      int c = b + o;
      if (periodic_axis(g, a)) c = ((c % nb[a]) + nb[a]) % nb[a];
      if (c >= 0 && c < nb[a]) out.insert(c);
    }
    return out;
  };
  Eigen::ArrayXd values = Eigen::ArrayXd::Zero(g.size());
  const double inv = 1.0 / (2.0 * h * h);
  for (Index n = 0; n < g.size(); ++n) {
    const Eigen::Vector2d p = g.cartesian(n);
    const std::set<int> bx = neighbours(bucket_of(p, 0), 0);
    const std::set<int> by = d == 2 ? neighbours(bucket_of(p, 1), 1) : std::set<int>{0};
    double acc = 0.0;
    for (int x : bx)
      for (int y : by)
        for (Index i : buckets[static_cast<std::size_t>(x + nb[0] * y)]) {
          double r2 = 0.0;
          for (int a = 0; a < d; ++a) r2 += std::pow(minimum_image(g, a, ens.positions(i, a) - p(a)), 2);
          acc += std::exp(-r2 * inv);
        }
    values(n) = acc;
  }
  return normalize_density(ScalarField(grid, std::move(values)));
}

NodeAuditReport node_avoidance_audit(const TrajectoryBundle& paths,
                                     const std::vector<ScalarField>& rho_frames, double mask_floor) {
  if (rho_frames.empty()) throw InvalidArgument("node_avoidance_audit: no density frames");
  if (rho_frames.size() != 1 && rho_frames.size() != paths.frames.size())
    throw InvalidArgument("node_avoidance_audit: need one density frame or one per path frame");
  const Grid& g = *paths.grid;
  NodeAuditReport r;
  r.mask_floor = mask_floor;
  r.min_rho = std::numeric_limits<double>::infinity();
  r.min_rho_relative = r.min_rho;
  AliveFlags inside = AliveFlags::Constant(paths.particles(), false);
  for (std::size_t f = 0; f < paths.frames.size(); ++f) {
    const ScalarField& rho = rho_frames[rho_frames.size() == 1 ? 0 : f];
    if (!same_grid(paths.grid, rho.grid_ptr()))
      throw InvalidArgument("node_avoidance_audit: density frame on a different grid");
    const Mask mask = nodal_regions(rho, mask_floor);
    const double peak = rho.values().maxCoeff();
    for (Index i = 0; i < paths.particles(); ++i) {
      if (!paths.alive[f](i)) continue;
      Eigen::Vector2d q = Eigen::Vector2d::Zero();
      for (int a = 0; a < paths.dim(); ++a) q(a) = paths.frames[f](i, a);
      const bool in = mask(nearest_node(g, q));
      ++r.samples;
      if (in) {
        ++r.samples_in_mask;
        if (!inside(i)) ++r.entries;
      }
      inside(i) = in;
      const double value = interpolate(rho, q);
      r.min_rho = std::min(r.min_rho, value);
      r.min_rho_relative = std::min(r.min_rho_relative, value / peak);
    }
  }
  return r;
}

nlohmann::json to_json(const NodeAuditReport& r) {
  return {{"mask_floor", r.mask_floor},      {"entries", r.entries},
          {"samples", r.samples},            {"samples_in_mask", r.samples_in_mask},
          {"min_rho", r.min_rho},            {"min_rho_relative", r.min_rho_relative}};
}

}  // namespace zsm
