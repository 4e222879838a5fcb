#include "zsm/diffusion/diffusion.hpp"

#include "zsm/core/operators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace zsm {

namespace {

constexpr std::uint32_t sampling_substream = 0xFFFFFFFFu;

/// Runs body(begin, end) over [0, n) on up to `threads` workers.
template <class Body>
void parallel_for(Index n, int threads, const Body& body) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<Index>(n / 256, 1))));
  if (threads == 1) {
    body(Index{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  const Index chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const Index b = t * chunk, e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back([&body, b, e] { body(b, e); });
  }
  for (auto& th : pool) th.join();
}

/// Position on x within a linear-density cell of mass fraction u.
double linear_cell_inverse(double ra, double rb, double u) {
  const double mass = 0.5 * (ra + rb);
  if (mass <= 0.0) return u;
  const double target = u * mass;
  const double slope = rb - ra;
  if (std::abs(slope) < 1e-12 * (ra + rb)) return target / std::max(ra, 1e-300);
  // ra t + slope t^2 / 2 = target, root in [0, 1]
  const double disc = std::max(ra * ra + 2.0 * slope * target, 0.0);
  return std::clamp(2.0 * target / (ra + std::sqrt(disc)), 0.0, 1.0);
}

Eigen::ArrayXXd sample_1d(const ScalarField& rho, Index count, std::uint64_t seed) {
  const Grid& g = rho.grid();
  const Axis& ax = g.axis(0);
  const int n = ax.count;
  const int cells = ax.periodic() ? n : n - 1;
  std::vector<double> cdf(static_cast<std::size_t>(cells) + 1, 0.0);
  for (int c = 0; c < cells; ++c) {
    const double ra = std::max(rho.values()(c), 0.0), rb = std::max(rho.values()((c + 1) % n), 0.0);
    cdf[c + 1] = cdf[c] + 0.5 * (ra + rb);
  }
  if (!(cdf.back() > 0.0)) throw InvalidArgument("sample_ensemble: density has no mass");
  Eigen::ArrayXXd q(count, 1);
  for (Index i = 0; i < count; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i), sampling_substream);
    const double target = rng.uniform() * cdf.back();
    int c = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), target) - cdf.begin()) - 1;
    c = std::clamp(c, 0, cells - 1);
    while (c < cells - 1 && cdf[c + 1] <= cdf[c]) ++c;
    const double ra = std::max(rho.values()(c), 0.0), rb = std::max(rho.values()((c + 1) % n), 0.0);
    const double width = cdf[c + 1] - cdf[c];
    const double u = width > 0.0 ? std::clamp((target - cdf[c]) / width, 0.0, 1.0) : 0.5;
    double x = ax.coordinate(c) + linear_cell_inverse(ra, rb, u) * ax.spacing;
    if (ax.periodic() && x >= ax.origin + ax.length()) x -= ax.length();
    q(i, 0) = x;
  }
  return q;
}

Eigen::ArrayXXd sample_2d(const ScalarField& rho, Index count, std::uint64_t seed) {
  const Grid& g = rho.grid();
  const double peak = rho.values().maxCoeff();
  if (!(peak > 0.0)) throw InvalidArgument("sample_ensemble: density has no mass");
  const bool disk = g.topology() == Topology::polar;
  double lo[2] = {0.0, 0.0}, span[2] = {0.0, 0.0};
  if (!disk)
    for (int a = 0; a < 2; ++a) {
      lo[a] = g.axis(a).origin;
      span[a] = g.axis(a).length();
    }
  const double area = disk ? std::numbers::pi * g.radius() * g.radius() : span[0] * span[1];
  const double acceptance = integrate(rho) / (area * peak);
  if (acceptance < 1e-4)
    throw InvalidArgument("sample_ensemble: rejection acceptance " + std::to_string(acceptance) +
                          " is below 1e-4; review the grid extent or the density");
  const long max_tries = static_cast<long>(std::ceil(1e3 / acceptance));
  Eigen::ArrayXXd q(count, 2);
  for (Index i = 0; i < count; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i), sampling_substream);
    bool accepted = false;
    for (long t = 0; t < max_tries && !accepted; ++t) {
      Eigen::Vector2d p;
      if (disk) {
        const double r = g.radius() * std::sqrt(rng.uniform());
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        p = {r * std::cos(phi), r * std::sin(phi)};
      } else {
        p = {lo[0] + span[0] * rng.uniform(), lo[1] + span[1] * rng.uniform()};
      }
      if (rng.uniform() * peak < interpolate(rho, p)) {
        q.row(i) = p.transpose().array();
        accepted = true;
      }
    }
    if (!accepted) throw Error("sample_ensemble: rejection sampling did not terminate");
  }
  return q;
}

/// Folds x into [lo, hi] by mirror reflection.
double reflect(double x, double lo, double hi) {
  const double w = hi - lo;
  double y = std::fmod(x - lo, 2.0 * w);
  if (y < 0.0) y += 2.0 * w;
  return lo + (y <= w ? y : 2.0 * w - y);
}

/// Applies boundary conditions; false when the particle is absorbed.
bool apply_boundaries(const Grid& g, Eigen::Vector2d& q) {
  if (g.topology() == Topology::polar) {
    const double R = g.radius(), r = q.norm();
    if (r <= R) return true;
    if (g.axis(0).boundary == Boundary::absorbing) return false;
    const double folded = reflect(r, -R, R);
    q *= std::abs(folded) / r;
    if (folded < 0.0) q = -q;
    return true;
  }
  for (int a = 0; a < g.dim(); ++a) {
    const Axis& ax = g.axis(a);
    const double lo = ax.origin, hi = ax.origin + ax.length();
    if (ax.periodic()) {
      double y = std::fmod(q(a) - lo, ax.length());
      if (y < 0.0) y += ax.length();
      if (y >= ax.length()) y = 0.0;
      q(a) = lo + y;
    } else if (q(a) < lo || q(a) > hi) {
      if (ax.boundary == Boundary::absorbing) return false;
      q(a) = reflect(q(a), lo, hi);
    }
  }
  return true;
}

}  // namespace

std::string to_string(Direction direction) {
  return direction == Direction::forward ? "forward" : "backward";
}

Eigen::Vector2d EnsembleState::position(Index i) const {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  for (int a = 0; a < dim(); ++a) p(a) = positions(i, a);
  return p;
}

EnsembleState sample_ensemble(const ScalarField& rho0, Index count, std::uint64_t seed) {
  if (count <= 0) throw InvalidArgument("sample_ensemble: particle count must be positive");
  if ((rho0.values() < -1e-12 * rho0.values().abs().maxCoeff()).any())
    throw InvalidArgument("sample_ensemble: density has negative values");
  EnsembleState ens;
  ens.grid = rho0.grid_ptr();
  ens.seed = seed;
  ens.positions = rho0.grid().dim() == 1 ? sample_1d(rho0, count, seed) : sample_2d(rho0, count, seed);
  ens.alive = AliveFlags::Constant(count, true);
  return ens;
}

EnsembleState step_sde(const EnsembleState& ens, const VectorField& drift, double dt,
                       const PhysicalConstants& k, Direction direction, const SdeOptions& options,
                       Eigen::ArrayXXd* increments) {
  if (!(dt > 0.0)) throw InvalidArgument("step_sde: dt must be positive");
  if (!same_grid(ens.grid, drift.grid_ptr()))
    throw InvalidArgument("step_sde: drift lives on a different grid than the ensemble");
  const Grid& g = *ens.grid;
  const VectorField b = drift.any_masked() ? fill_masked_from_neighbors(drift) : drift;
  const double nu = options.diffusion_override.value_or(k.diffusion());
  if (nu < 0.0) throw InvalidArgument("step_sde: diffusion must be non-negative");
  const double noise = std::sqrt(2.0 * nu * dt);
  const double sign = direction == Direction::forward ? 1.0 : -1.0;
  const auto substream =
      static_cast<std::uint32_t>(2 * ens.step + (direction == Direction::backward ? 1 : 0));
  const int d = ens.dim();

  EnsembleState out = ens;
  out.time = ens.time + sign * dt;
  out.step = ens.step + 1;
  if (increments) *increments = Eigen::ArrayXXd::Zero(ens.size(), d);
  std::vector<char> absorbed(static_cast<std::size_t>(ens.size()), 0);
  std::atomic<bool> nonfinite{false};

  parallel_for(ens.size(), options.threads, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      if (!ens.alive(i)) continue;
      Eigen::Vector2d q = ens.position(i);
      if (!q.allFinite()) {
        nonfinite = true;
        continue;
      }
      const Eigen::Vector2d v = interpolate(b, q);
      CounterRng rng(ens.seed, static_cast<std::uint64_t>(i), substream);
      Eigen::Vector2d w = Eigen::Vector2d::Zero();
      for (int a = 0; a < d; ++a) w(a) = noise * rng.normal();
      q += sign * v * dt + w;
      if (increments)
        for (int a = 0; a < d; ++a) (*increments)(i, a) = w(a);
      if (!apply_boundaries(g, q)) {
        absorbed[static_cast<std::size_t>(i)] = 1;
        continue;
      }
      for (int a = 0; a < d; ++a) out.positions(i, a) = q(a);
    }
  });
  if (nonfinite) throw Error("step_sde: non-finite particle position");
  for (Index i = 0; i < ens.size(); ++i)
    if (absorbed[static_cast<std::size_t>(i)]) {
      out.alive(i) = false;
      ++out.removed;
    }
  return out;
}

void WienerMoments::add(const Eigen::ArrayXXd& increments, const AliveFlags& alive) {
  for (Index i = 0; i < increments.rows(); ++i) {
    if (!alive(i)) continue;
    Eigen::Vector2d w = Eigen::Vector2d::Zero();
    for (int a = 0; a < increments.cols(); ++a) w(a) = increments(i, a);
    sum += w;
    outer += w * w.transpose();
    ++samples;
  }
}

WienerReport wiener_check(const WienerMoments& m, int dim, double nu, double dt, double sigmas) {
  WienerReport r;
  r.samples = m.samples;
  r.expected_variance = 2.0 * nu * dt;
  if (m.samples < 2) return r;
  const double n = static_cast<double>(m.samples);
  r.mean = m.sum / n;
  r.covariance = m.outer / n - r.mean * r.mean.transpose();
  const double var = r.expected_variance;
  if (!(var > 0.0)) return r;
  for (int a = 0; a < dim; ++a) {
    r.max_z = std::max(r.max_z, std::abs(r.mean(a)) / std::sqrt(var / n));
    r.max_z = std::max(r.max_z, std::abs(r.covariance(a, a) - var) / (var * std::sqrt(2.0 / n)));
  }
  if (dim == 2) r.max_z = std::max(r.max_z, std::abs(r.covariance(0, 1)) / (var / std::sqrt(n)));
  r.passed = r.max_z <= sigmas;
  return r;
}

TrajectoryBundle simulate(EnsembleState ens, const DriftProvider& drift,
                          const PhysicalConstants& k, const SimulationOptions& options) {
  if (options.steps < 0) throw InvalidArgument("simulate: steps must be non-negative");
  if (options.frame_stride < 1) throw InvalidArgument("simulate: frame_stride must be >= 1");
  TrajectoryBundle bundle;
  bundle.grid = ens.grid;
  bundle.direction = options.direction;
  bundle.dt = options.dt;
  bundle.frame_stride = options.frame_stride;
  bundle.seed = ens.seed;
  auto record = [&] {
    bundle.times.push_back(ens.time);
    bundle.frames.push_back(ens.positions);
    bundle.alive.push_back(ens.alive);
  };
  record();
  Eigen::ArrayXXd dw;
  for (int s = 0; s < options.steps; ++s) {
    const AliveFlags before = ens.alive;
    ens = step_sde(ens, drift(ens.time), options.dt, k, options.direction, options.sde, &dw);
    bundle.wiener.add(dw, before);
    if (options.store_increments) bundle.increments.push_back(dw);
    if ((s + 1) % options.frame_stride == 0) record();
  }
  bundle.removed = ens.removed;
  return bundle;
}

nlohmann::json to_json(const WienerReport& r) {
  return {{"samples", r.samples},
          {"mean", {r.mean(0), r.mean(1)}},
          {"covariance", {r.covariance(0, 0), r.covariance(0, 1), r.covariance(1, 1)}},
          {"expected_variance", r.expected_variance},
          {"max_z", r.max_z},
          {"passed", r.passed}};
}

}  // namespace zsm
