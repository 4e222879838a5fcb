#include "zsm/schrodinger/schrodinger.hpp"
#include "zsm/schrodinger/tridiagonal.hpp"

#include <cmath>
#include <complex>
#include <deque>
#include <numbers>

namespace zsm {

namespace {

using cd = std::complex<double>;
using ArrayC = Eigen::ArrayXcd;

/// Kinetic operator -hbar^2/2m d^2/dx^2 along one axis as tridiagonal bands.
/// Reflecting ends mirror the interior neighbour, absorbing ends see a zero
/// ghost, periodic axes wrap.
struct AxisKinetic {
  Eigen::ArrayXd lower, diag, upper;
  bool cyclic = false;

  AxisKinetic(const Axis& ax, const PhysicalConstants& k) {
    const int n = ax.count;
    const double kappa = k.hbar() * k.hbar() / (2.0 * k.mass() * ax.spacing * ax.spacing);
    lower = Eigen::ArrayXd::Constant(n, -kappa);
    upper = Eigen::ArrayXd::Constant(n, -kappa);
    diag = Eigen::ArrayXd::Constant(n, 2.0 * kappa);
    cyclic = ax.periodic();
    if (!cyclic) {
      lower(0) = upper(n - 1) = 0.0;
      if (ax.boundary == Boundary::reflecting) {
        upper(0) = -2.0 * kappa;
        lower(n - 1) = -2.0 * kappa;
      }
    }
  }
};

void check_supported(const ComplexField& psi0, const Potentials& pot, double dt, int steps) {
  if (psi0.grid().topology() == Topology::polar)
    throw UnsupportedFeature("evolution on the polar disk is not implemented");
  if (pot.has_vector_potential())
    throw UnsupportedFeature("time evolution with a vector potential is not implemented");
  if (!(psi0.grid() == *pot.grid_ptr())) throw InvalidArgument("evolve: potential lives on a different grid");
  if (dt == 0.0 || !std::isfinite(dt)) throw InvalidArgument("evolve: dt must be finite and non-zero");
  if (steps < 0) throw InvalidArgument("evolve: negative step count");
  if (std::abs(norm_squared(psi0) - 1.0) > 1e-8) throw InvalidArgument("evolve: psi0 is not normalized");
}

/// Cayley step (1 + i tau H)^{-1} (1 - i tau H) along axis `a` for every
/// grid line, with H = kinetic + v_share.
void cayley_axis(const Grid& g, ArrayC& psi, int a, const AxisKinetic& t, const Eigen::ArrayXd& v_share,
                 double tau) {
  const int n = g.count(a);
  const int lines = static_cast<int>(g.size() / n);
  const cd it(0.0, tau);
  ArrayC lo = it * t.lower.cast<cd>(), up = it * t.upper.cast<cd>();
  ArrayC line(n), vline(n);
  for (int l = 0; l < lines; ++l) {
    auto node = [&](int i) { return a == 0 ? g.index(i, l) : g.index(l, i); };
    for (int i = 0; i < n; ++i) {
      line(i) = psi(node(i));
      vline(i) = v_share(node(i));
    }
    const ArrayC d_plus = 1.0 + it * (t.diag.cast<cd>() + vline);
    const ArrayC d_minus = 1.0 - it * (t.diag.cast<cd>() + vline);
    const ArrayC rhs = tridiagonal_apply<cd>(-lo, d_minus, -up, line, t.cyclic);
    const ArrayC next = t.cyclic ? solve_cyclic_tridiagonal<cd>(lo, d_plus, up, rhs)
                                 : solve_tridiagonal<cd>(lo, d_plus, up, rhs);
    for (int i = 0; i < n; ++i) psi(node(i)) = next(i);
  }
}

class LinearStepper {
 public:
  LinearStepper(const Grid& g, const PhysicalConstants& k) : g_(g), hbar_(k.hbar()) {
    for (int a = 0; a < g.dim(); ++a) kinetic_.emplace_back(g.axis(a), k);
  }

  void step(ArrayC& psi, const Eigen::ArrayXd& v, double dt) const {
    const double tau = dt / (2.0 * hbar_);
    if (g_.dim() == 1) {
      cayley_axis(g_, psi, 0, kinetic_[0], v, tau);
      return;
    }
    const Eigen::ArrayXd half = 0.5 * v;
    cayley_axis(g_, psi, 0, kinetic_[0], half, 0.5 * tau);
    cayley_axis(g_, psi, 1, kinetic_[1], half, tau);
    cayley_axis(g_, psi, 0, kinetic_[0], half, 0.5 * tau);
  }

  /// Kinetic operator applied to a real array.
  Eigen::ArrayXd kinetic(const Eigen::ArrayXd& f) const {
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(f.size());
    for (int a = 0; a < g_.dim(); ++a) {
      const int n = g_.count(a);
      const int lines = static_cast<int>(g_.size() / n);
      const AxisKinetic& t = kinetic_[static_cast<std::size_t>(a)];
      Eigen::ArrayXd line(n);
      for (int l = 0; l < lines; ++l) {
        auto node = [&](int i) { return a == 0 ? g_.index(i, l) : g_.index(l, i); };
        for (int i = 0; i < n; ++i) line(i) = f(node(i));
        const Eigen::ArrayXd r = tridiagonal_apply<double>(t.lower, t.diag, t.upper, line, t.cyclic);
        for (int i = 0; i < n; ++i) out(node(i)) += r(i);
      }
    }
    return out;
  }

  const AxisKinetic& axis(int a) const { return kinetic_[static_cast<std::size_t>(a)]; }

 private:
  const Grid& g_;
  double hbar_;
  std::vector<AxisKinetic> kinetic_;
};

/// Nonlinear classical flow in amplitude/phase form. The phase follows the
/// discrete Hamilton-Jacobi equation theta_t = -(K + V)/hbar with
/// K_i = sum_n |T_in| (1 - cos(theta_n - theta_i)); the amplitude follows
/// a_t = B a with B_in = T_in sin(theta_n - theta_i) / hbar, which is
/// Re/Im of (T psi)/psi with the amplitude-curvature part removed.
/// Both updates reuse the axis splitting and Cayley form of LinearStepper,
/// so a discrete plane wave moves exactly as under the linear solver.
class ClassicalStepper {
 public:
  ClassicalStepper(const Grid& g, const PhysicalConstants& k) : g_(g), hbar_(k.hbar()), linear_(g, k) {}

  /// Steps per unit dt needed to keep the phase Courant number at most one.
  double courant(const Eigen::ArrayXd& theta, const Eigen::Array<bool, Eigen::Dynamic, 1>& in, double dt) const {
    double nu = 0.0;
    for (int a = 0; a < g_.dim(); ++a) {
      const AxisKinetic& t = linear_.axis(a);
      const int n = g_.count(a);
      for_lines(a, [&](auto node) {
        for (int i = 0; i < n; ++i)
          couple(t, n, i, [&](double c, int j) {
            if (in(node(i)) && in(node(j)))
              nu = std::max(nu, std::abs(c * wrap(theta(node(j)) - theta(node(i)))));
          });
      });
    }
    return 2.0 * nu * std::abs(dt) / hbar_;
  }

  void step(Eigen::ArrayXd& amp, Eigen::ArrayXd& theta, const Eigen::ArrayXd& v, double dt) const {
    const double tau = dt / (2.0 * hbar_);
    Eigen::ArrayXd next = theta + increment(theta, v, tau);
    for (int it = 0; it < 3; ++it) next = theta + increment(0.5 * (theta + next), v, tau);
    const Eigen::ArrayXd mid = 0.5 * (theta + next);
    if (g_.dim() == 1) {
      transport(amp, mid, 0, tau);
    } else {
      transport(amp, mid, 0, 0.5 * tau);
      transport(amp, mid, 1, tau);
      transport(amp, mid, 0, 0.5 * tau);
    }
    theta = next;
  }

  /// Overwrites the phase where a < 1e-12 max a by continuing the edge
  /// increments of the occupied region outward, breadth first.
  void extend(Eigen::ArrayXd& theta, const Eigen::ArrayXd& amp) const {
    const double floor = 1e-12 * amp.maxCoeff();
    Eigen::Array<bool, Eigen::Dynamic, 1> known = amp >= floor;
    if (known.all() || !known.any()) return;
    std::deque<Index> queue;
    for (Index n = 0; n < g_.size(); ++n)
      if (known(n)) queue.push_back(n);
    while (!queue.empty()) {
      const Index n = queue.front();
      queue.pop_front();
      for (int a = 0; a < g_.dim(); ++a)
        for (int dir : {-1, 1}) {
          const auto m = g_.neighbor(n, a, dir);
          if (!m || known(*m)) continue;
          const auto back = g_.neighbor(n, a, -dir);
          theta(*m) = theta(n) + (back && known(*back) ? wrap(theta(n) - theta(*back)) : 0.0);
          known(*m) = true;
          queue.push_back(*m);
        }
    }
  }

 private:
  static double wrap(double x) { return std::remainder(x, 2.0 * std::numbers::pi); }

  template <class F>
  void for_lines(int a, F f) const {
    const int n = g_.count(a);
    const int lines = static_cast<int>(g_.size() / n);
    for (int l = 0; l < lines; ++l) f([&, l](int i) { return a == 0 ? g_.index(i, l) : g_.index(l, i); });
  }

  /// Calls f(coefficient, neighbour) for each off-diagonal entry of row i.
  template <class F>
  static void couple(const AxisKinetic& t, int n, int i, F f) {
    if (i > 0) f(t.lower(i), i - 1);
    else if (t.cyclic) f(t.lower(0), n - 1);
    if (i < n - 1) f(t.upper(i), i + 1);
    else if (t.cyclic) f(t.upper(n - 1), 0);
  }

  Eigen::ArrayXd phase_kinetic(const Eigen::ArrayXd& theta, int a) const {
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(theta.size());
    const AxisKinetic& t = linear_.axis(a);
    const int n = g_.count(a);
    for_lines(a, [&](auto node) {
      if (t.cyclic) {
        for (int i = 0; i < n; ++i)
          couple(t, n, i, [&](double c, int j) { out(node(i)) -= c * (1.0 - std::cos(theta(node(j)) - theta(node(i)))); });
        return;
      }
      // bounded ends see a ghost continuing the last phase increment
      for (int i = 0; i + 1 < n; ++i) {
        const double w = 1.0 - std::cos(theta(node(i + 1)) - theta(node(i)));
        out(node(i)) += (i == 0 ? t.diag(0) : -t.upper(i)) * w;
        out(node(i + 1)) += (i + 1 == n - 1 ? t.diag(n - 1) : -t.lower(i + 1)) * w;
      }
    });
    return out;
  }

  /// Phase change of one Cayley step, split across axes like LinearStepper::step.
  Eigen::ArrayXd increment(const Eigen::ArrayXd& theta, const Eigen::ArrayXd& v, double tau) const {
    if (g_.dim() == 1) return -2.0 * ((phase_kinetic(theta, 0) + v) * tau).atan();
    const Eigen::ArrayXd half = 0.5 * v;
    return -4.0 * ((phase_kinetic(theta, 0) + half) * (0.5 * tau)).atan() -
           2.0 * ((phase_kinetic(theta, 1) + half) * tau).atan();
  }

  /// a <- (1 - tau hbar B)^{-1} (1 + tau hbar B) a along axis `a`.
  void transport(Eigen::ArrayXd& amp, const Eigen::ArrayXd& theta, int a, double tau) const {
    const AxisKinetic& t = linear_.axis(a);
    const int n = g_.count(a);
    Eigen::ArrayXd lo(n), up(n), line(n);
    const Eigen::ArrayXd one = Eigen::ArrayXd::Ones(n);
    for_lines(a, [&](auto node) {
      lo.setZero();
      up.setZero();
      for (int i = 0; i < n; ++i) {
        line(i) = amp(node(i));
        const double th = theta(node(i));
        if (i > 0 || t.cyclic) lo(i) = t.lower(i) * std::sin(theta(node(i > 0 ? i - 1 : n - 1)) - th) * tau;
        if (i < n - 1 || t.cyclic) up(i) = t.upper(i) * std::sin(theta(node(i < n - 1 ? i + 1 : 0)) - th) * tau;
      }
      const Eigen::ArrayXd rhs = tridiagonal_apply<double>(lo, one, up, line, t.cyclic);
      const Eigen::ArrayXd out = t.cyclic ? solve_cyclic_tridiagonal<double>(-lo, one, -up, rhs)
                                          : solve_tridiagonal<double>(-lo, one, -up, rhs);
      for (int i = 0; i < n; ++i) amp(node(i)) = out(i);
    });
  }

  const Grid& g_;
  double hbar_;
  LinearStepper linear_;
};

/// Connected pieces of `in` carrying at least `mass_floor` of the total mass.
int support_components(const Grid& g, const Eigen::Array<bool, Eigen::Dynamic, 1>& in, const Eigen::ArrayXd& rho,
                       double mass_floor) {
  Eigen::Array<bool, Eigen::Dynamic, 1> seen = !in;
  const double total = (rho * g.weights()).sum();
  int count = 0;
  for (Index s = 0; s < g.size(); ++s) {
    if (seen(s)) continue;
    double mass = 0.0;
    seen(s) = true;
    std::deque<Index> q{s};
    while (!q.empty()) {
      const Index i = q.front();
      q.pop_front();
      mass += rho(i) * g.weights()(i);
      for (int a = 0; a < g.dim(); ++a)
        for (int d : {-1, 1}) {
          const auto m = g.neighbor(i, a, d);
          if (m && !seen(*m)) {
            seen(*m) = true;
            q.push_back(*m);
          }
        }
    }
    if (mass >= mass_floor * total) ++count;
  }
  return count;
}

template <class Step>
Trajectory run(const ComplexField& psi0, const Potentials& pot, double dt, int steps,
               const PhysicalConstants& k, const EvolutionOptions& opt, Step step) {
  if (opt.stride < 1) throw InvalidArgument("evolve: stride must be >= 1");
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.frames.push_back(psi0);
  ArrayC psi = psi0.values();
  const cd rest = std::polar(1.0, -k.rest_energy() * dt / k.hbar());
  for (int s = 1; s <= steps; ++s) {
    const double t_mid = (s - 0.5) * dt;
    const Eigen::ArrayXd v = pot.total_scalar(t_mid).values();
    step(psi, v, (s - 1) * dt);
    if (opt.rest_energy) psi *= rest;
    const double t = s * dt;
    if (opt.observer || s % opt.stride == 0 || s == steps) {
      ComplexField frame(psi0.grid_ptr(), psi);
      if (opt.observer) opt.observer(t, frame);
      if (s % opt.stride == 0 || s == steps) {
        traj.times.push_back(t);
        traj.frames.push_back(std::move(frame));
      }
    }
  }
  return traj;
}

}  // namespace

Trajectory evolve_linear(const ComplexField& psi0, const Potentials& pot, double dt, int steps,
                         const PhysicalConstants& k, const EvolutionOptions& options) {
  check_supported(psi0, pot, dt, steps);
  const LinearStepper stepper(psi0.grid(), k);
  return run(psi0, pot, dt, steps, k, options,
             [&](ArrayC& psi, const Eigen::ArrayXd& v, double) { stepper.step(psi, v, dt); });
}

Trajectory evolve_nonlinear_classical(const ComplexField& psi0, const Potentials& pot, double dt, int steps,
                                      const PhysicalConstants& k, const EvolutionOptions& options) {
  check_supported(psi0, pot, dt, steps);
  const Grid& g = psi0.grid();
  const ClassicalStepper stepper(g, k);
  auto support = [&](const Eigen::ArrayXd& amp) {
    return (amp * amp >= options.node_floor * amp.square().maxCoeff()).eval();
  };
  Eigen::ArrayXd amp = psi0.values().abs();
  Eigen::ArrayXd theta = psi0.values().arg();
  stepper.extend(theta, amp);
  const int components0 = support_components(g, support(amp), amp.square(), options.component_mass_floor);
  Index anchor = 0;
  amp.maxCoeff(&anchor);
  return run(psi0, pot, dt, steps, k, options, [&](ArrayC& psi, const Eigen::ArrayXd& v, double t0) {
    // picks up any global phase applied between steps
    theta += std::arg(psi(anchor) * std::polar(1.0, -theta(anchor)));
    const int sub = std::max(1, static_cast<int>(std::ceil(stepper.courant(theta, support(amp), dt))));
    const double h = dt / sub;
    for (int j = 0; j < sub; ++j) {
      stepper.step(amp, theta, v, h);
      if (support_components(g, support(amp), amp.square(), options.component_mass_floor) > components0)
        throw NodeFormationError("nonlinear evolution: a node formed inside the support", t0 + (j + 1) * h);
    }
    for (Index i = 0; i < g.size(); ++i) psi(i) = std::polar(amp(i), theta(i));
    amp.maxCoeff(&anchor);
  });
}

ComplexField apply_hamiltonian(const ComplexField& psi, const ScalarField& v_total, const PhysicalConstants& k) {
  if (psi.grid().topology() == Topology::polar)
    throw UnsupportedFeature("apply_hamiltonian: use the radial solver on the polar disk");
  const LinearStepper stepper(psi.grid(), k);
  const Eigen::ArrayXd re = psi.values().real(), im = psi.values().imag();
  ArrayC out(psi.size());
  out.real() = stepper.kinetic(re) + v_total.values() * re;
  out.imag() = stepper.kinetic(im) + v_total.values() * im;
  return {psi.grid_ptr(), std::move(out)};
}

}  // namespace zsm
