#include "zsm/schrodinger/schrodinger.hpp"
#include "zsm/schrodinger/tridiagonal.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>

namespace zsm {

namespace {

using std::numbers::pi;

/// Symmetric tridiagonal matrix: diagonal d, off-diagonal e (e(i) couples i, i+1).
struct SymTridiagonal {
  Eigen::ArrayXd d, e;

  Index size() const { return d.size(); }

  /// Number of eigenvalues below x (Sturm sequence count).
  int count_below(double x) const {
    int count = 0;
    double q = d(0) - x;
    if (q < 0.0) ++count;
    for (Index i = 1; i < size(); ++i) {
      if (q == 0.0) q = std::numeric_limits<double>::epsilon() * (std::abs(e(i - 1)) + 1e-300);
      q = d(i) - x - e(i - 1) * e(i - 1) / q;
      if (q < 0.0) ++count;
    }
    return count;
  }

  double lowest_eigenvalue() const {
    double lo = std::numeric_limits<double>::max(), hi = -lo;
    for (Index i = 0; i < size(); ++i) {
      const double r = (i > 0 ? std::abs(e(i - 1)) : 0.0) + (i + 1 < size() ? std::abs(e(i)) : 0.0);
      lo = std::min(lo, d(i) - r);
      hi = std::max(hi, d(i) + r);
    }
    for (int it = 0; it < 200 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(mid) >= 1) hi = mid;
      else lo = mid;
    }
    return 0.5 * (lo + hi);
  }

  Eigen::ArrayXd apply(const Eigen::ArrayXd& y) const {
    Eigen::ArrayXd out = d * y;
    const Index n = size();
    out.head(n - 1) += e * y.tail(n - 1);
    out.tail(n - 1) += e * y.head(n - 1);
    return out;
  }

  Eigen::ArrayXd solve_shifted(double sigma, const Eigen::ArrayXd& rhs) const {
    const Index n = size();
    Eigen::ArrayXd lower(n), upper(n);
    lower(0) = 0.0;
    lower.tail(n - 1) = e;
    upper.head(n - 1) = e;
    upper(n - 1) = 0.0;
    return solve_tridiagonal<double>(lower, d - sigma, upper, rhs);
  }
};

struct LowestPair {
  Eigen::ArrayXd vector;
  double value;
  int iterations;
};

/// Sturm bisection for the eigenvalue, then inverse iteration from `seed`.
/// `scale(y)` maps the symmetric-form vector to the physical profile used for
/// the residual test.
template <class Residual>
LowestPair lowest_pair(const SymTridiagonal& m, Eigen::ArrayXd seed, double tol, Residual residual) {
  const double lambda = m.lowest_eigenvalue();
  const double shift = lambda - 1e-10 * std::max(1.0, std::abs(lambda));
  Eigen::ArrayXd y = seed / std::sqrt(seed.square().sum());
  double last = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= 50; ++it) {
    y = m.solve_shifted(shift, y);
    y /= std::sqrt(y.square().sum());
    const double rq = (y * m.apply(y)).sum();
    last = residual(y, rq);
    if (last <= tol) return {y, rq, it};
  }
  throw ConvergenceError("inverse iteration did not reach tolerance", last);
}

}  // namespace

RadialState radial_ground_state(const Grid& g, const Eigen::ArrayXd& v, double winding,
                                const PhysicalConstants& k, double tol) {
  if (g.topology() != Topology::polar) throw InvalidArgument("radial_ground_state: needs a polar grid");
  if (winding < 0.0) throw InvalidArgument("radial_ground_state: winding must be non-negative");
  const int n = g.count(0);
  if (v.size() != n) throw InvalidArgument("radial_ground_state: potential has the wrong length");
  const double dr = g.axis(0).spacing;
  const double c = k.hbar() * k.hbar() / (2.0 * k.mass());
  const double kappa = c / (dr * dr);
  Eigen::ArrayXd r(n), diag(n);
  for (int i = 0; i < n; ++i) r(i) = (i + 0.5) * dr;
  // conservative form with face radii r_{i +- 1/2}; R vanishes on the outer face
  for (int i = 0; i < n; ++i) {
    const double outer_face = (i + 1) * dr;
    const double inner_face = i * dr;
    const double outer = i == n - 1 ? 2.0 * outer_face : outer_face;
    diag(i) = kappa * (outer + inner_face) / r(i) + c * winding * winding / (r(i) * r(i)) + v(i);
  }
  SymTridiagonal m{diag, Eigen::ArrayXd(n - 1)};
  for (int i = 0; i + 1 < n; ++i) m.e(i) = -kappa * (i + 1) * dr / std::sqrt(r(i) * r(i + 1));

  const Eigen::ArrayXd sqrt_r = r.sqrt();
  Eigen::Index imin;
  (v + c * winding * winding / (r * r)).minCoeff(&imin);
  const double width = std::max(4.0 * dr, 0.1 * g.radius());
  Eigen::ArrayXd seed = (-((r - r(imin)) / width).square()).exp() + 1e-3;

  auto physical_residual = [&](const Eigen::ArrayXd& y, double e) {
    return ((m.apply(y) - e * y) / sqrt_r).abs().maxCoeff() / (y / sqrt_r).abs().maxCoeff();
  };
  LowestPair p = lowest_pair(m, seed, tol, physical_residual);
  Eigen::ArrayXd profile = p.vector / sqrt_r;
  if (profile.sum() < 0.0) profile = -profile;
  const double norm = 2.0 * pi * (profile.square() * r).sum() * dr;
  RadialState out;
  out.profile = profile / std::sqrt(norm);
  out.energy = p.value;
  out.residual = physical_residual(p.vector, p.value);
  out.iterations = p.iterations;
  return out;
}

Eigen::ArrayXd radial_profile(const ScalarField& f, double tolerance) {
  const Grid& g = f.grid();
  if (g.topology() != Topology::polar) throw InvalidArgument("radial_profile: needs a polar grid");
  Eigen::ArrayXd p(g.count(0));
  const double scale = std::max(1.0, f.values().abs().maxCoeff());
  for (int i = 0; i < g.count(0); ++i) {
    p(i) = f.values()(g.index(i, 0));
    for (int j = 1; j < g.count(1); ++j)
      if (std::abs(f.values()(g.index(i, j)) - p(i)) > tolerance * scale)
        throw InvalidArgument("radial_profile: field depends on the angle at radial index " + std::to_string(i));
  }
  return p;
}

EigenstateResult central_eigenstate(const ScalarField& v, int winding, const PhysicalConstants& k, double tol) {
  if (winding < 0) throw InvalidArgument("central_eigenstate: winding must be non-negative");
  const Grid& g = v.grid();
  const RadialState rs = radial_ground_state(g, radial_profile(v), winding, k, tol);
  EigenstateResult out{winding, static_cast<double>(winding), rs.energy, false,
                       sample_complex(v.grid_ptr(),
                                      [&](const Grid& gr, Index n) {
                                        const auto c = gr.coords(n);
                                        return std::polar(rs.profile(c[0]), winding * gr.coordinate(n, 1));
                                      }),
                       rs.residual};
  return out;
}

EigenstateResult line_ground_state(const ScalarField& v, const PhysicalConstants& k, double tol) {
  const Grid& g = v.grid();
  if (g.topology() != Topology::line || g.axis(0).periodic())
    throw InvalidArgument("line_ground_state: needs a bounded line");
  const int n = g.count(0);
  const double h = g.axis(0).spacing;
  const double kappa = k.hbar() * k.hbar() / (2.0 * k.mass() * h * h);
  SymTridiagonal m{2.0 * kappa + v.values(), Eigen::ArrayXd::Constant(n - 1, -kappa)};
  Eigen::Index imin;
  v.values().minCoeff(&imin);
  Eigen::ArrayXd x(n);
  for (int i = 0; i < n; ++i) x(i) = g.coordinate(i, 0);
  const Eigen::ArrayXd seed = (-((x - x(imin)) / (0.1 * g.axis(0).length())).square()).exp() + 1e-3;
  auto residual = [&](const Eigen::ArrayXd& y, double e) {
    return (m.apply(y) - e * y).abs().maxCoeff() / y.abs().maxCoeff();
  };
  LowestPair p = lowest_pair(m, seed, tol, residual);
  Eigen::ArrayXd y = p.vector;
  if (y.sum() < 0.0) y = -y;
  const double norm = integrate(v.grid_ptr(), y.square());
  y /= std::sqrt(norm);
  return {0, 0.0, p.value, false, ComplexField(v.grid_ptr(), y.cast<std::complex<double>>()),
          residual(p.vector, p.value)};
}

EigenstateResult ring_eigenstate(int n, double radius, int count, const PhysicalConstants& k) {
  auto g = Grid::ring(radius, count);
  const double amp = 1.0 / std::sqrt(2.0 * pi * radius);
  auto psi = sample_complex(g, [&](const Grid& gr, Index i) { return std::polar(amp, n * gr.coordinate(i, 0) / radius); });
  const double e = n * n * k.hbar() * k.hbar() / (2.0 * k.mass() * radius * radius);
  const ComplexField hpsi = apply_hamiltonian(psi, ScalarField(g, Eigen::ArrayXd::Zero(count)), k);
  const double res = (hpsi.values() - e * psi.values()).abs().maxCoeff() / amp;
  return {n, static_cast<double>(n), e, false, psi, res};
}

Eigen::VectorXd ring_spectrum(double radius, int count, const PhysicalConstants& k) {
  auto g = Grid::ring(radius, count);
  const double h = g->axis(0).spacing;
  const double kappa = k.hbar() * k.hbar() / (2.0 * k.mass() * h * h);
  Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(count, count);
  for (int i = 0; i < count; ++i) {
    hm(i, i) = 2.0 * kappa;
    hm(i, (i + 1) % count) = -kappa;
    hm(i, (i + count - 1) % count) = -kappa;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace zsm
