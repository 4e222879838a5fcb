#pragma once

#include "zsm/core/error.hpp"
#include "zsm/core/grid.hpp"

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <utility>

namespace zsm {

/// Node mask; `true` marks an excluded (nodal or otherwise invalid) node.
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

inline Mask empty_mask(Index n) { return Mask::Constant(n, false); }

/// A discretised function on a grid. `Values` is `ArrayXd` (scalar),
/// `ArrayXcd` (complex) or `ArrayXXd` with one column per component
/// (vector). Values are finite; masked nodes hold zero.
template <class Values>
class GridField {
 public:
  using value_array = Values;
  using Scalar = typename Values::Scalar;

  GridField(GridPtr grid, Values values, Mask mask = Mask())
      : grid_(std::move(grid)), values_(std::move(values)), mask_(std::move(mask)) {
    if (!grid_) throw InvalidArgument("field: null grid");
    if (values_.rows() != grid_->size())
      throw InvalidArgument("field: value count " + std::to_string(values_.rows()) +
                            " does not match grid node count " + std::to_string(grid_->size()));
    if (mask_.size() == 0) mask_ = empty_mask(grid_->size());
    if (mask_.size() != grid_->size()) throw InvalidArgument("field: mask size mismatch");
    for (Index i = 0; i < values_.rows(); ++i) {
      if (mask_(i)) {
        values_.row(i).setZero();
      } else if (!values_.row(i).allFinite()) {
        throw InvalidArgument("field: non-finite value at node " + std::to_string(i));
      }
    }
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Values& values() const { return values_; }
  const Mask& mask() const { return mask_; }
  bool masked(Index node) const { return mask_(node); }
  bool any_masked() const { return mask_.any(); }
  Index size() const { return values_.rows(); }
  int components() const { return static_cast<int>(values_.cols()); }

 private:
  GridPtr grid_;
  Values values_;
  Mask mask_;
};

using ScalarField = GridField<Eigen::ArrayXd>;
using ComplexField = GridField<Eigen::ArrayXcd>;
/// Components are in the grid's local basis: (x, y) on a plane, tangential on
/// a ring, (r-hat, phi-hat) on the polar disk.
using VectorField = GridField<Eigen::ArrayXXd>;

/// Samples `f(node)` at every node.
ScalarField sample(const GridPtr& grid, const std::function<double(const Grid&, Index)>& f);
ComplexField sample_complex(const GridPtr& grid,
                            const std::function<std::complex<double>(const Grid&, Index)>& f);

VectorField zero_vector_field(const GridPtr& grid);

/// Grid quadrature of a scalar field (masked nodes contribute zero).
double integrate(const ScalarField& f);
double integrate(const GridPtr& grid, const Eigen::ArrayXd& values);
double norm_squared(const ComplexField& psi);

/// Returns rho / integral(rho). Throws naming the first negative node, or if
/// the integral is not positive.
ScalarField normalize_density(const ScalarField& rho);
ComplexField normalize(const ComplexField& psi);

ScalarField density(const ComplexField& psi);
ScalarField add(const ScalarField& a, const ScalarField& b);
VectorField add(const VectorField& a, const VectorField& b);
VectorField subtract(const VectorField& a, const VectorField& b);
VectorField scale(const VectorField& a, double s);
/// Pointwise dot product of vector fields.
ScalarField dot(const VectorField& a, const VectorField& b);

Mask combine(const Mask& a, const Mask& b);

/// Weighted L2 and max norms over unmasked nodes.
double l2_norm(const ScalarField& f);
double linf_norm(const ScalarField& f);
/// L1 distance between two densities on one grid.
double l1_distance(const ScalarField& a, const ScalarField& b);

}  // namespace zsm
