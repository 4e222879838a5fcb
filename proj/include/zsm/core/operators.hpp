#pragma once

#include "zsm/core/field.hpp"

#include <Eigen/Core>

namespace zsm {

/// Finite-difference calculus on grid fields.
///
/// Second-order central stencils in the interior and on periodic axes,
/// second-order one-sided stencils at bounded ends. On the polar disk the
/// missing inner neighbour of the first ring is the node across the origin
/// (phi + pi); vector components change sign there. An output node is masked
/// whenever its stencil touches a masked input node.

/// Sign a field picks up when continued through the polar origin.
enum class Parity { even = 1, odd = -1 };

/// d f / d x_a in the grid's coordinate along `a` (not scaled by the metric).
/// When `mask` is given, nodes whose stencil touches a masked node are set in
/// `touched` (which is resized if empty).
Eigen::ArrayXd axis_derivative(const Grid& grid, const Eigen::ArrayXd& f, int a,
                               Parity parity = Parity::even, const Mask* mask = nullptr,
                               Mask* touched = nullptr);
Eigen::ArrayXd axis_second_derivative(const Grid& grid, const Eigen::ArrayXd& f, int a,
                                      Parity parity = Parity::even, const Mask* mask = nullptr,
                                      Mask* touched = nullptr);

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& w);
ScalarField laplacian(const ScalarField& f);
/// (a . grad) w, including the polar connection terms.
VectorField advective_derivative(const VectorField& a, const VectorField& w);
VectorField vector_laplacian(const VectorField& w);
/// z-component of the curl of a planar vector field (plane or polar grids).
ScalarField curl(const VectorField& w);

/// Line integral of a vector field along a grid edge (trapezoid in the
/// edge's endpoints), signed by traversal direction.
double edge_integral(const VectorField& w, const Edge& edge);
/// Circulation of a vector field around each plaquette (counter-clockwise);
/// zero for plaquettes that leave the grid.
Eigen::ArrayXd plaquette_circulation(const VectorField& w);

/// Converts a vector in the grid's local basis at `node` to Cartesian
/// components (identity except on the polar disk).
Eigen::Vector2d to_cartesian(const Grid& grid, Index node, const Eigen::Vector2d& local);

/// Bilinear interpolation of a scalar field at a Cartesian position, with
/// periodic wrap. Masked corners take the value of the nearest unmasked node
/// of the stencil. Positions outside a bounded axis are clamped to the edge.
double interpolate(const ScalarField& f, const Eigen::Vector2d& position);
/// Bilinear interpolation of a vector field; returns Cartesian components.
Eigen::Vector2d interpolate(const VectorField& w, const Eigen::Vector2d& position);

/// Node whose bilinear weight at `position` is largest.
Index nearest_node(const Grid& grid, const Eigen::Vector2d& position);

/// Replaces values at masked nodes with the value of the nearest unmasked
/// node (breadth-first over grid edges) and clears the mask.
VectorField fill_masked_from_neighbors(const VectorField& w);
ScalarField fill_masked_from_neighbors(const ScalarField& f);

}  // namespace zsm
