#pragma once

#include "zsm/core/constants.hpp"
#include "zsm/core/field.hpp"
#include "zsm/core/phase_field.hpp"
#include "zsm/core/potentials.hpp"
#include "zsm/diffusion/philox.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace zsm {

/// Forward processes run t -> t + dt with drift b; backward processes run
/// t -> t - dt with drift b* and their own noise.
enum class Direction { forward, backward };

std::string to_string(Direction direction);

using AliveFlags = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Particle cloud at one instant. Positions are N x d: the native coordinate
/// (x or arc length s) on 1-D grids, Cartesian (x, y) on the plane and the
/// polar disk. Removed particles keep their last position with `alive` false.
struct EnsembleState {
  GridPtr grid;
  double time = 0.0;
  long step = 0;
  std::uint64_t seed = 0;
  Eigen::ArrayXXd positions;
  AliveFlags alive;
  Index removed = 0;

  Index size() const { return positions.rows(); }
  int dim() const { return static_cast<int>(positions.cols()); }
  Eigen::Vector2d position(Index i) const;
};

/// N independent draws from rho0 (inverse CDF of the piecewise-linear density
/// in 1-D, rejection from a uniform proposal in 2-D).
EnsembleState sample_ensemble(const ScalarField& rho0, Index count, std::uint64_t seed);

struct SdeOptions {
  int threads = 1;
  /// Non-physical test hook replacing nu (e.g. 0 for pure drift transport).
  std::optional<double> diffusion_override;
};

/// One Euler-Maruyama step. Noise for particle i at step n comes from the
/// counter stream (seed, i, 2n + backward), so results do not depend on the
/// thread count. When `increments` is given it receives the N x d Wiener
/// increments (Cartesian), zero rows for dead particles.
EnsembleState step_sde(const EnsembleState& ens, const VectorField& drift, double dt,
                       const PhysicalConstants& k, Direction direction,
                       const SdeOptions& options = {}, Eigen::ArrayXXd* increments = nullptr);

/// Running sums of all Wiener increments of a run.
struct WienerMoments {
  Index samples = 0;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Matrix2d outer = Eigen::Matrix2d::Zero();

  void add(const Eigen::ArrayXXd& increments, const AliveFlags& alive);
};

struct WienerReport {
  Index samples = 0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  double expected_variance = 0.0;
  /// Largest |z| over the mean and covariance entries.
  double max_z = 0.0;
  bool passed = false;
};

/// Mean-zero and covariance 2 nu dt I tests at `sigmas` standard errors.
WienerReport wiener_check(const WienerMoments& moments, int dim, double nu, double dt,
                          double sigmas = 5.0);

struct TrajectoryBundle {
  GridPtr grid;
  Direction direction = Direction::forward;
  double dt = 0.0;
  int frame_stride = 1;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<Eigen::ArrayXXd> frames;
  std::vector<AliveFlags> alive;
  /// Per-step increments, only when requested.
  std::vector<Eigen::ArrayXXd> increments;
  WienerMoments wiener;
  Index removed = 0;

  Index particles() const { return frames.empty() ? 0 : frames.front().rows(); }
  int dim() const { return frames.empty() ? 0 : static_cast<int>(frames.front().cols()); }
};

/// Drift at the current time of the process.
using DriftProvider = std::function<VectorField(double t)>;

struct SimulationOptions {
  double dt = 0.0;
  int steps = 0;
  Direction direction = Direction::forward;
  int frame_stride = 1;
  bool store_increments = false;
  SdeOptions sde;
};

TrajectoryBundle simulate(EnsembleState ens, const DriftProvider& drift,
                          const PhysicalConstants& k, const SimulationOptions& options);

/// Chunked little-endian dump:
///
///   "ZSMT" | u8 version=1 | u8 direction | u8 has_increments | f64 dt |
///   u64 N | u32 d | u32 frame_stride | u64 seed | grid | u64 removed |
///   u32 frames | frames x { f64 time | u8 alive[N] | f64 q[N d] } |
///   u32 increment_steps | steps x { f64 dW[N d] } |
///   u64 samples | f64 sum[2] | f64 outer[4]
///
/// grid = u8 topology | f64 radius | 2 x (f64 origin | f64 spacing | u32 count | u8 boundary)
void write_trajectory(const std::string& path, const TrajectoryBundle& bundle);
TrajectoryBundle read_trajectory(const std::string& path);

struct FokkerPlanckReport {
  /// max |b| dt / spacing.
  double courant = 0.0;
  double mass_before = 0.0;
  double mass_after = 0.0;
  std::vector<std::string> warnings;
};

/// Forward-time right-hand side of the forward (d rho/dt = -div(b rho) + nu lap rho)
/// or backward (d rho/dt = -div(b* rho) - nu lap rho) equation. Fluxes use
/// central differences; the normal flux vanishes on reflecting walls and rho
/// is pinned to zero on absorbing ones. Polar grids are not supported.
ScalarField fokker_planck_rate(const ScalarField& rho, const VectorField& drift,
                               const PhysicalConstants& k, Direction direction);

/// One backward-Euler step. Forward: rho(t) -> rho(t + dt). Backward: the
/// backward equation is integrated backward in time, rho(t) -> rho(t - dt),
/// which is the well-posed direction for it.
ScalarField fokker_planck_step(const ScalarField& rho, const VectorField& drift, double dt,
                               const PhysicalConstants& k, Direction direction,
                               FokkerPlanckReport* report = nullptr);

struct MeanDerivativeEstimate {
  /// Per-bin estimate (local basis for vectors); masked where under-populated.
  VectorField mean;
  VectorField standard_error;
  Eigen::ArrayXi counts;
  Index masked_bins = 0;
  Index pairs = 0;
};

/// Monte Carlo D q (forward) or D* q (backward) from consecutive frame pairs.
/// D conditions each displacement on the position at the earlier time, D* on
/// the position at the later time. Bins are nearest grid nodes.
MeanDerivativeEstimate mean_derivative(const TrajectoryBundle& paths, Direction direction,
                                       int min_samples = 30);
/// Same for a static field f along the paths: D f ~ E[(f(q') - f(q)) / dt].
MeanDerivativeEstimate mean_derivative(const TrajectoryBundle& paths, const ScalarField& f,
                                       Direction direction, int min_samples = 30);

struct AccelerationOptions {
  /// dv/dt for time-dependent states.
  std::optional<VectorField> dv_dt;
  bool stationary = true;
  double time = 0.0;
  double node_floor = 1e-9;
};

struct AccelerationReport {
  /// dv/dt + v.grad v - u.grad u - nu lap u.
  VectorField acceleration;
  /// -grad V_total / m plus the Lorentz term.
  VectorField force;
  VectorField residual;
  double residual_l2 = 0.0;
  double residual_max = 0.0;
};

AccelerationReport mean_acceleration(const ScalarField& rho, const PhaseField& S,
                                     const Potentials& pot, const PhysicalConstants& k,
                                     const AccelerationOptions& options = {});

/// Gaussian kernel estimate with minimum-image distances on periodic axes,
/// normalised on the grid. Silverman's rule when no bandwidth is given.
ScalarField empirical_density(const EnsembleState& ens, const GridPtr& grid,
                              std::optional<double> bandwidth = std::nullopt);
double silverman_bandwidth(const EnsembleState& ens);

struct NodeAuditReport {
  double mask_floor = 0.0;
  /// Transitions into the node mask, counting particles that start inside.
  Index entries = 0;
  Index samples = 0;
  Index samples_in_mask = 0;
  /// Smallest interpolated rho met along any path, absolute and relative to max rho.
  double min_rho = 0.0;
  double min_rho_relative = 0.0;
};

/// Checks paths against the nodal regions of the matching density frames
/// (one frame for a static state, else one per path frame). A nodal region is
/// a connected piece of rho < mask_floor * max(rho) that does not reach a
/// bounded edge of the grid, so decaying tails are not counted as nodes. A
/// particle is inside when its nearest node is.
NodeAuditReport node_avoidance_audit(const TrajectoryBundle& paths,
                                     const std::vector<ScalarField>& rho_frames,
                                     double mask_floor = 1e-3);

nlohmann::json to_json(const WienerReport& report);
nlohmann::json to_json(const FokkerPlanckReport& report);
nlohmann::json to_json(const NodeAuditReport& report);

}  // namespace zsm
