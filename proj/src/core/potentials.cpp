#include "zsm/core/potentials.hpp"

#include "zsm/core/operators.hpp"

namespace zsm {

namespace {

ScalarField zeros(const GridPtr& grid) { return {grid, Eigen::ArrayXd::Zero(grid->size())}; }

void check_frame(const PotentialFrame& f, const Grid& g) {
  if (!(f.scalar.grid() == g) || !(f.gravitational.grid() == g) || !(f.electric.grid() == g))
    throw InvalidArgument("Potentials: components live on different grids");
  if (f.vector_potential) {
    if (!(f.vector_potential->grid() == g))
      throw InvalidArgument("Potentials: vector potential lives on a different grid");
    if (f.vector_potential->components() != g.dim())
      throw InvalidArgument("Potentials: vector potential has the wrong component count");
  }
}

}  // namespace

Potentials::Potentials(const GridPtr& grid)
    : frames_{PotentialFrame{0.0, zeros(grid), zeros(grid), zeros(grid), std::nullopt}} {}

Potentials::Potentials(ScalarField scalar)
    : frames_{PotentialFrame{0.0, scalar, zeros(scalar.grid_ptr()), zeros(scalar.grid_ptr()),
                             std::nullopt}} {}

Potentials::Potentials(std::vector<PotentialFrame> frames) : frames_(std::move(frames)) {
  if (frames_.empty()) throw InvalidArgument("Potentials: at least one frame is required");
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    check_frame(frames_[i], frames_.front().scalar.grid());
    if (i > 0 && !(frames_[i].start_time > frames_[i - 1].start_time))
      throw InvalidArgument("Potentials: frame start times must increase");
  }
}

bool Potentials::has_vector_potential() const {
  for (const auto& f : frames_)
    if (f.vector_potential) return true;
  return false;
}

const PotentialFrame& Potentials::at(double t) const {
  std::size_t k = 0;
  while (k + 1 < frames_.size() && frames_[k + 1].start_time <= t) ++k;
  return frames_[k];
}

ScalarField Potentials::total_scalar(double t) const {
  const PotentialFrame& f = at(t);
  return add(add(f.scalar, f.gravitational), f.electric);
}

std::optional<ScalarField> Potentials::magnetic_field(double t) const {
  const PotentialFrame& f = at(t);
  if (!f.vector_potential) return std::nullopt;
  return curl(*f.vector_potential);
}

Potentials Potentials::with_gravitational(const ScalarField& energy) const {
  auto frames = frames_;
  for (auto& f : frames) f.gravitational = energy;
  return Potentials(std::move(frames));
}

Potentials Potentials::with_electric(const ScalarField& energy) const {
  auto frames = frames_;
  for (auto& f : frames) f.electric = energy;
  return Potentials(std::move(frames));
}

Potentials Potentials::with_vector_potential(const VectorField& a) const {
  auto frames = frames_;
  for (auto& f : frames) f.vector_potential = a;
  return Potentials(std::move(frames));
}

}  // namespace zsm
