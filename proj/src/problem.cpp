#include "rtlab/problem.hpp"

#include "rtlab/error.hpp"

namespace rtlab {

Problem Problem::create(const TorusGrid& grid, VelocityQuadrature velocity, Opacity opacity,
                        std::optional<NoiseModel> noise) {
  if (velocity.dim() != grid.dim()) {
    throw Error("velocity model dimension does not match the grid dimension");
  }
  std::optional<NoiseStatistics> stats;
  if (noise) {
    if (noise->state(0).size() != grid.points()) throw Error("noise profiles do not match the grid");
    stats = NoiseStatistics::compute(*noise, grid);
  }
  return Problem{grid, std::move(velocity), std::move(opacity),
                 std::make_shared<const Spectral>(grid), std::move(noise), std::move(stats)};
}

Problem Problem::without_noise() const {
  return Problem{grid, velocity, opacity, spectral, std::nullopt, std::nullopt};
}

}  // namespace rtlab
