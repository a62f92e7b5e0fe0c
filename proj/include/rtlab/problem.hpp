#pragma once

#include <memory>
#include <optional>

#include "rtlab/grid.hpp"
#include "rtlab/noise.hpp"
#include "rtlab/opacity.hpp"
#include "rtlab/spectral.hpp"
#include "rtlab/velocity.hpp"

namespace rtlab {

/// Everything a simulation needs that does not change between samples.
/// `noise` empty means the noise term is switched off.
struct Problem {
  TorusGrid grid;
  VelocityQuadrature velocity;
  Opacity opacity;
  std::shared_ptr<const Spectral> spectral;
  std::optional<NoiseModel> noise;
  std::optional<NoiseStatistics> statistics;

  static Problem create(const TorusGrid& grid, VelocityQuadrature velocity, Opacity opacity,
                        std::optional<NoiseModel> noise = std::nullopt);

  /// Same data with the noise removed (shares the spectral plans).
  Problem without_noise() const;
};

}  // namespace rtlab
