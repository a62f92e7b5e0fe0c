#pragma once

#include <array>
#include <string>
#include <vector>

#include "rtlab/fields.hpp"
#include "rtlab/grid.hpp"

namespace rtlab {

/// One term `amplitude * shape(2 pi (k . x))` of a trigonometric profile.
struct FourierTerm {
  enum class Shape { Constant, Cos, Sin };
  double amplitude = 0.0;
  Shape shape = Shape::Constant;
  std::array<int, 2> frequency{0, 0};
};

using ProfileSpec = std::vector<FourierTerm>;

/// Grammar: terms separated by ';', each `amplitude shape [k1 [k2]]` with shape
/// in {const, cos, sin}, e.g. "1 const; 0.5 cos 1".
ProfileSpec parse_profile(const std::string& text);
std::string to_string(const ProfileSpec& spec);
DensityField evaluate_profile(const ProfileSpec& spec, const TorusGrid& grid);

/// Index of a real orthonormal Fourier mode. Per direction j > 0 selects
/// sqrt(2) cos(2 pi j x), j < 0 selects sqrt(2) sin(2 pi |j| x), j = 0 the
/// constant 1; 2-D modes are tensor products.
struct ModeIndex {
  std::array<int, 2> j{0, 0};
  bool operator==(const ModeIndex&) const = default;
};

ModeIndex parse_mode(const std::string& text);
std::string to_string(const ModeIndex& m);
DensityField mode_profile(const ModeIndex& mode, const TorusGrid& grid);
/// Euclidean length |j| of the mode's wave vector.
double mode_magnitude(const ModeIndex& mode);

}  // namespace rtlab
