#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "rtlab/grid.hpp"

namespace rtlab {

/// FFT-backed spectral operators on a TorusGrid.
///
/// Odd-order operators (first derivatives, translations) treat the Nyquist
/// wavenumber of each direction as 0, the usual convention that keeps real
/// data real; even-order operators use the full |xi| = n_x / 2 there.
/// Translation is therefore exactly unitary on every grid function.
///
/// Instances are immutable after construction and may be shared across
/// threads: FFTW plans are created once and executed with the new-array API.
class Spectral {
 public:
  using Coefficients = std::vector<std::complex<double>>;

  explicit Spectral(const TorusGrid& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const TorusGrid& grid() const { return grid_; }

  /// Unnormalized forward DFT of real grid values.
  Coefficients forward(std::span<const double> values) const;
  /// Inverse DFT including the 1/P normalization; writes the real part.
  void backward(Coefficients coeffs, std::span<double> out) const;

  /// Signed integer wavenumber of flat spectral index `i` in direction `d`.
  int wavenumber(std::size_t i, int d) const;
  bool is_nyquist(std::size_t i, int d) const;
  /// Wavenumber used by odd-order operators (0 at Nyquist).
  double odd_wavenumber(std::size_t i, int d) const;

  /// values(x) <- values(x - shift), exact for resolved modes.
  void translate(std::span<double> values, std::span<const double> shift) const;
  std::vector<double> derivative(std::span<const double> values, int d) const;
  /// sum_ab K_ab d_a d_b u.
  std::vector<double> second_derivative(std::span<const double> values, const Tensor2& k) const;
  /// ||u||^2_{H^s} with multiplier (1 + 4 pi^2 |xi|^2)^s, unit-torus normalization.
  double sobolev_norm_sq(std::span<const double> values, double s) const;

 private:
  struct Plans;
  TorusGrid grid_;
  std::vector<int> wavenumbers_;  // points x dim
  std::unique_ptr<Plans> plans_;
};

}  // namespace rtlab
