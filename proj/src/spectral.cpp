#include "rtlab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "rtlab/error.hpp"

namespace rtlab {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

struct Spectral::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

Spectral::Spectral(const TorusGrid& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
  const std::size_t p = grid.points();
  const int n = static_cast<int>(grid.n_x());
  wavenumbers_.resize(p * static_cast<std::size_t>(grid.dim()));
  for (std::size_t i = 0; i < p; ++i) {
    const auto c = grid.coords(i);
    for (int d = 0; d < grid.dim(); ++d) {
      const int m = static_cast<int>(c[static_cast<std::size_t>(d)]);
      wavenumbers_[i * static_cast<std::size_t>(grid.dim()) + static_cast<std::size_t>(d)] =
          m <= n / 2 ? m : m - n;
    }
  }

  Coefficients scratch_in(p), scratch_out(p);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  if (grid.dim() == 1) {
    plans_->forward = fftw_plan_dft_1d(n, as_fftw(scratch_in.data()), as_fftw(scratch_out.data()),
                                       FFTW_FORWARD, flags);
    plans_->backward = fftw_plan_dft_1d(n, as_fftw(scratch_in.data()), as_fftw(scratch_out.data()),
                                        FFTW_BACKWARD, flags);
  } else {
    plans_->forward = fftw_plan_dft_2d(n, n, as_fftw(scratch_in.data()),
                                       as_fftw(scratch_out.data()), FFTW_FORWARD, flags);
    plans_->backward = fftw_plan_dft_2d(n, n, as_fftw(scratch_in.data()),
                                        as_fftw(scratch_out.data()), FFTW_BACKWARD, flags);
  }
  if (plans_->forward == nullptr || plans_->backward == nullptr) {
    throw Error("FFTW plan creation failed");
  }
}

Spectral::~Spectral() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->forward);
  fftw_destroy_plan(plans_->backward);
}

Spectral::Coefficients Spectral::forward(std::span<const double> values) const {
  const std::size_t p = grid_.points();
  Coefficients in(p), out(p);
  for (std::size_t i = 0; i < p; ++i) in[i] = values[i];
  fftw_execute_dft(plans_->forward, as_fftw(in.data()), as_fftw(out.data()));
  return out;
}

void Spectral::backward(Coefficients coeffs, std::span<double> out) const {
  const std::size_t p = grid_.points();
  Coefficients result(p);
  fftw_execute_dft(plans_->backward, as_fftw(coeffs.data()), as_fftw(result.data()));
  const double norm = 1.0 / static_cast<double>(p);
  for (std::size_t i = 0; i < p; ++i) out[i] = result[i].real() * norm;
}

int Spectral::wavenumber(std::size_t i, int d) const {
  return wavenumbers_[i * static_cast<std::size_t>(grid_.dim()) + static_cast<std::size_t>(d)];
}

bool Spectral::is_nyquist(std::size_t i, int d) const {
  return 2 * wavenumber(i, d) == static_cast<int>(grid_.n_x());
}

double Spectral::odd_wavenumber(std::size_t i, int d) const {
  return is_nyquist(i, d) ? 0.0 : static_cast<double>(wavenumber(i, d));
}

void Spectral::translate(std::span<double> values, std::span<const double> shift) const {
  auto c = forward(values);
  for (std::size_t i = 0; i < c.size(); ++i) {
    double phase = 0.0;
    for (int d = 0; d < grid_.dim(); ++d) {
      phase += odd_wavenumber(i, d) * shift[static_cast<std::size_t>(d)];
    }
    c[i] *= std::polar(1.0, -2.0 * std::numbers::pi * phase);
  }
  backward(std::move(c), values);
}

std::vector<double> Spectral::derivative(std::span<const double> values, int d) const {
  auto c = forward(values);
  const std::complex<double> i2pi(0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= i2pi * odd_wavenumber(i, d);
  std::vector<double> out(values.size());
  backward(std::move(c), out);
  return out;
}

std::vector<double> Spectral::second_derivative(std::span<const double> values,
                                                const Tensor2& k) const {
  auto c = forward(values);
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  const int dim = grid_.dim();
  for (std::size_t i = 0; i < c.size(); ++i) {
    double symbol = 0.0;
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        const double xa = a == b ? wavenumber(i, a) : odd_wavenumber(i, a);
        const double xb = a == b ? wavenumber(i, b) : odd_wavenumber(i, b);
        symbol += k[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * xa * xb;
      }
    }
    c[i] *= -four_pi2 * symbol;
  }
  std::vector<double> out(values.size());
  backward(std::move(c), out);
  return out;
}

double Spectral::sobolev_norm_sq(std::span<const double> values, double s) const {
  const auto c = forward(values);
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  const double p = static_cast<double>(grid_.points());
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double xi2 = 0.0;
    for (int d = 0; d < grid_.dim(); ++d) {
      const double x = wavenumber(i, d);
      xi2 += x * x;
    }
    total += std::pow(1.0 + four_pi2 * xi2, s) * std::norm(c[i]);
  }
  return total / (p * p);
}

}  // namespace rtlab
