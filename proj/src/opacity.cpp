#include "rtlab/opacity.hpp"

#include <cmath>
#include <fmt/format.h>

#include "rtlab/error.hpp"

namespace rtlab {

Opacity Opacity::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error("constant opacity must be positive and finite");
  }
  return Opacity(Kind::Constant, value, value, 1.0);
}

Opacity Opacity::rational(double sigma_star, double sigma_upper, double scale) {
  if (!(sigma_star > 0.0) || !(sigma_upper > sigma_star) || !std::isfinite(sigma_upper)) {
    throw Error("rational opacity needs 0 < sigma_star < sigma_upper");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error("opacity scale must be positive");
  return Opacity(Kind::Rational, sigma_star, sigma_upper, scale);
}

double Opacity::operator()(double u) const {
  if (kind_ == Kind::Constant) return sigma_star_;
  const double r = u / scale_;
  return sigma_star_ + (sigma_upper_ - sigma_star_) / (1.0 + r * r);
}

double Opacity::primitive(double rho) const {
  if (kind_ == Kind::Constant) return rho / sigma_star_;
  // 1/sigma = (1/s) [1 - A c^2 / (s (u^2 + beta^2))], beta^2 = c^2 (s + A) / s.
  const double s = sigma_star_;
  const double a = sigma_upper_ - sigma_star_;
  const double c = scale_;
  const double beta = c * std::sqrt((s + a) / s);
  return rho / s - a * c * c / (s * s * beta) * std::atan(rho / beta);
}

double Opacity::lipschitz() const {
  if (kind_ == Kind::Constant) return 0.0;
  return 3.0 * std::sqrt(3.0) / 8.0 * (sigma_upper_ - sigma_star_) / scale_;
}

std::string Opacity::describe() const {
  if (kind_ == Kind::Constant) return fmt::format("constant({:.17g})", sigma_star_);
  return fmt::format("rational({:.17g},{:.17g},{:.17g})", sigma_star_, sigma_upper_, scale_);
}

}  // namespace rtlab
