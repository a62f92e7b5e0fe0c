#pragma once

#include <string>

namespace rtlab {

/// Opacity sigma(u) satisfying sigma_star <= sigma <= sigma_upper and a global
/// Lipschitz bound. Two closed-form families:
///   constant:  sigma(u) = sigma_star
///   rational:  sigma(u) = sigma_star + (sigma_upper - sigma_star) / (1 + (u / scale)^2)
/// Both have an analytic primitive G(rho) = int_0^rho dy / sigma(y).
class Opacity {
 public:
  enum class Kind { Constant, Rational };

  static Opacity constant(double value);
  static Opacity rational(double sigma_star, double sigma_upper, double scale = 1.0);

  double operator()(double u) const;
  double primitive(double rho) const;

  Kind kind() const { return kind_; }
  double sigma_star() const { return sigma_star_; }
  double sigma_upper() const { return sigma_upper_; }
  double scale() const { return scale_; }
  double lipschitz() const;

  std::string describe() const;

 private:
  Opacity(Kind kind, double lo, double hi, double scale)
      : kind_(kind), sigma_star_(lo), sigma_upper_(hi), scale_(scale) {}
  Kind kind_;
  double sigma_star_;
  double sigma_upper_;
  double scale_;
};

}  // namespace rtlab
