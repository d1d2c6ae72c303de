#pragma once

#include "ubsim/common.hpp"

namespace ubsim {

// Step-length law for the random time grid. Two kinds:
//   power_law: density kappa/(2T)^kappa * s^(kappa-1) on [0, 2T]
//   gamma:     shape kappa, scale theta, support (0, inf)
// Both keep the density positive on (0, T] with F(T) < 1, so the estimator's
// survival denominator never vanishes. kappa1/kappa2 are the envelope
// exponents C1 s^(kappa1-1) <= rho(s) <= C2 s^(kappa2-1) consumed by the
// integrability checker; they equal kappa for both kinds.
class StepDistribution {
 public:
  enum class Kind { power_law, gamma };

  static StepDistribution power_law(double kappa, double horizon);
  static StepDistribution gamma(double kappa, double theta);

  // rho(s); zero outside the support. s <= 0 is rejected: the density is
  // unbounded at 0 for kappa < 1, and the estimator never needs it there.
  double density(double s) const;
  double cdf(double s) const;
  double survival(double s) const { return 1.0 - cdf(s); }

  // Inverse-CDF sample from a uniform draw strictly inside (0,1); closed form
  // for power_law, bisection to 1e-12 for gamma. Deterministic in the draw.
  double sample_step(double uniform_draw) const;

  double mean() const;

  Kind kind() const { return kind_; }
  double kappa() const { return kappa_; }
  double kappa1() const { return kappa_; }
  double kappa2() const { return kappa_; }
  // 2T for power_law, theta for gamma.
  double support_scale() const { return scale_; }

  // Regularized lower incomplete gamma P(a, x) (series + continued fraction).
  static double gamma_p(double a, double x);

 private:
  StepDistribution(Kind kind, double kappa, double scale)
      : kind_(kind), kappa_(kappa), scale_(scale) {}

  Kind kind_;
  double kappa_;
  double scale_;
};

}  // namespace ubsim
