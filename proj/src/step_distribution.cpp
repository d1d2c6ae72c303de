#include "ubsim/step_distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace ubsim {

StepDistribution StepDistribution::power_law(double kappa, double horizon) {
  if (!(kappa > 0.0)) throw std::invalid_argument("power_law kappa must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("power_law horizon must be positive");
  return StepDistribution(Kind::power_law, kappa, 2.0 * horizon);
}

StepDistribution StepDistribution::gamma(double kappa, double theta) {
  if (!(kappa > 0.0) || !(theta > 0.0))
    throw std::invalid_argument("gamma kappa and theta must be positive");
  return StepDistribution(Kind::gamma, kappa, theta);
}

double StepDistribution::density(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("step density requires s > 0");
  if (kind_ == Kind::power_law) {
    if (s > scale_) return 0.0;
    return kappa_ / std::pow(scale_, kappa_) * std::pow(s, kappa_ - 1.0);
  }
  return std::pow(s, kappa_ - 1.0) * std::exp(-s / scale_) /
         (std::tgamma(kappa_) * std::pow(scale_, kappa_));
}

double StepDistribution::cdf(double s) const {
  if (!(s >= 0.0)) throw std::invalid_argument("step cdf requires s >= 0");
  if (s == 0.0) return 0.0;
  if (kind_ == Kind::power_law)
    return s >= scale_ ? 1.0 : std::pow(s / scale_, kappa_);
  return gamma_p(kappa_, s / scale_);
}

double StepDistribution::sample_step(double u) const {
  if (!(u > 0.0) || !(u < 1.0))
    throw std::invalid_argument("sample_step draw must lie strictly in (0,1)");
  if (kind_ == Kind::power_law)
    return scale_ * std::pow(u, 1.0 / kappa_);
  // Bisection on the cdf. Bracket by doubling from the mean scale.
  double lo = 0.0;
  double hi = scale_ * (kappa_ > 1.0 ? kappa_ : 1.0);
  while (cdf(hi) < u) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double StepDistribution::mean() const {
  if (kind_ == Kind::power_law) return scale_ * kappa_ / (kappa_ + 1.0);
  return kappa_ * scale_;
}

// P(a,x): series expansion for x < a+1, Lentz continued fraction otherwise.
double StepDistribution::gamma_p(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::invalid_argument("gamma_p domain");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Q(a,x) via continued fraction, then P = 1 - Q.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

}  // namespace ubsim
