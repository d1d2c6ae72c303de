#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ubsim/common.hpp"

namespace ubsim {

// Interval statistics of the averaging function A over [s,t], dt = t-s:
//   delta_a  = A_t - A_s
//   m1       = (1/dt) * integral of (A_r - A_s) dr
//   m2_tilde = (1/dt) * integral of (A_r - A_s)^2 dr
//   m2       = (1/dt) * integral of (A_r - Abar)^2 dr,  Abar the interval mean
// They drive both the joint (dW, J) covariance and the Malliavin weights.
// m2 == m2_tilde - m1^2 up to quadrature error.
struct AveragingMoments {
  double delta_a = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double m2_tilde = 0.0;
  double dt = 0.0;
};

// The deterministic continuous finite-variation weight A of the averaging
// functional I_t = integral of X dA. The linear kind (A_t = t, the running
// time average behind Asian payoffs) has exact closed-form moments; tabulated
// or callable weights fall back to composite Simpson quadrature.
class AveragingWeight {
 public:
  enum class Kind { linear, tabulated, callable };

  // A_t = t on an unbounded horizon.
  static AveragingWeight linear(double beta = 0.0);

  // Piecewise-linear interpolation of (times, values); horizon = times.back().
  static AveragingWeight tabulated(std::vector<double> times,
                                   std::vector<double> values,
                                   double beta = 0.0,
                                   int quadrature_points = 257);

  static AveragingWeight from_callable(std::function<double(double)> fn,
                                       double horizon, double beta = 0.0,
                                       int quadrature_points = 257);

  double value(double t) const;

  // Interval moments; closed form for the linear kind, quadrature otherwise.
  // Throws std::invalid_argument on a degenerate interval (s >= t, or outside
  // [0, horizon]) and NumericalError when m2 falls below the floor -- the
  // Malliavin weight divides by m2, so a locally constant A is fatal there.
  AveragingMoments moments(double s, double t) const;

  // Same computation without the m2-floor check (diagnostics use).
  AveragingMoments moments_unchecked(double s, double t) const;

  Kind kind() const { return kind_; }
  double beta() const { return beta_; }
  double horizon() const { return horizon_; }
  int quadrature_points() const { return quadrature_points_; }

  // Relative floor: intervals with m2 < m2_floor_rel * dt^2 are degenerate.
  double m2_floor_rel = 1e-14;

 private:
  AveragingWeight() = default;

  Kind kind_ = Kind::linear;
  double beta_ = 0.0;
  double horizon_ = 0.0;
  int quadrature_points_ = 257;
  std::function<double(double)> fn_;
};

struct RatioBoundReport {
  // max over intervals of (m2_tilde/m2) * dt^beta, i.e. an empirical C3 for
  // the ratio bound; NaN when every interval is degenerate.
  double empirical_c3 = 0.0;
  std::size_t worst_interval = 0;
  // Indices of intervals where m2 is below the floor (A locally constant).
  std::vector<std::size_t> degenerate;
};

// Probes the ratio condition m2_tilde/m2 <= C3 * dt^(-beta) on the supplied
// intervals. Per-interval validity errors (s >= t) still throw.
RatioBoundReport ratio_bound_check(
    const AveragingWeight& weight,
    std::span<const std::pair<double, double>> intervals);

}  // namespace ubsim
