#include "ubsim/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ubsim {

AveragingWeight AveragingWeight::linear(double beta) {
  AveragingWeight w;
  w.kind_ = Kind::linear;
  w.beta_ = beta;
  w.horizon_ = std::numeric_limits<double>::infinity();
  return w;
}

AveragingWeight AveragingWeight::tabulated(std::vector<double> times,
                                           std::vector<double> values,
                                           double beta, int quadrature_points) {
  if (times.size() != values.size() || times.size() < 2)
    throw std::invalid_argument("tabulated weight needs >= 2 matching nodes");
  if (times.front() != 0.0)
    throw std::invalid_argument("tabulated weight must start at t = 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("tabulated weight times must be strictly increasing");
  AveragingWeight w;
  w.kind_ = Kind::tabulated;
  w.beta_ = beta;
  w.horizon_ = times.back();
  w.quadrature_points_ = quadrature_points;
  w.fn_ = [t = std::move(times), v = std::move(values)](double x) {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    if (it == t.begin()) return v.front();
    if (it == t.end()) return v.back();
    const std::size_t hi = std::size_t(it - t.begin());
    const std::size_t lo = hi - 1;
    const double f = (x - t[lo]) / (t[hi] - t[lo]);
    return v[lo] + f * (v[hi] - v[lo]);
  };
  return w;
}

AveragingWeight AveragingWeight::from_callable(std::function<double(double)> fn,
                                               double horizon, double beta,
                                               int quadrature_points) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  AveragingWeight w;
  w.kind_ = Kind::callable;
  w.beta_ = beta;
  w.horizon_ = horizon;
  w.quadrature_points_ = quadrature_points;
  w.fn_ = std::move(fn);
  return w;
}

double AveragingWeight::value(double t) const {
  return kind_ == Kind::linear ? t : fn_(t);
}

namespace {

// Composite Simpson with n nodes (forced odd) of fn over [s,t].
template <class F>
double simpson(F&& fn, double s, double t, int n) {
  if (n < 3) n = 3;
  if (n % 2 == 0) ++n;
  const double h = (t - s) / (n - 1);
  double acc = fn(s) + fn(t);
  for (int i = 1; i < n - 1; ++i)
    acc += fn(s + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

AveragingMoments AveragingWeight::moments_unchecked(double s, double t) const {
  if (!(s >= 0.0) || !(t > s))
    throw std::invalid_argument("averaging moments need 0 <= s < t");
  if (t > horizon_)
    throw std::invalid_argument("averaging moments: t beyond weight horizon");
  AveragingMoments m;
  m.dt = t - s;
  if (kind_ == Kind::linear) {
    m.delta_a = m.dt;
    m.m1 = m.dt / 2.0;
    m.m2_tilde = m.dt * m.dt / 3.0;
    m.m2 = m.dt * m.dt / 12.0;
    return m;
  }
  const double a_s = fn_(s);
  m.delta_a = fn_(t) - a_s;
  const int n = quadrature_points_;
  m.m1 = simpson([&](double r) { return fn_(r) - a_s; }, s, t, n) / m.dt;
  m.m2_tilde = simpson([&](double r) { const double d = fn_(r) - a_s; return d * d; },
                       s, t, n) / m.dt;
  // Direct quadrature of the centered square keeps the variance decomposition
  // m2 == m2_tilde - m1^2 an actual cross-check rather than a definition.
  const double a_bar = a_s + m.m1;
  m.m2 = simpson([&](double r) { const double d = fn_(r) - a_bar; return d * d; },
                 s, t, n) / m.dt;
  return m;
}

AveragingMoments AveragingWeight::moments(double s, double t) const {
  AveragingMoments m = moments_unchecked(s, t);
  if (m.m2 < m2_floor_rel * m.dt * m.dt)
    throw NumericalError("averaging weight is locally constant on [" +
                         std::to_string(s) + ", " + std::to_string(t) +
                         "]: m2 below floor");
  return m;
}

RatioBoundReport ratio_bound_check(
    const AveragingWeight& weight,
    std::span<const std::pair<double, double>> intervals) {
  if (intervals.empty())
    throw std::invalid_argument("ratio_bound_check needs at least one interval");
  RatioBoundReport report;
  report.empirical_c3 = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto [s, t] = intervals[i];
    const AveragingMoments m = weight.moments_unchecked(s, t);
    if (m.m2 < weight.m2_floor_rel * m.dt * m.dt) {
      report.degenerate.push_back(i);
      continue;
    }
    const double c3 = m.m2_tilde / m.m2 * std::pow(m.dt, weight.beta());
    if (!(c3 <= report.empirical_c3)) {  // also catches the initial NaN
      report.empirical_c3 = c3;
      report.worst_interval = i;
    }
  }
  return report;
}

}  // namespace ubsim
