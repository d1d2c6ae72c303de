#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ubsim {

// Streaming mean/variance accumulator (Welford) with exact pairwise merging,
// plus the per-run extras: min/max of the sample values and the mean number
// of random grid points per path.
struct RunStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations from the running mean
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double mean_n_t = 0.0;

  void push(double value, double n_t) {
    ++count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
    if (value < min) min = value;
    if (value > max) max = value;
    mean_n_t += (n_t - mean_n_t) / static_cast<double>(count);
  }

  // Pooled count/mean/m2 (Chan et al. pairwise formula). merge(x, empty) == x
  // bit for bit.
  static RunStats merged(const RunStats& a, const RunStats& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    RunStats out;
    out.count = a.count + b.count;
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    const double n = na + nb;
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * (nb / n);
    out.m2 = a.m2 + b.m2 + delta * delta * (na * nb / n);
    out.min = a.min < b.min ? a.min : b.min;
    out.max = a.max > b.max ? a.max : b.max;
    out.mean_n_t = a.mean_n_t + (b.mean_n_t - a.mean_n_t) * (nb / n);
    return out;
  }

  double variance() const {
    return count >= 2 ? m2 / static_cast<double>(count - 1)
                      : std::numeric_limits<double>::quiet_NaN();
  }

  // Standard error of the mean; NaN for fewer than two samples.
  double std_error() const {
    return count >= 2
               ? std::sqrt(m2 / (static_cast<double>(count) *
                                 static_cast<double>(count - 1)))
               : std::numeric_limits<double>::quiet_NaN();
  }
};

}  // namespace ubsim
