#include "ubsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ubsim/linalg.hpp"
#include "ubsim/rng.hpp"

namespace ubsim {

IntegrabilityReport check_integrability(const IntegrabilityInputs& inp) {
  if (!(inp.p >= 1.0)) throw std::invalid_argument("integrability check needs p >= 1");
  if (!(inp.alpha1 > 0.0 && inp.alpha1 <= 1.0) ||
      !(inp.alpha2 > 0.0 && inp.alpha2 <= 1.0))
    throw std::invalid_argument("alpha1, alpha2 must lie in (0, 1]");
  if (!(inp.kappa1 > 0.0 && inp.kappa2 > 0.0))
    throw std::invalid_argument("kappa1, kappa2 must be positive");
  if (!(inp.beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");

  IntegrabilityReport r;
  if (inp.const_vol) {
    r.margin1 = 2.0 * inp.kappa2 +
                inp.p * (1.0 + inp.alpha1 - 2.0 * inp.kappa1 - inp.beta);
    r.margin2 = inp.p * (inp.alpha2 - inp.beta - 1.0) + 2.0;
  } else {
    r.margin1 = inp.kappa2 + inp.p * (inp.alpha1 / 2.0 - inp.kappa1 - inp.beta);
    r.margin2 = inp.p * (inp.alpha2 - inp.beta - 1.0) + 1.0;
  }
  constexpr double band = 1e-12;
  r.boundary1 = std::fabs(r.margin1) <= band;
  r.boundary2 = std::fabs(r.margin2) <= band;
  r.p1_ok = r.margin1 > band;
  r.p2_ok = r.margin2 > band;
  return r;
}

double series_moment_bound(double C, double C_tilde, double eta, double theta,
                           double kappa, double T, double truncation_tol,
                           double* tail_estimate) {
  if (!(eta > 0.0)) throw std::invalid_argument("series bound needs eta > 0");
  if (!(theta < kappa))
    throw std::invalid_argument("series bound needs theta < kappa (terms diverge)");
  if (!(T > 0.0)) throw std::invalid_argument("series bound needs T > 0");
  if (!(truncation_tol > 0.0))
    throw std::invalid_argument("truncation_tol must be positive");

  const double cc = C * C_tilde;
  const double n0 = std::pow(T, eta - 1.0);  // Gamma(eta)/Gamma(eta) term
  if (cc == 0.0) {
    if (tail_estimate) *tail_estimate = 0.0;
    return n0;
  }
  if (cc < 0.0) throw std::invalid_argument("C and C_tilde must be nonnegative");

  const double step = kappa - theta;
  const double log_ratio_const = std::log(cc) + step * std::log(T) + std::lgamma(step);
  const double lg_eta = std::lgamma(eta);

  double sum = n0;
  double prev_term = n0;
  double tail = 0.0;
  for (int n = 1; n < 100000; ++n) {
    const double log_term = n * log_ratio_const + (eta - 1.0) * std::log(T) +
                            lg_eta - std::lgamma(eta + n * step);
    const double term = std::exp(log_term);
    sum += term;
    const bool decaying = term < prev_term;
    if (decaying && term < truncation_tol * sum) {
      const double ratio = term / prev_term;
      tail = ratio < 1.0 ? term * ratio / (1.0 - ratio) : term;
      break;
    }
    prev_term = term;
  }
  if (tail_estimate) *tail_estimate = tail;
  return sum;
}

namespace {

struct ProbeStats {
  double drift_max = 0.0;
  double vol_max = 0.0;
  double ellip_min = std::numeric_limits<double>::infinity();
};

// Smallest eigenvalue of the symmetric PSD matrix a, via inverse power
// iteration fallback: for the small dimensions here a few Jacobi-free
// iterations on (trace shift) are enough. d == 1 short-circuits.
double min_eigenvalue(std::span<const double> a, int d) {
  if (d == 1) return a[0];
  // Power iteration on (s I - a) with s = trace: largest eigenvalue of the
  // shifted matrix maps to the smallest of a.
  double shift = 0.0;
  for (int r = 0; r < d; ++r) shift += a[std::size_t(r) * d + r];
  std::vector<double> v(std::size_t(d), 1.0), w(std::size_t(d), 0.0);
  double lam = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (int r = 0; r < d; ++r) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += a[std::size_t(r) * d + c] * v[std::size_t(c)];
      w[std::size_t(r)] = shift * v[std::size_t(r)] - s;
    }
    double norm = 0.0;
    for (int r = 0; r < d; ++r) norm += w[std::size_t(r)] * w[std::size_t(r)];
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (int r = 0; r < d; ++r) v[std::size_t(r)] = w[std::size_t(r)] / norm;
    lam = norm;
  }
  return shift - lam;
}

// Max |mu|, max |sigma|, min eigenvalue over states in a box of half-width
// `radius` around the reference state.
ProbeStats probe_box(const SdeModel& model, PathRng& rng, int samples,
                     double radius) {
  const int d = model.dim;
  const std::size_t ds = std::size_t(d);
  std::vector<double> x(ds), xbar(ds), mu(ds), sig(ds * ds), a(ds * ds);
  ProbeStats st;
  for (int s = 0; s < samples; ++s) {
    const double t = model.maturity * rng.uniform_open01();
    for (std::size_t c = 0; c < ds; ++c) {
      x[c] = model.x0[c] + radius * (2.0 * rng.uniform_open01() - 1.0);
      xbar[c] = model.x0[c] * model.maturity * rng.uniform_open01() +
                radius * (2.0 * rng.uniform_open01() - 1.0);
    }
    model.drift(t, x, xbar, mu);
    model.vol(t, x, xbar, sig);
    double mu_norm = 0.0;
    for (std::size_t c = 0; c < ds; ++c) mu_norm += mu[c] * mu[c];
    st.drift_max = std::max(st.drift_max, std::sqrt(mu_norm));
    double sig_norm = 0.0;
    for (std::size_t c = 0; c < ds * ds; ++c) sig_norm += sig[c] * sig[c];
    st.vol_max = std::max(st.vol_max, std::sqrt(sig_norm));
    linalg::aat(sig, a, d);
    st.ellip_min = std::min(st.ellip_min, min_eigenvalue(a, d));
  }
  return st;
}

}  // namespace

RegularityReport regularity_report(const SdeModel& model,
                                   const AveragingWeight& weight,
                                   int sample_budget, std::uint64_t seed) {
  (void)weight;
  RegularityReport rep;
  if (sample_budget < 8) sample_budget = 8;
  PathRng rng(seed, 0);

  const double base_radius = std::fabs(model.x0[0]) + 1.0;
  const int per_box = sample_budget / 4;
  const ProbeStats s1 = probe_box(model, rng, per_box, base_radius);
  const ProbeStats s2 = probe_box(model, rng, per_box, 2.0 * base_radius);
  const ProbeStats s4 = probe_box(model, rng, per_box, 4.0 * base_radius);
  const ProbeStats s8 = probe_box(model, rng, per_box, 8.0 * base_radius);

  rep.drift_max_abs = s8.drift_max;
  rep.vol_max_abs = s8.vol_max;
  rep.ellipticity_min = std::min(std::min(s1.ellip_min, s2.ellip_min),
                                 std::min(s4.ellip_min, s8.ellip_min));

  // Coefficients of a bounded model plateau as the box grows; steady growth
  // across doublings flags unboundedness.
  const double eps = 1e-12;
  if (s8.drift_max > 1.5 * (s2.drift_max + eps) &&
      s2.drift_max > 1.2 * (s1.drift_max + eps))
    rep.warnings.push_back("drift unbounded on sampled range (|mu| grows with the state)");
  if (s8.vol_max > 1.5 * (s2.vol_max + eps) && s2.vol_max > 1.2 * (s1.vol_max + eps))
    rep.warnings.push_back("volatility unbounded on sampled range (|sigma| grows with the state)");
  if (!(rep.ellipticity_min > 0.0))
    rep.warnings.push_back("volatility degenerate on sampled states (min eigenvalue of sigma sigma^T <= 0)");
  else if (model.ellipticity_floor > 0.0 &&
           rep.ellipticity_min < model.ellipticity_floor * (1.0 - 1e-9))
    rep.warnings.push_back("sampled ellipticity falls below the declared floor");
  return rep;
}

}  // namespace ubsim
