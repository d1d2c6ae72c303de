#include "ubsim/model.hpp"

#include <cmath>
#include <stdexcept>

#include "ubsim/rng.hpp"

namespace ubsim {

namespace {

double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) * 0.39894228040143267794;
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

double asian_call(std::span<const double> xbar, double strike) {
  const double v = xbar[0] - strike;
  return v > 0.0 ? v : 0.0;
}

}  // namespace

double SdeModel::discount_factor() const {
  return std::exp(-discount_rate * maturity);
}

SdeModel bachelier_model(const BachelierParams& p) {
  if (!(p.maturity > 0.0)) throw std::invalid_argument("maturity must be positive");
  if (!(p.x0 > 0.0)) throw std::invalid_argument("x0 must be positive");
  if (!(p.sigma_rel > 0.0)) throw std::invalid_argument("sigma must be positive");
  const double sigma_abs = p.sigma_rel * p.x0;
  SdeModel m;
  m.dim = 1;
  m.name = "bachelier";
  m.x0 = {p.x0};
  m.maturity = p.maturity;
  m.discount_rate = p.r;
  m.constant_vol = true;
  m.ellipticity_floor = sigma_abs * sigma_abs;
  m.regularity = {std::max(std::fabs(p.r), 1.0), 1.0, 1.0};
  const double r = p.r;
  m.drift = [r](double, std::span<const double> x, std::span<const double>,
                std::span<double> out) { out[0] = r * x[0]; };
  m.vol = [sigma_abs](double, std::span<const double>, std::span<const double>,
                      std::span<double> out) { out[0] = sigma_abs; };
  const double strike = p.strike;
  m.payoff = [strike](std::span<const double>, std::span<const double> xbar) {
    return asian_call(xbar, strike);
  };
  return m;
}

double bachelier_reference_price(const BachelierParams& p) {
  if (p.r == 0.0)
    throw std::invalid_argument(
        "bachelier_reference_price requires r != 0; for r = 0 use the exact "
        "zero-rate Gaussian formula E[(x0 T + sigma*N(0,T^3/3) - K)+]");
  if (!(p.maturity > 0.0)) throw std::invalid_argument("maturity must be positive");
  const double r = p.r, T = p.maturity;
  const double sigma = p.sigma_rel * p.x0;
  const double growth = std::expm1(r * T);  // e^{rT} - 1
  const double mu_bar = growth * p.x0 / r;
  const double var = sigma * sigma / (r * r) *
                     (std::expm1(2.0 * r * T) / (2.0 * r) - 2.0 * growth / r + T);
  const double big_sigma = std::sqrt(var);
  const double d = (p.strike - mu_bar) / big_sigma;
  return std::exp(-r * T) *
         (big_sigma * norm_pdf(d) + (mu_bar - p.strike) * norm_cdf(-d));
}

SdeModel local_vol_model(LocalVolVariant variant, double r, double x0,
                         double sigma0, double strike, double maturity,
                         double vol_scale) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
  if (!(vol_scale > 0.0)) throw std::invalid_argument("vol_scale must be positive");
  if (!(maturity > 0.0)) throw std::invalid_argument("maturity must be positive");
  const double inv_c = variant == LocalVolVariant::sin4 ? 0.25 : 0.5;
  const double base = vol_scale * sigma0;
  SdeModel m;
  m.dim = 1;
  m.name = variant == LocalVolVariant::sin4 ? "localvol_sin4" : "localvol_sin2";
  m.x0 = {x0};
  m.maturity = maturity;
  m.discount_rate = r;
  m.constant_vol = false;
  const double floor_vol = base * (1.0 - inv_c);
  m.ellipticity_floor = floor_vol * floor_vol;
  m.regularity = {std::max({std::fabs(r), base * inv_c, 1.0}), 1.0, 1.0};
  m.drift = [r](double, std::span<const double> x, std::span<const double>,
                std::span<double> out) { out[0] = r * x[0]; };
  // The model is homogeneous of degree one in the state: it is the unit-scale
  // model sigma0 (1 + sin(x - xbar)/c) run at x0/vol_scale and scaled back up.
  // vol_scale = 1 therefore recovers the literal absolute-coordinate formula.
  const double inv_scale = 1.0 / vol_scale;
  m.vol = [base, inv_c, inv_scale](double, std::span<const double> x,
                                   std::span<const double> xbar,
                                   std::span<double> out) {
    out[0] = base * (1.0 + std::sin((x[0] - xbar[0]) * inv_scale) * inv_c);
  };
  m.payoff = [strike](std::span<const double>, std::span<const double> xbar) {
    return asian_call(xbar, strike);
  };
  return m;
}

SdeModel constant_model(std::vector<double> drift_const,
                        std::vector<double> vol_const_rowmajor, int dim,
                        double x0, double strike, double maturity,
                        double discount_rate) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (drift_const.size() != std::size_t(dim) ||
      vol_const_rowmajor.size() != std::size_t(dim) * std::size_t(dim))
    throw std::invalid_argument("constant model coefficient sizes must match dim");
  SdeModel m;
  m.dim = dim;
  m.name = "custom";
  m.x0.assign(std::size_t(dim), x0);
  m.maturity = maturity;
  m.discount_rate = discount_rate;
  m.constant_vol = true;
  m.drift = [mu = std::move(drift_const)](double, std::span<const double>,
                                          std::span<const double>,
                                          std::span<double> out) {
    for (std::size_t i = 0; i < mu.size(); ++i) out[i] = mu[i];
  };
  m.vol = [s = std::move(vol_const_rowmajor)](double, std::span<const double>,
                                              std::span<const double>,
                                              std::span<double> out) {
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i];
  };
  m.payoff = [strike](std::span<const double>, std::span<const double> xbar) {
    return asian_call(xbar, strike);
  };
  return m;
}

bool verify_constant_vol(const SdeModel& model, int samples, std::uint64_t seed) {
  const int d = model.dim;
  const std::size_t ds = std::size_t(d);
  std::vector<double> ref(ds * ds, 0.0), cur(ds * ds, 0.0);
  std::vector<double> x(ds, 0.0), xbar(ds, 0.0);
  model.vol(0.0, model.x0, xbar, ref);
  PathRng rng(seed, 0);
  const double scale = std::fabs(model.x0[0]) + 1.0;
  for (int s = 0; s < samples; ++s) {
    const double t = model.maturity * rng.uniform_open01();
    for (int i = 0; i < d; ++i) {
      x[std::size_t(i)] = model.x0[std::size_t(i)] + scale * (2.0 * rng.uniform_open01() - 1.0);
      xbar[std::size_t(i)] = scale * model.maturity * (2.0 * rng.uniform_open01() - 1.0);
    }
    model.vol(t, x, xbar, cur);
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (std::fabs(cur[i] - ref[i]) > 1e-12 * (1.0 + std::fabs(ref[i])))
        return false;
  }
  return true;
}

}  // namespace ubsim
