#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ubsim/model.hpp"

using ubsim::BachelierParams;
using ubsim::SdeModel;

namespace {

double eval_vol1(const SdeModel& m, double t, double x, double xbar) {
  const double xv[1] = {x}, bv[1] = {xbar};
  double out[1];
  m.vol(t, std::span<const double>(xv, 1), std::span<const double>(bv, 1),
        std::span<double>(out, 1));
  return out[0];
}

double eval_drift1(const SdeModel& m, double t, double x, double xbar) {
  const double xv[1] = {x}, bv[1] = {xbar};
  double out[1];
  m.drift(t, std::span<const double>(xv, 1), std::span<const double>(bv, 1),
          std::span<double>(out, 1));
  return out[0];
}

}  // namespace

TEST_CASE("bachelier model coefficients") {
  const SdeModel m = ubsim::bachelier_model({0.05, 100.0, 0.05, 100.0, 1.0});
  CHECK(m.dim == 1);
  CHECK(m.constant_vol);
  for (double x : {-50.0, 0.0, 100.0, 300.0})
    CHECK(eval_vol1(m, 0.3, x, 2.0 * x) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(eval_drift1(m, 0.0, 100.0, 0.0) == doctest::Approx(5.0).epsilon(1e-15));
  const double xv[1] = {12.0}, bv[1] = {100.0};
  CHECK(m.payoff(std::span<const double>(xv, 1), std::span<const double>(bv, 1)) == 0.0);
  const double bv2[1] = {103.5};
  CHECK(m.payoff(std::span<const double>(xv, 1), std::span<const double>(bv2, 1)) ==
        doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("bachelier reference price reproduces the tabulated values") {
  const double sigmas[] = {0.05, 0.1, 0.15, 0.2};
  const double refs[] = {2.7182, 3.6470, 4.6960, 5.7781};
  for (int i = 0; i < 4; ++i) {
    const double v = ubsim::bachelier_reference_price(
        {0.05, 100.0, sigmas[i], 100.0, 1.0});
    CHECK(std::fabs(v - refs[i]) <= 5e-4);
  }
}

TEST_CASE("bachelier reference price is monotone in sigma") {
  double prev = 0.0;
  for (double s = 0.01; s <= 0.41; s += 0.02) {
    const double v = ubsim::bachelier_reference_price({0.05, 100.0, s, 100.0, 1.0});
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("bachelier deep in-the-money asymptote") {
  // At K far below the mean the call collapses to the discounted forward
  // e^{-rT} (mu_bar - K); probe at K = mu_bar - 50 Sigma.
  const double r = 0.05, x0 = 100.0, sig_rel = 0.1, T = 1.0;
  const double sigma = sig_rel * x0;
  const double mu_bar = std::expm1(r * T) * x0 / r;
  const double var = sigma * sigma / (r * r) *
                     (std::expm1(2 * r * T) / (2 * r) - 2 * std::expm1(r * T) / r + T);
  const double strike = mu_bar - 50.0 * std::sqrt(var);
  const double v = ubsim::bachelier_reference_price({r, x0, sig_rel, strike, T});
  CHECK(v == doctest::Approx(std::exp(-r * T) * (mu_bar - strike)).epsilon(1e-9));
}

TEST_CASE("bachelier reference price rejects r = 0") {
  CHECK_THROWS_AS((void)ubsim::bachelier_reference_price({0.0, 100.0, 0.1, 100.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("local volatility coefficient shapes") {
  const double scale = 100.0, sigma0 = 0.2;
  const SdeModel sin4 = ubsim::local_vol_model(ubsim::LocalVolVariant::sin4, 0.05,
                                               100.0, sigma0, 100.0, 1.0, scale);
  const SdeModel sin2 = ubsim::local_vol_model(ubsim::LocalVolVariant::sin2, 0.05,
                                               100.0, sigma0, 100.0, 1.0, scale);
  const double base = scale * sigma0;
  CHECK(eval_vol1(sin4, 0.0, 7.0, 7.0) == doctest::Approx(base).epsilon(1e-15));
  // displacement of pi/2 in the model's normalized units
  CHECK(eval_vol1(sin2, 0.0, 1.0 + scale * M_PI / 2.0, 1.0) ==
        doctest::Approx(1.5 * base).epsilon(1e-12));
  // vol_scale = 1 recovers the literal absolute-coordinate formula
  const ubsim::SdeModel lit = ubsim::local_vol_model(ubsim::LocalVolVariant::sin2,
                                                     0.05, 100.0, 0.2, 100.0, 1.0, 1.0);
  CHECK(eval_vol1(lit, 0.0, 1.0 + M_PI / 2.0, 1.0) ==
        doctest::Approx(1.5 * 0.2).epsilon(1e-12));
  CHECK_FALSE(sin4.constant_vol);

  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  double lo4 = 1e300, hi4 = -1e300, min_sq2 = 1e300;
  for (int i = 0; i < 100000; ++i) {
    const double x = u(gen), xb = u(gen);
    const double v4 = eval_vol1(sin4, 0.0, x, xb);
    const double v2 = eval_vol1(sin2, 0.0, x, xb);
    lo4 = std::min(lo4, v4);
    hi4 = std::max(hi4, v4);
    min_sq2 = std::min(min_sq2, v2 * v2);
  }
  CHECK(lo4 >= 0.75 * base);
  CHECK(hi4 <= 1.25 * base);
  // sampled ellipticity never falls below the (sigma0 scale / 2)^2 floor
  CHECK(min_sq2 >= base * base / 4.0);
}

TEST_CASE("constant model and constant-vol verification") {
  const SdeModel c = ubsim::constant_model({0.3}, {1.2}, 1, 0.5, 0.9, 1.0, 0.0);
  CHECK(ubsim::verify_constant_vol(c));
  CHECK(ubsim::verify_constant_vol(ubsim::bachelier_model({0.05, 100, 0.05, 100, 1})));
  const SdeModel lv = ubsim::local_vol_model(ubsim::LocalVolVariant::sin4, 0.05,
                                             100.0, 0.2, 100.0, 1.0, 100.0);
  CHECK_FALSE(ubsim::verify_constant_vol(lv));
  CHECK_THROWS_AS(ubsim::constant_model({0.1, 0.2}, {1.0}, 1, 0.0, 0.0, 1.0, 0.0),
                  std::invalid_argument);
}
