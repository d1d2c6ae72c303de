#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ubsim/diagnostics.hpp"
#include "ubsim/path_engine.hpp"

using ubsim::IntegrabilityInputs;
using ubsim::IntegrabilityReport;

TEST_CASE("integrability margins for the worked parameter sets") {
  // alpha1 = alpha2 = 1, beta = 0, kappa = 0.35, p = 2 (general regime)
  IntegrabilityInputs inp;
  inp.alpha1 = inp.alpha2 = 1.0;
  inp.beta = 0.0;
  inp.kappa1 = inp.kappa2 = 0.35;
  inp.p = 2.0;
  IntegrabilityReport r = ubsim::check_integrability(inp);
  CHECK(r.margin1 == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(r.margin2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.p1_ok);
  CHECK(r.p2_ok);

  // kappa = 1 puts the first condition exactly on its (strict) boundary
  inp.kappa1 = inp.kappa2 = 1.0;
  r = ubsim::check_integrability(inp);
  CHECK(r.margin1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.boundary1);
  CHECK_FALSE(r.p1_ok);

  // p = 1 cancels kappa entirely: margin1 = alpha1/2
  inp.p = 1.0;
  inp.kappa1 = inp.kappa2 = 0.35;
  r = ubsim::check_integrability(inp);
  CHECK(r.margin1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.p1_ok);
  inp.kappa1 = inp.kappa2 = 2.75;
  r = ubsim::check_integrability(inp);
  CHECK(r.margin1 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("integrability margins, constant-volatility regime") {
  IntegrabilityInputs inp;
  inp.alpha1 = inp.alpha2 = 1.0;
  inp.beta = 0.0;
  inp.kappa1 = inp.kappa2 = 0.35;
  inp.p = 2.0;
  inp.const_vol = true;
  const IntegrabilityReport r = ubsim::check_integrability(inp);
  // 2*0.35 + 2*(1 + 1 - 0.7 - 0) = 3.3 and 2*(1-0-1) + 2 = 2
  CHECK(r.margin1 == doctest::Approx(3.3).epsilon(1e-12));
  CHECK(r.margin2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.p1_ok);
  CHECK(r.p2_ok);
}

TEST_CASE("margins shrink as p grows when its coefficient is negative") {
  IntegrabilityInputs inp;
  inp.alpha1 = 0.8;
  inp.alpha2 = 0.9;
  inp.beta = 0.1;
  inp.kappa1 = inp.kappa2 = 0.6;
  double prev1 = 1e300, prev2 = 1e300;
  for (double p = 1.0; p <= 4.0; p += 0.5) {
    inp.p = p;
    const IntegrabilityReport r = ubsim::check_integrability(inp);
    CHECK(r.margin1 < prev1);
    CHECK(r.margin2 < prev2);
    prev1 = r.margin1;
    prev2 = r.margin2;
  }
}

TEST_CASE("integrability input validation") {
  IntegrabilityInputs inp;
  inp.p = 0.5;
  CHECK_THROWS_AS((void)ubsim::check_integrability(inp), std::invalid_argument);
  inp.p = 1.0;
  inp.alpha1 = 1.5;
  CHECK_THROWS_AS((void)ubsim::check_integrability(inp), std::invalid_argument);
}

TEST_CASE("series bound: degenerate and frozen reference values") {
  // C*Ct = 0 leaves only the n = 0 term, T^(eta-1)
  CHECK(ubsim::series_moment_bound(0.0, 1.0, 0.7, 0.0, 0.35, 2.0, 1e-12) ==
        doctest::Approx(std::pow(2.0, -0.3)).epsilon(1e-12));
  // frozen high-precision evaluation of sum_n Gamma(0.35)^n / Gamma(1+0.35n)
  const double v = ubsim::series_moment_bound(1.0, 1.0, 1.0, 0.0, 0.35, 1.0, 1e-14);
  CHECK(v == doctest::Approx(5352866.866949616).epsilon(1e-9));
  CHECK_THROWS_AS(
      (void)ubsim::series_moment_bound(1.0, 1.0, 1.0, 0.4, 0.35, 1.0, 1e-12),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)ubsim::series_moment_bound(1.0, 1.0, -1.0, 0.0, 0.35, 1.0, 1e-12),
      std::invalid_argument);
}

TEST_CASE("series bound decreases in eta for T <= 1") {
  for (double T : {1.0, 0.8}) {
    double prev = 1e300;
    for (double eta = 0.5; eta <= 2.51; eta += 0.25) {
      const double v = ubsim::series_moment_bound(1.0, 0.5, eta, 0.1, 0.35, T, 1e-12);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("series truncation: tighter tolerance moves the value less than the tail") {
  double tail_loose = 0.0;
  const double loose = ubsim::series_moment_bound(1.0, 1.0, 1.0, 0.0, 0.35, 1.0,
                                                  1e-8, &tail_loose);
  const double tight = ubsim::series_moment_bound(1.0, 1.0, 1.0, 0.0, 0.35, 1.0, 1e-14);
  CHECK(std::fabs(tight - loose) <= tail_loose + 1e-9 * tight);
}

TEST_CASE("series bound dominates the simulated grid functional") {
  // E[(T - T_{N_T})^{eta-1} prod C dT_k^{-theta}] under the power-law grid,
  // against the bound with the exact envelope constant Ct = kappa/(2T)^kappa.
  const double kappa = 0.35, T = 1.0, eta = 0.8, theta = 0.1, C = 1.2;
  const double ct = kappa / std::pow(2.0 * T, kappa);
  const double bound = ubsim::series_moment_bound(C, ct, eta, theta, kappa, T, 1e-12);

  const ubsim::StepDistribution dist = ubsim::StepDistribution::power_law(kappa, T);
  std::mt19937_64 gen(404);
  std::uniform_real_distribution<double> u(1e-12, 1.0 - 1e-12);
  std::vector<double> times;
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const int n_t = ubsim::build_grid(dist, T, [&] { return u(gen); }, times);
    double v = std::pow(T - times[std::size_t(n_t)], eta - 1.0);
    for (int k = 1; k <= n_t; ++k)
      v *= C * std::pow(times[std::size_t(k)] - times[std::size_t(k) - 1], -theta);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(mean + 3.0 * se <= bound);
  CHECK(mean > 0.1 * bound / 10.0);  // the check is not vacuous
}

TEST_CASE("regularity probe: clean constant model") {
  const ubsim::SdeModel model =
      ubsim::constant_model({0.3}, {1.2}, 1, 0.5, 0.9, 1.0, 0.0);
  const ubsim::RegularityReport rep =
      ubsim::regularity_report(model, ubsim::AveragingWeight::linear(), 2048);
  CHECK(rep.warnings.empty());
  CHECK(rep.ellipticity_min == doctest::Approx(1.44).epsilon(1e-12));
}

TEST_CASE("regularity probe: linear drift is flagged as unbounded") {
  const ubsim::SdeModel model = ubsim::bachelier_model({0.05, 100.0, 0.05, 100.0, 1.0});
  const ubsim::RegularityReport rep =
      ubsim::regularity_report(model, ubsim::AveragingWeight::linear(), 4096);
  bool drift_warned = false;
  for (const auto& w : rep.warnings)
    if (w.find("drift unbounded") != std::string::npos) drift_warned = true;
  CHECK(drift_warned);
}

TEST_CASE("regularity probe: local volatility ellipticity floor") {
  const ubsim::SdeModel lv = ubsim::local_vol_model(ubsim::LocalVolVariant::sin4,
                                                    0.05, 100.0, 0.2, 100.0, 1.0, 100.0);
  const ubsim::RegularityReport rep =
      ubsim::regularity_report(lv, ubsim::AveragingWeight::linear(), 4096);
  // vol in [0.75, 1.25] * 20: the sampled minimum respects (0.75 * 20)^2
  CHECK(rep.ellipticity_min >= 225.0 - 1e-9);
  CHECK(rep.ellipticity_min <= 20.0 * 20.0);
  bool floor_violated = false;
  for (const auto& w : rep.warnings)
    if (w.find("below the declared floor") != std::string::npos) floor_violated = true;
  CHECK_FALSE(floor_violated);
}
