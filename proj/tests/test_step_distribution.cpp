#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ubsim/step_distribution.hpp"

using ubsim::StepDistribution;

TEST_CASE("power law density values") {
  const StepDistribution d = StepDistribution::power_law(0.35, 1.0);
  // kappa/(2T)^kappa * s^(kappa-1) at s = 2T collapses to kappa/(2T)
  CHECK(d.density(2.0) == doctest::Approx(0.175).epsilon(1e-12));
  CHECK(d.density(2.5) == 0.0);
  const StepDistribution uniform = StepDistribution::power_law(1.0, 1.0);
  CHECK(uniform.density(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS((void)d.density(0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)d.density(-1.0), std::invalid_argument);
}

TEST_CASE("power law cdf and survival") {
  const StepDistribution d = StepDistribution::power_law(0.35, 1.0);
  CHECK(d.survival(1.0) == doctest::Approx(0.21541590210324923).epsilon(1e-12));
  CHECK(d.survival(0.0) == 1.0);
  CHECK(d.cdf(2.0) == 1.0);
  CHECK(d.cdf(5.0) == 1.0);
  CHECK_THROWS_AS((void)d.cdf(-0.5), std::invalid_argument);
  // the law stays usable on (0, horizon]: positive density, survival > 0
  for (double s = 0.05; s <= 1.0; s += 0.05) {
    CHECK(d.density(s) > 0.0);
    CHECK(d.survival(s) > 0.0);
  }
  // density is the derivative of the cdf away from the endpoint singularity
  for (double s : {0.2, 0.7, 1.3, 1.9}) {
    const double h = 1e-6;
    const double fd = (d.cdf(s + h) - d.cdf(s - h)) / (2.0 * h);
    CHECK(d.density(s) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("power law inverse-cdf sampling") {
  const StepDistribution d = StepDistribution::power_law(0.35, 1.0);
  CHECK(d.sample_step(0.5) == doctest::Approx(0.27602237841845306).epsilon(1e-12));
  CHECK(d.sample_step(1.0 - 1e-13) == doctest::Approx(2.0).epsilon(1e-12));
  const StepDistribution uniform = StepDistribution::power_law(1.0, 1.0);
  CHECK(uniform.sample_step(0.25) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS((void)d.sample_step(0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)d.sample_step(1.0), std::invalid_argument);

  for (double u = 0.05; u < 1.0; u += 0.05)
    CHECK(d.cdf(d.sample_step(u)) == doctest::Approx(u).epsilon(1e-12));
}

TEST_CASE("power law empirical mean matches 2T kappa/(kappa+1)") {
  const StepDistribution d = StepDistribution::power_law(0.35, 1.0);
  const double exact = d.mean();
  CHECK(exact == doctest::Approx(2.0 * 0.35 / 1.35).epsilon(1e-15));
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(1e-12, 1.0 - 1e-12);
  const int n = 1000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = d.sample_step(u(gen));
    sum += s;
    sq += s * s;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::fabs(mean - exact) <= 3.0 * se);
}

TEST_CASE("gamma cdf against reference values") {
  // frozen high-precision values for shape 0.7, scale 0.4
  const StepDistribution g = StepDistribution::gamma(0.7, 0.4);
  CHECK(g.cdf(0.05) == doctest::Approx(0.24400318587323244).epsilon(1e-10));
  CHECK(g.cdf(0.20) == doctest::Approx(0.5575152928771887).epsilon(1e-10));
  CHECK(g.cdf(0.50) == doctest::Approx(0.8218339879331173).epsilon(1e-10));
  CHECK(g.cdf(1.00) == doctest::Approx(0.956026891460885).epsilon(1e-10));
  CHECK(g.cdf(2.00) == doctest::Approx(0.9969537579688733).epsilon(1e-10));
  // exponential special case: P(1, x) = 1 - e^{-x}
  const StepDistribution e = StepDistribution::gamma(1.0, 1.0);
  for (double x : {0.1, 0.5, 1.0, 3.0})
    CHECK(e.cdf(x) == doctest::Approx(-std::expm1(-x)).epsilon(1e-12));
}

TEST_CASE("gamma inverse-cdf by bisection") {
  const StepDistribution g = StepDistribution::gamma(0.7, 0.4);
  CHECK(g.sample_step(0.5) == doctest::Approx(0.16296949939057653).epsilon(1e-8));
  const StepDistribution g2 = StepDistribution::gamma(2.5, 0.3);
  CHECK(g2.sample_step(0.9) == doctest::Approx(1.3854535349671684).epsilon(1e-8));
  for (double u = 0.1; u < 1.0; u += 0.1)
    CHECK(g.cdf(g.sample_step(u)) == doctest::Approx(u).epsilon(1e-9));
  // survival stays positive at the horizon, as the estimator requires
  CHECK(g.survival(1.0) > 0.0);
  CHECK(g.kappa1() == 0.7);
  CHECK(g.kappa2() == 0.7);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(StepDistribution::power_law(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::power_law(0.35, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::gamma(-0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::gamma(0.5, 0.0), std::invalid_argument);
}
