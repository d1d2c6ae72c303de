#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ubsim/rng.hpp"
#include "ubsim/stats.hpp"

using ubsim::PathRng;
using ubsim::Philox4x32;
using ubsim::RunStats;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference vectors from the Random123 distribution (kat_vectors).
  {
    Philox4x32 g(0, 0);
    std::uint32_t out[4];
    g.next_block(out);
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
  }
  {
    Philox4x32 g(0xffffffffffffffffull, 0xffffffffffffffffull);
    g.set_counter(0xffffffffffffffffull);
    std::uint32_t out[4];
    g.next_block(out);
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);
  }
  {
    Philox4x32 g(0x299f31d0a4093822ull, 0x0370734413198a2eull);
    g.set_counter(0x85a308d3243f6a88ull);
    std::uint32_t out[4];
    g.next_block(out);
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
  }
}

TEST_CASE("uniforms are strictly inside (0,1) and reproducible per stream") {
  PathRng a(1234, 7);
  PathRng b(1234, 7);
  PathRng c(1234, 8);
  bool differs = false;
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform_open01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform_open01());
    if (u != c.uniform_open01()) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("gauss moments") {
  PathRng rng(2024, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.gauss();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::fabs(mean) <= 4.0 / std::sqrt(double(n)));          // 4 SE of N(0,1)
  CHECK(std::fabs(var - 1.0) <= 4.0 * std::sqrt(2.0 / double(n)));
}

TEST_CASE("runstats merge identity and two-point formula") {
  RunStats x;
  x.push(3.0, 1.0);
  x.push(-1.0, 2.0);
  const RunStats e;
  const RunStats m1 = RunStats::merged(x, e);
  CHECK(m1.count == x.count);
  CHECK(m1.mean == x.mean);
  CHECK(m1.m2 == x.m2);
  const RunStats m2 = RunStats::merged(e, x);
  CHECK(m2.mean == x.mean);

  RunStats a, b;
  a.push(1.7, 0.0);
  b.push(-2.3, 3.0);
  const RunStats ab = RunStats::merged(a, b);
  CHECK(ab.count == 2);
  CHECK(ab.mean == doctest::Approx((1.7 - 2.3) / 2.0).epsilon(1e-15));
  CHECK(ab.m2 == doctest::Approx((1.7 + 2.3) * (1.7 + 2.3) / 2.0).epsilon(1e-15));
  CHECK(ab.min == -2.3);
  CHECK(ab.max == 1.7);
  CHECK(ab.mean_n_t == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("runstats merge is associative and order-insensitive to 1e-12") {
  std::mt19937 gen(77);
  std::normal_distribution<double> z(2.0, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    RunStats a, b, c;
    for (int i = 0; i < 101; ++i) a.push(z(gen), 1.0);
    for (int i = 0; i < 57; ++i) b.push(z(gen), 2.0);
    for (int i = 0; i < 23; ++i) c.push(z(gen), 3.0);
    const RunStats ab_c = RunStats::merged(RunStats::merged(a, b), c);
    const RunStats a_bc = RunStats::merged(a, RunStats::merged(b, c));
    const RunStats c_ba = RunStats::merged(c, RunStats::merged(b, a));
    CHECK(ab_c.mean == doctest::Approx(a_bc.mean).epsilon(1e-12));
    CHECK(ab_c.m2 == doctest::Approx(a_bc.m2).epsilon(1e-12));
    CHECK(ab_c.mean == doctest::Approx(c_ba.mean).epsilon(1e-12));
    CHECK(ab_c.m2 == doctest::Approx(c_ba.m2).epsilon(1e-12));
    CHECK(ab_c.mean_n_t == doctest::Approx(a_bc.mean_n_t).epsilon(1e-12));
  }
}

TEST_CASE("streaming stats match a two-pass recomputation") {
  std::mt19937 gen(13);
  std::lognormal_distribution<double> val(0.0, 1.0);
  std::vector<double> samples(10000);
  RunStats st;
  for (double& s : samples) {
    s = val(gen);
    st.push(s, 0.0);
  }
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= double(samples.size());
  double m2 = 0.0;
  for (double s : samples) m2 += (s - mean) * (s - mean);
  CHECK(st.mean == doctest::Approx(mean).epsilon(1e-10));
  CHECK(st.m2 == doctest::Approx(m2).epsilon(1e-10));
  const double se = std::sqrt(m2 / (10000.0 * 9999.0));
  CHECK(st.std_error() == doctest::Approx(se).epsilon(1e-10));
}

TEST_CASE("stderr undefined below two samples") {
  RunStats st;
  CHECK(std::isnan(st.std_error()));
  st.push(5.0, 0.0);
  CHECK(std::isnan(st.std_error()));
  st.push(6.0, 0.0);
  CHECK_FALSE(std::isnan(st.std_error()));
}
