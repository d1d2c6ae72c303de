// Compares the serial reference loop with the block-parallel OpenMP kernel on
// the same workload and checks that both agree statistically. The parallel
// kernel is bit-stable across worker counts; the straight serial loop
// accumulates in a different floating-point order, so agreement is checked at
// a relative tolerance rather than bitwise.

#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ubsim/runner.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_case(const char* label, ubsim::RunConfig cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const ubsim::RunStats serial = ubsim::run_reference_serial(cfg);
  const double t_serial = seconds_since(t0);

  cfg.workers = 0;  // auto
  const auto t1 = std::chrono::steady_clock::now();
  const ubsim::RunResult parallel = ubsim::run(cfg);
  const double t_parallel = seconds_since(t1);

  const double rel =
      std::fabs(parallel.stats.mean - serial.mean) /
      (std::fabs(serial.mean) > 0.0 ? std::fabs(serial.mean) : 1.0);
  std::printf("%-28s n=%lld  serial %7.3fs (%8.0f paths/s)  parallel %7.3fs "
              "(%8.0f paths/s)  speedup %.2fx  mean rel diff %.2e %s\n",
              label, static_cast<long long>(cfg.n_sims), t_serial,
              cfg.n_sims / t_serial, t_parallel, cfg.n_sims / t_parallel,
              t_serial / t_parallel, rel, rel < 1e-10 ? "[ok]" : "[MISMATCH]");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("hardware threads (omp): %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel path runs single-threaded\n");
#endif

  ubsim::RunConfig bachelier;
  bachelier.model_name = "bachelier";
  bachelier.sigma = 0.2;
  bachelier.method = "unbiased_constvol";
  bachelier.n_sims = 400000;
  bachelier.seed = 7;
  bench_case("bachelier unbiased_constvol", bachelier);

  ubsim::RunConfig localvol = bachelier;
  localvol.model_name = "localvol_sin4";
  localvol.method = "unbiased";
  localvol.n_sims = 400000;
  bench_case("localvol_sin4 unbiased", localvol);

  ubsim::RunConfig euler = localvol;
  euler.method = "euler";
  euler.euler_steps = 200;
  euler.n_sims = 50000;
  bench_case("localvol_sin4 euler n=200", euler);

  return 0;
}
