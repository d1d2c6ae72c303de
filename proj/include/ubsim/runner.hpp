#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ubsim/averaging.hpp"
#include "ubsim/model.hpp"
#include "ubsim/stats.hpp"
#include "ubsim/step_distribution.hpp"

namespace ubsim {

// Fully resolved run description. Parsed from the JSON config document;
// unknown keys anywhere are config errors.
struct RunConfig {
  // model block
  std::string model_name = "bachelier";
  double r = 0.05;
  double x0 = 100.0;
  double sigma = 0.05;   // bachelier relative vol
  double sigma0 = 0.2;   // local-vol base
  double strike = 100.0;
  double maturity = 1.0;
  std::optional<double> vol_scale;  // defaults to x0
  std::optional<Regularity> regularity;
  std::optional<double> ellipticity_floor;
  // custom model
  std::vector<double> drift_const{0.0};
  std::vector<double> vol_const{1.0};
  int dim = 1;

  // averaging block
  std::string averaging_kind = "linear";
  double beta = 0.0;
  int quadrature_points = 257;
  std::vector<double> table_times, table_values;  // tabulated kind

  // steps block
  std::string steps_kind = "power_law";
  double kappa = 0.35;
  double theta = 1.0;  // gamma only

  std::string method = "unbiased";
  std::int64_t n_sims = 1;
  int euler_steps = 100;
  // averaged-integral discretization of the euler method:
  // right_rectangle reproduces the reference comparison rows; exact_joint
  // reuses the exact (dW, J) update and is nearly bias-free.
  std::string euler_i_update = "right_rectangle";
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = auto
  std::string output_path;
  std::string output_format = "json";
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);

struct Problem {
  SdeModel model;
  AveragingWeight weight;
  StepDistribution dist;
};

Problem build_problem(const RunConfig& cfg);

struct RunResult {
  RunStats stats;
  double wall_time_ms = 0.0;
  // Full structured payload: method, model, params echo, n_sims, seed, mean,
  // stderr, min, max, mean_n_t, wall_time_ms, engine_version. Keys are
  // emitted in sorted order, so the payload is byte-stable; wall_time_ms is
  // the only field excluded from the determinism contract.
  nlohmann::json payload;
  std::string csv() const;
};

// Simulates cfg.n_sims paths with the configured estimator. Simulations are
// processed in fixed blocks whose partial statistics merge in block order, so
// the result is bit-identical for a fixed (seed, n_sims) regardless of the
// worker count. Worker resolution: config `workers` key, else UBSIM_WORKERS,
// else all hardware threads.
RunResult run(const RunConfig& cfg);

// Straight-line single-pass loop over all simulations, kept as the reference
// implementation for the parallel kernel (tests and the benchmark compare
// against it). Statistically identical; floating-point accumulation order
// differs from the block-merged path.
RunStats run_reference_serial(const RunConfig& cfg);

// Runs the stored reference-table experiment configurations at
// the requested simulation budget and prints reference value, computed mean,
// stderr and a pass/fail flag at 4 combined standard errors per row.
// Returns the number of failed rows.
int reproduce_tables(int table, std::int64_t n_sims, std::ostream& os);

// Prints the advisory diagnostics for a configured problem: integrability
// margins at p = 1, 2, the empirical averaging-ratio constant, and the
// coefficient regularity probe.
void print_diagnostics(const RunConfig& cfg, std::ostream& os);

}  // namespace ubsim
