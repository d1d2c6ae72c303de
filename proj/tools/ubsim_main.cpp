#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ubsim/common.hpp"
#include "ubsim/runner.hpp"

namespace {

int do_run(ubsim::RunConfig cfg) {
  const ubsim::RunResult res = ubsim::run(cfg);
  const std::string body =
      cfg.output_format == "csv" ? res.csv() : res.payload.dump(2) + "\n";
  if (cfg.output_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) throw ubsim::ConfigError("cannot write output file: " + cfg.output_path);
    out << body;
    std::cout << "mean=" << res.stats.mean << " stderr=" << res.stats.std_error()
              << " mean_n_t=" << res.stats.mean_n_t << " -> " << cfg.output_path
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ubsim: unbiased Monte Carlo for path-dependent SDEs with averaging "
      "functionals, plus a biased Euler baseline"};
  app.require_subcommand(1);

  std::string config_path, out_path, format, method;
  std::int64_t sims = -1;
  std::int64_t seed = -1;
  int table = 1;

  CLI::App* cmd_run = app.add_subcommand("run", "run a configured Monte Carlo estimation");
  cmd_run->add_option("--config", config_path, "JSON config file")->required();
  cmd_run->add_option("--sims", sims, "override n_sims");
  cmd_run->add_option("--seed", seed, "override seed");
  cmd_run->add_option("--method", method, "override method");
  cmd_run->add_option("--out", out_path, "override output path");
  cmd_run->add_option("--format", format, "override output format (json|csv)");

  CLI::App* cmd_diag =
      app.add_subcommand("diagnose", "print integrability and regularity diagnostics");
  cmd_diag->add_option("--config", config_path, "JSON config file")->required();

  CLI::App* cmd_rep =
      app.add_subcommand("reproduce", "rerun the stored reference experiment tables");
  cmd_rep->add_option("--table", table, "table number (1, 2 or 3)")
      ->required()
      ->check(CLI::Range(1, 3));
  std::int64_t rep_sims = 1000000;
  cmd_rep->add_option("--sims", rep_sims, "simulation budget per row");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      ubsim::RunConfig cfg = ubsim::load_config_file(config_path);
      if (sims >= 0) cfg.n_sims = sims;
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      if (!method.empty()) cfg.method = method;
      if (!out_path.empty()) cfg.output_path = out_path;
      if (!format.empty()) cfg.output_format = format;
      if (cfg.method != "unbiased" && cfg.method != "unbiased_constvol" &&
          cfg.method != "euler")
        throw ubsim::ConfigError("method must be one of unbiased, unbiased_constvol, euler");
      if (cfg.output_format != "json" && cfg.output_format != "csv")
        throw ubsim::ConfigError("format must be json or csv");
      return do_run(std::move(cfg));
    }
    if (cmd_diag->parsed()) {
      const ubsim::RunConfig cfg = ubsim::load_config_file(config_path);
      ubsim::print_diagnostics(cfg, std::cout);
      return 0;
    }
    if (cmd_rep->parsed()) {
      ubsim::reproduce_tables(table, rep_sims, std::cout);
      return 0;
    }
  } catch (const ubsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ubsim::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
