#include "addinv/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
  CLI::App app{ "Additive inverse regression: smooth backfitting followed by Fourier deconvolution" };
  app.require_subcommand(1);

  std::string dataset, config, out;
  auto* fit = app.add_subcommand("fit", "Estimate the additive components from a CSV dataset");
  fit->add_option("dataset", dataset, "CSV with header x1,...,xd,y")->required();
  fit->add_option("--config", config, "JSON fit configuration")->required();
  fit->add_option("--out", out, "Output directory")->required();

  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo study");
  simulate->add_option("--config", config, "JSON simulation configuration")->required();
  simulate->add_option("--out", out, "Output directory")->required();

  std::size_t runs = 100;
  std::uint64_t seed = 1;
  auto* table1 = app.add_subcommand("table1", "Reproduce the published MISE table");
  table1->add_option("--runs", runs, "Replicates per cell")->capture_default_str();
  table1->add_option("--seed", seed, "Master seed")->capture_default_str();
  table1->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : addinv::cli::malformed_input;
  }

  std::optional<std::size_t> threads;
  try {
    threads = addinv::cli::threads_from_environment();
  } catch (const std::exception& e) {
    std::cerr << "addinv: " << e.what() << "\n";
    return addinv::cli::malformed_input;
  }

  if (*fit)
    return addinv::cli::cmd_fit(dataset, config, out, std::cerr);
  if (*simulate)
    return addinv::cli::cmd_simulate(config, out, std::cerr, threads);
  return addinv::cli::cmd_table1(out, runs, seed, std::cerr, threads);
}
