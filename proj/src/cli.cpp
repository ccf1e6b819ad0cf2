#include "addinv/cli.hpp"

#include "addinv/errors.hpp"
#include "addinv/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace addinv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Published
{
  SignalModel model;
  Design design;
  double backfit[2];
  double marginal_integration[2];
};

// Backfitting and marginal integration MISE published for N = 701, R = 500.
constexpr Published kTable1[] = {
  { SignalModel::sig1, Design::uniform, { 0.00179, 0.00154 }, { 0.00347, 0.00311 } },
  { SignalModel::sig2, Design::uniform, { 0.00189, 0.00258 }, { 0.00365, 0.00354 } },
  { SignalModel::sig1, Design::correlated_normal, { 0.00500, 0.00488 }, { 0.02219, 0.01917 } },
  { SignalModel::sig2, Design::correlated_normal, { 0.00353, 0.00345 }, { 0.00934, 0.01092 } },
};

bool enough_replicates(const SimulationReport& report)
{
  return report.succeeded * 10 >= report.config.replicates * 9;
}

void add_report(io::Outputs& outputs, const std::string& prefix, const SimulationReport& report)
{
  std::string imse = "component,imse,replicates\n";
  for (std::size_t j = 0; j < report.components.size(); ++j)
    imse += "theta" + std::to_string(j + 1) + "," + io::format_double(report.components[j].imse) + "," +
            std::to_string(report.succeeded) + "\n";
  outputs[prefix + "imse.csv"] = imse;
  for (std::size_t j = 0; j < report.components.size(); ++j)
    outputs[prefix + "theta" + std::to_string(j + 1) + ".csv"] = io::format_summary(report.components[j]);
  std::string failures = "replicate,message\n";
  for (const auto& f : report.failures) {
    std::string msg = f.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    failures += std::to_string(f.index) + "," + msg + "\n";
  }
  outputs[prefix + "failures.csv"] = failures;
  outputs[prefix + "bandwidths.json"] = io::to_json(report.bandwidths).dump(2) + "\n";
}

void report_failures(const SimulationReport& report, std::ostream& err)
{
  for (const auto& f : report.failures)
    err << "replicate " << f.index << " failed: " << f.message << "\n";
}

} // namespace

std::optional<std::size_t> threads_from_environment()
{
  const char* value = std::getenv(kThreadsVariable);
  if (!value || !*value)
    return std::nullopt;
  char* end = nullptr;
  const long n = std::strtol(value, &end, 10);
  if (*end != '\0' || n < 0)
    throw io::InputError(std::string(kThreadsVariable) + " must be a non-negative integer");
  return static_cast<std::size_t>(n);
}

int cmd_fit(const fs::path& dataset, const fs::path& config, const fs::path& out, std::ostream& err)
{
  const std::string started = io::utc_timestamp();
  Dataset data;
  io::FitSettings settings;
  FitConfig cfg;
  std::optional<ConvolutionFamily> fam;
  try {
    data = io::read_dataset(dataset);
    if (data.size() < 10)
      throw io::InputError("dataset needs at least 10 observations");
    validate(data);
    settings = io::parse_fit_settings(io::read_json(config));
    fam = settings.family(data.dimension());
    cfg = settings.resolved(data.dimension());
  } catch (const std::exception& e) {
    err << "addinv fit: " << e.what() << "\n";
    return malformed_input;
  }

  FitResult fit;
  try {
    fit = fit_additive(data, *fam, cfg);
  } catch (const std::exception& e) {
    err << "addinv fit: pipeline failure: " << e.what() << "\n";
    return pipeline_failure;
  }

  io::Outputs outputs;
  json components = json::array();
  for (const auto& c : fit.components) {
    const std::string name = "theta" + std::to_string(c.axis + 1) + ".csv";
    outputs[name] = io::format_curve(c);
    double imag = 0.0;
    for (double v : c.imag_residue)
      imag = std::max(imag, std::abs(v));
    components.push_back({ { "axis", c.axis + 1 },
                           { "file", name },
                           { "inversion_bandwidth", cfg.inversion_bandwidth(c.axis) },
                           { "max_imag_residue", imag } });
  }
  const auto& bf = fit.stage.backfit;
  const json diagnostics = {
    { "intercept", fit.intercept },
    { "backfit",
      { { "iterations", bf.iterations },
        { "converged", bf.converged },
        { "final_change", bf.final_change },
        { "fixed_point_residual", bf.residual },
        { "changes", bf.changes } } },
    { "density_bandwidths", fit.density_bandwidths },
    { "noise_variance", fit.noise_variance },
    { "components", components },
  };
  outputs["diagnostics.json"] = diagnostics.dump(2) + "\n";

  json resolved = io::to_json(settings);
  resolved["dataset"] = { { "path", dataset.string() }, { "sha256", io::sha256_file(dataset) } };
  try {
    io::write_outputs(out, outputs, "fit", resolved, started);
  } catch (const std::exception& e) {
    err << "addinv fit: " << e.what() << "\n";
    return malformed_input;
  }
  return ok;
}

int cmd_simulate(const fs::path& config, const fs::path& out, std::ostream& err, std::optional<std::size_t> threads)
{
  const std::string started = io::utc_timestamp();
  SimulationConfig cfg;
  try {
    cfg = io::parse_simulation_config(io::read_json(config));
  } catch (const std::exception& e) {
    err << "addinv simulate: " << e.what() << "\n";
    return malformed_input;
  }
  if (threads)
    cfg.threads = *threads;

  SimulationReport report;
  try {
    report = run_study(cfg, simulation_family(cfg));
  } catch (const std::exception& e) {
    err << "addinv simulate: " << e.what() << "\n";
    return pipeline_failure;
  }
  report_failures(report, err);

  io::Outputs outputs;
  add_report(outputs, "", report);
  io::write_outputs(out, outputs, "simulate", io::to_json(cfg), started, { { "runtime_seconds", report.runtime_seconds } });
  if (!enough_replicates(report)) {
    err << "addinv simulate: only " << report.succeeded << " of " << cfg.replicates << " replicates succeeded\n";
    return too_many_failures;
  }
  return ok;
}

int cmd_table1(const fs::path& out, std::size_t runs, std::uint64_t seed, std::ostream& err, std::optional<std::size_t> threads)
{
  const std::string started = io::utc_timestamp();
  if (runs < 1) {
    err << "addinv table1: --runs must be positive\n";
    return malformed_input;
  }

  io::Outputs outputs;
  json cells = json::array();
  std::ostringstream table;
  table << "model,design,component,imse,imse_window_average,published,imse_over_published,mi_published,mi_over_imse\n";
  double runtime = 0.0;
  int status = ok;
  for (const auto& cell : kTable1) {
    SimulationConfig cfg;
    cfg.model = cell.model;
    cfg.design = cell.design;
    cfg.replicates = runs;
    cfg.seed = seed;
    if (threads)
      cfg.threads = *threads;
    SimulationReport report;
    try {
      report = run_study(cfg, simulation_family(cfg));
    } catch (const std::exception& e) {
      err << "addinv table1: " << to_string(cell.model) << "/" << to_string(cell.design) << ": " << e.what() << "\n";
      return pipeline_failure;
    }
    report_failures(report, err);
    if (!enough_replicates(report))
      status = too_many_failures;
    runtime += report.runtime_seconds;
    const std::string prefix = to_string(cell.model) + "_" + to_string(cell.design) + "/";
    add_report(outputs, prefix, report);
    const double width = cfg.window_upper - cfg.window_lower;
    for (std::size_t j = 0; j < 2; ++j) {
      const double v = report.components[j].imse;
      table << to_string(cell.model) << "," << to_string(cell.design) << ",theta" << j + 1 << ","
            << io::format_double(v) << "," << io::format_double(v / width) << ","
            << io::format_double(cell.backfit[j]) << "," << io::format_double(v / cell.backfit[j]) << ","
            << io::format_double(cell.marginal_integration[j]) << ","
            << io::format_double(cell.marginal_integration[j] / v) << "\n";
    }
    cells.push_back(io::to_json(cfg));
  }
  outputs["table1.csv"] = table.str();
  err << table.str();

  const json config = { { "runs", runs }, { "seed", seed }, { "cells", cells } };
  io::write_outputs(out, outputs, "table1", config, started, { { "runtime_seconds", runtime } });
  return status;
}

} // namespace addinv::cli
