#pragma once

#include "addinv/empirical.hpp"
#include "addinv/kernels.hpp"
#include "addinv/pipeline.hpp"
#include "addinv/simulation.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace addinv::io {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kFitSchema = "addinv.fit/1";
inline constexpr const char* kSimulateSchema = "addinv.simulate/1";
inline constexpr const char* kManifestSchema = "addinv.manifest/1";

//! Malformed dataset or configuration.
class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! CSV with header x1,...,xd,y.
Dataset parse_dataset(const std::string& text);
Dataset read_dataset(const std::filesystem::path& path);
std::string format_dataset(const Dataset& data);

//! Shortest decimal text that reads back to the same double.
std::string format_double(double v);

struct FitSettings
{
  FitConfig fit;
  //! Laplace rates; a single value is broadcast to every axis.
  std::vector<double> rates{ 3.0 };
  //! Optional [lower, upper] per axis for the evaluation grid.
  std::vector<std::pair<double, double>> eval_ranges;

  ConvolutionFamily family(std::size_t dimension) const;
  FitConfig resolved(std::size_t dimension) const;
};

FitSettings parse_fit_settings(const nlohmann::json& doc);
nlohmann::json to_json(const FitSettings& settings);

SimulationConfig parse_simulation_config(const nlohmann::json& doc);
nlohmann::json to_json(const SimulationConfig& config);
nlohmann::json to_json(const Bandwidths& bandwidths);

nlohmann::json read_json(const std::filesystem::path& path);

//! x,estimate,variance,band_lo,band_hi
std::string format_curve(const ComponentEstimate& component);
//! x,truth,mean,q05,q95
std::string format_summary(const ComponentSummary& summary);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

//! Files to emit, keyed by name relative to the output directory.
using Outputs = std::map<std::string, std::string>;

//! Writes every output and then manifest.json listing their digests.
void write_outputs(const std::filesystem::path& dir,
                   const Outputs& outputs,
                   const std::string& command,
                   const nlohmann::json& config,
                   const std::string& started,
                   const nlohmann::json& extra = nlohmann::json::object());

//! True when every file listed in dir/manifest.json exists with the recorded digest.
bool verify_manifest(const std::filesystem::path& dir);

std::string utc_timestamp();

} // namespace addinv::io
