#include "addinv/io.hpp"

#include "addinv/quadrature.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace addinv::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(const std::string& field, std::size_t line)
{
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (!field.empty() && *begin == '+')
    ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || field.empty())
    throw InputError("line " + std::to_string(line) + ": '" + field + "' is not a number");
  if (!std::isfinite(v))
    throw InputError("line " + std::to_string(line) + ": non-finite value");
  return v;
}

std::string read_text(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Strict view of a JSON object: every key must be consumed.
class Object
{
public:
  Object(const json& doc, std::string where)
    : doc_(doc)
    , where_(std::move(where))
  {
    if (!doc.is_object())
      throw InputError(where_ + ": expected an object");
  }

  ~Object() noexcept(false)
  {
    if (std::uncaught_exceptions())
      return;
    for (const auto& [key, value] : doc_.items())
      if (!seen_.count(key))
        throw InputError(where_ + ": unknown key '" + key + "'");
  }

  const json* find(const std::string& key)
  {
    seen_.insert(key);
    const auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  template <class T>
  void get(const std::string& key, T& out)
  {
    if (const json* v = find(key))
      out = convert<T>(*v, path(key));
  }

  template <class T>
  static T convert(const json& v, const std::string& where)
  {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean())
        throw InputError(where + ": expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0 && std::is_unsigned_v<T>))
        throw InputError(where + ": expected a non-negative integer");
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number())
        throw InputError(where + ": expected a number");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string())
        throw InputError(where + ": expected a string");
      return v.get<std::string>();
    } else {
      if (!v.is_array())
        throw InputError(where + ": expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
      return out;
    }
  }

private:
  const json& doc_;
  std::string where_;
  std::set<std::string> seen_;
};

void check_schema(Object& obj, const char* expected)
{
  std::string schema;
  obj.get("schema", schema);
  if (schema != expected)
    throw InputError("config: schema must be \"" + std::string(expected) + "\"");
}

} // namespace

std::string format_double(double v)
{
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

Dataset parse_dataset(const std::string& text)
{
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t columns = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    const auto fields = split(line);
    if (columns == 0) {
      columns = fields.size();
      if (columns < 2)
        throw InputError("header needs at least one predictor and y");
      for (std::size_t c = 0; c + 1 < columns; ++c)
        if (fields[c] != "x" + std::to_string(c + 1))
          throw InputError("header column " + std::to_string(c + 1) + " must be x" + std::to_string(c + 1));
      if (fields.back() != "y")
        throw InputError("last header column must be y");
      continue;
    }
    if (fields.size() != columns)
      throw InputError("line " + std::to_string(lineno) + ": expected " + std::to_string(columns) + " fields");
    std::vector<double> row;
    for (const auto& f : fields)
      row.push_back(parse_number(f, lineno));
    rows.push_back(std::move(row));
  }
  if (columns == 0)
    throw InputError("empty dataset");
  Dataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(columns - 1);
  data.x.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < d; ++j)
      data.x(k, j) = rows[k][j];
    data.y(k) = rows[k][d];
  }
  return data;
}

Dataset read_dataset(const fs::path& path)
{
  return parse_dataset(read_text(path));
}

std::string format_dataset(const Dataset& data)
{
  std::string out;
  for (Eigen::Index j = 0; j < data.x.cols(); ++j)
    out += "x" + std::to_string(j + 1) + ",";
  out += "y\n";
  for (Eigen::Index k = 0; k < data.x.rows(); ++k) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j)
      out += format_double(data.x(k, j)) + ",";
    out += format_double(data.y(k)) + "\n";
  }
  return out;
}

ConvolutionFamily FitSettings::family(std::size_t dimension) const
{
  if (rates.size() == 1)
    return ConvolutionFamily::laplace(std::vector<double>(dimension, rates[0]));
  if (rates.size() != dimension)
    throw InputError("operator.rates has " + std::to_string(rates.size()) + " entries for " +
                     std::to_string(dimension) + " predictors");
  return ConvolutionFamily::laplace(rates);
}

FitConfig FitSettings::resolved(std::size_t dimension) const
{
  FitConfig cfg = fit;
  if (!eval_ranges.empty()) {
    if (eval_ranges.size() != 1 && eval_ranges.size() != dimension)
      throw InputError("evaluation.ranges must have one entry or one per predictor");
    cfg.eval_grids.clear();
    for (std::size_t j = 0; j < dimension; ++j) {
      const auto [lo, hi] = eval_ranges[eval_ranges.size() == 1 ? 0 : j];
      cfg.eval_grids.push_back(quad::linspace(lo, hi, cfg.grid_points));
    }
  }
  try {
    cfg.validate(dimension);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return cfg;
}

FitSettings parse_fit_settings(const json& doc)
{
  FitSettings s;
  Object root(doc, "config");
  check_schema(root, kFitSchema);
  if (const json* op = root.find("operator")) {
    Object o(*op, root.path("operator"));
    std::string family = "laplace";
    o.get("family", family);
    if (family != "laplace")
      throw InputError("config.operator.family: only \"laplace\" is supported");
    o.get("rates", s.rates);
  }
  if (const json* bf = root.find("backfit")) {
    Object o(*bf, root.path("backfit"));
    o.get("bandwidth", s.fit.backfit.bandwidth);
    o.get("max_iterations", s.fit.backfit.max_iterations);
    o.get("tolerance", s.fit.backfit.tolerance);
    std::size_t points = s.fit.backfit.grid.size();
    o.get("grid_points", points);
    if (points < 3)
      throw InputError("config.backfit.grid_points must be at least 3");
    s.fit.backfit.grid = unit_grid(points);
  }
  if (const json* inv = root.find("inversion")) {
    Object o(*inv, root.path("inversion"));
    o.get("bandwidths", s.fit.inversion_bandwidths);
    o.get("truncation", s.fit.truncation);
    o.get("fourier_panels", s.fit.fourier_panels);
    double flat = s.fit.kernel.flat_radius();
    o.get("kernel_flat_radius", flat);
    if (!(flat > 0.0 && flat <= 1.0))
      throw InputError("config.inversion.kernel_flat_radius must lie in (0, 1]");
    s.fit.kernel = DeconvKernel(flat);
    o.get("density_bandwidths", s.fit.density_bandwidths);
  }
  if (const json* ev = root.find("evaluation")) {
    Object o(*ev, root.path("evaluation"));
    o.get("grid_points", s.fit.grid_points);
    std::vector<std::vector<double>> ranges;
    o.get("ranges", ranges);
    for (const auto& r : ranges) {
      if (r.size() != 2 || !(r[1] > r[0]))
        throw InputError("config.evaluation.ranges entries must be [lower, upper] with lower < upper");
      s.eval_ranges.emplace_back(r[0], r[1]);
    }
  }
  if (const json* var = root.find("variance")) {
    Object o(*var, root.path("variance"));
    o.get("enabled", s.fit.compute_variance);
    o.get("band_alpha", s.fit.band_alpha);
    o.get("panels", s.fit.variance_panels);
  }
  if (s.rates.empty())
    throw InputError("config.operator.rates must not be empty");
  for (double r : s.rates)
    if (!(r > 0.0))
      throw InputError("config.operator.rates must be positive");
  return s;
}

json to_json(const FitSettings& s)
{
  json ranges = json::array();
  for (const auto& [lo, hi] : s.eval_ranges)
    ranges.push_back({ lo, hi });
  return json{
    { "schema", kFitSchema },
    { "operator", { { "family", "laplace" }, { "rates", s.rates } } },
    { "backfit",
      { { "bandwidth", s.fit.backfit.bandwidth },
        { "max_iterations", s.fit.backfit.max_iterations },
        { "tolerance", s.fit.backfit.tolerance },
        { "grid_points", s.fit.backfit.grid.size() } } },
    { "inversion",
      { { "bandwidths", s.fit.inversion_bandwidths },
        { "truncation", s.fit.truncation },
        { "fourier_panels", s.fit.fourier_panels },
        { "kernel_flat_radius", s.fit.kernel.flat_radius() },
        { "density_bandwidths", s.fit.density_bandwidths } } },
    { "evaluation", { { "grid_points", s.fit.grid_points }, { "ranges", ranges } } },
    { "variance",
      { { "enabled", s.fit.compute_variance },
        { "band_alpha", s.fit.band_alpha },
        { "panels", s.fit.variance_panels } } },
  };
}

SimulationConfig parse_simulation_config(const json& doc)
{
  SimulationConfig c;
  Object root(doc, "config");
  check_schema(root, kSimulateSchema);
  try {
    if (const json* v = root.find("model"))
      c.model = parse_model(Object::convert<std::string>(*v, "config.model"));
    if (const json* v = root.find("design"))
      c.design = parse_design(Object::convert<std::string>(*v, "config.design"));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  root.get("n", c.n);
  root.get("noise_variance", c.noise_variance);
  root.get("truncation", c.truncation);
  root.get("decay_rate", c.decay_rate);
  root.get("replicates", c.replicates);
  root.get("seed", c.seed);
  root.get("anchor_levels", c.anchor_levels);
  root.get("fourier_panels", c.fourier_panels);
  root.get("threads", c.threads);
  if (const json* w = root.find("window")) {
    Object o(*w, root.path("window"));
    o.get("lower", c.window_lower);
    o.get("upper", c.window_upper);
    o.get("points", c.window_points);
  }
  if (const json* bf = root.find("backfit")) {
    Object o(*bf, root.path("backfit"));
    o.get("max_iterations", c.backfit_max_iterations);
    o.get("tolerance", c.backfit_tolerance);
    o.get("grid_points", c.backfit_grid_points);
  }
  if (const json* bw = root.find("bandwidths")) {
    Object o(*bw, root.path("bandwidths"));
    if (const json* v = o.find("mode")) {
      try {
        c.bandwidth_mode = parse_bandwidth_mode(Object::convert<std::string>(*v, o.path("mode")));
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
    }
    o.get("pilot_replicates", c.pilot_replicates);
    if (const json* g = o.find("grids")) {
      Object gg(*g, o.path("grids"));
      gg.get("density_factors", c.grids.density_factors);
      gg.get("backfit", c.grids.backfit);
      gg.get("inversion", c.grids.inversion);
    }
    if (const json* f = o.find("fixed")) {
      Object ff(*f, o.path("fixed"));
      Bandwidths b;
      ff.get("density", b.density);
      ff.get("backfit", b.backfit);
      ff.get("inversion", b.inversion);
      c.fixed = b;
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

json to_json(const Bandwidths& b)
{
  return json{ { "density", b.density }, { "backfit", b.backfit }, { "inversion", b.inversion } };
}

json to_json(const SimulationConfig& c)
{
  json bw = {
    { "mode", to_string(c.bandwidth_mode) },
    { "pilot_replicates", c.pilot_replicates },
    { "grids",
      { { "density_factors", c.grids.density_factors },
        { "backfit", c.grids.backfit },
        { "inversion", c.grids.inversion } } },
  };
  if (c.fixed)
    bw["fixed"] = to_json(*c.fixed);
  return json{
    { "schema", kSimulateSchema },
    { "model", to_string(c.model) },
    { "design", to_string(c.design) },
    { "n", c.n },
    { "noise_variance", c.noise_variance },
    { "truncation", c.truncation },
    { "decay_rate", c.decay_rate },
    { "replicates", c.replicates },
    { "seed", c.seed },
    { "anchor_levels", c.anchor_levels },
    { "fourier_panels", c.fourier_panels },
    { "threads", c.threads },
    { "window", { { "lower", c.window_lower }, { "upper", c.window_upper }, { "points", c.window_points } } },
    { "backfit",
      { { "max_iterations", c.backfit_max_iterations },
        { "tolerance", c.backfit_tolerance },
        { "grid_points", c.backfit_grid_points } } },
    { "bandwidths", bw },
  };
}

json read_json(const fs::path& path)
{
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
}

std::string format_curve(const ComponentEstimate& c)
{
  std::string out = "x,estimate,variance,band_lo,band_hi\n";
  const bool has_variance = !c.variance.empty();
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    out += format_double(c.grid[i]) + "," + format_double(c.values[i]) + ",";
    if (has_variance)
      out += format_double(c.variance[i]) + "," + format_double(c.band_lower[i]) + "," + format_double(c.band_upper[i]);
    else
      out += "nan,nan,nan";
    out += "\n";
  }
  return out;
}

std::string format_summary(const ComponentSummary& s)
{
  std::string out = "x,truth,mean,q05,q95\n";
  for (std::size_t i = 0; i < s.grid.size(); ++i)
    out += format_double(s.grid[i]) + "," + format_double(s.truth[i]) + "," + format_double(s.mean[i]) + "," +
           format_double(s.q05[i]) + "," + format_double(s.q95[i]) + "\n";
  return out;
}

std::string sha256_hex(const std::string& bytes)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const fs::path& path)
{
  return sha256_hex(read_text(path));
}

std::string utc_timestamp()
{
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_outputs(const fs::path& dir,
                   const Outputs& outputs,
                   const std::string& command,
                   const json& config,
                   const std::string& started,
                   const json& extra)
{
  fs::create_directories(dir);
  json files = json::array();
  for (const auto& [name, bytes] : outputs) {
    const fs::path target = dir / name;
    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    out << bytes;
    if (!out)
      throw std::runtime_error("cannot write '" + target.string() + "'");
    files.push_back({ { "path", name }, { "sha256", sha256_hex(bytes) }, { "bytes", bytes.size() } });
  }
  json manifest = {
    { "schema", kManifestSchema },
    { "command", command },
    { "version", kVersion },
    { "config", config },
    { "seeding", "replicate r uses substream_seed(seed, 0, r); pilot p uses substream_seed(seed, 1, p)" },
    { "started", started },
    { "finished", utc_timestamp() },
    { "files", files },
  };
  for (const auto& [key, value] : extra.items())
    manifest[key] = value;
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << "\n";
  if (!out)
    throw std::runtime_error("cannot write manifest");
}

bool verify_manifest(const fs::path& dir)
{
  try {
    const json manifest = read_json(dir / "manifest.json");
    for (const auto& f : manifest.at("files")) {
      const fs::path p = dir / f.at("path").get<std::string>();
      if (!fs::exists(p) || sha256_file(p) != f.at("sha256").get<std::string>())
        return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

} // namespace addinv::io
