#include "addinv/simulation.hpp"

#include "addinv/errors.hpp"
#include "addinv/pipeline.hpp"
#include "addinv/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace addinv {

namespace {

constexpr double kCorrelation = std::numbers::sqrt2 / 2.0;

double normal_pdf(double x)
{
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kPilotStream = 1;

} // namespace

SignalModel parse_model(std::string_view name)
{
  if (name == "sig1")
    return SignalModel::sig1;
  if (name == "sig2")
    return SignalModel::sig2;
  if (name == "sig3")
    return SignalModel::sig3;
  throw std::invalid_argument("unknown signal model '" + std::string(name) + "'");
}

Design parse_design(std::string_view name)
{
  if (name == "uniform")
    return Design::uniform;
  if (name == "correlated-normal" || name == "correlated_normal")
    return Design::correlated_normal;
  throw std::invalid_argument("unknown design '" + std::string(name) + "'");
}

std::string to_string(SignalModel model)
{
  switch (model) {
    case SignalModel::sig1:
      return "sig1";
    case SignalModel::sig2:
      return "sig2";
    case SignalModel::sig3:
      return "sig3";
  }
  return "?";
}

std::string to_string(Design design)
{
  return design == Design::uniform ? "uniform" : "correlated-normal";
}

BandwidthMode parse_bandwidth_mode(std::string_view name)
{
  if (name == "fixed")
    return BandwidthMode::fixed;
  if (name == "oracle")
    return BandwidthMode::oracle;
  if (name == "cv" || name == "cross-validation")
    return BandwidthMode::cross_validation;
  throw std::invalid_argument("unknown bandwidth mode '" + std::string(name) + "'");
}

std::string to_string(BandwidthMode mode)
{
  switch (mode) {
    case BandwidthMode::fixed:
      return "fixed";
    case BandwidthMode::oracle:
      return "oracle";
    case BandwidthMode::cross_validation:
      return "cv";
  }
  return "?";
}

double signal_component(SignalModel model, std::size_t axis, double x)
{
  if (axis > 1)
    throw std::out_of_range("signal models are two-dimensional");
  switch (model) {
    case SignalModel::sig1:
      return axis == 0 ? std::exp(-(x - 0.4) * (x - 0.4)) : std::exp(-(x - 0.1) * (x - 0.1));
    case SignalModel::sig2:
      return axis == 0 ? x * std::exp(-std::abs(x)) : 1.0 / (1.0 + x * x);
    case SignalModel::sig3:
      return axis == 0 ? std::exp(-std::abs(x)) : 1.0 / (1.0 + x * x);
  }
  throw std::invalid_argument("unknown signal model");
}

SignalValue eval_signal(SignalModel model, double x1, double x2)
{
  SignalValue v;
  v.first = signal_component(model, 0, x1);
  v.second = signal_component(model, 1, x2);
  v.total = v.first + v.second;
  return v;
}

Eigen::MatrixXd sample_design(Design design, std::size_t n, double truncation, std::uint64_t seed)
{
  if (n < 1)
    throw std::invalid_argument("design sample size must be positive");
  if (!(truncation > 0.0))
    throw std::invalid_argument("truncation value a_N must be positive");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
  if (design == Design::uniform) {
    std::uniform_real_distribution<double> unif(-1.0 / truncation, 1.0 / truncation);
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      x(k, 0) = unif(rng);
      x(k, 1) = unif(rng);
    }
  } else {
    std::normal_distribution<double> normal;
    const double tail = std::sqrt(1.0 - kCorrelation * kCorrelation);
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      const double a = normal(rng);
      const double b = normal(rng);
      x(k, 0) = a;
      x(k, 1) = kCorrelation * a + tail * b;
    }
  }
  return x;
}

DesignMarginal design_marginal(Design design, double truncation)
{
  DesignMarginal m;
  if (design == Design::uniform) {
    const double half = 1.0 / truncation;
    m.lower = -half;
    m.upper = half;
    m.density = [half](double x) { return std::abs(x) <= half ? 0.5 / half : 0.0; };
  } else {
    m.lower = -8.0;
    m.upper = 8.0;
    m.density = normal_pdf;
  }
  return m;
}

double design_joint_density(Design design, double truncation, double x1, double x2)
{
  if (design == Design::uniform) {
    const double half = 1.0 / truncation;
    return (std::abs(x1) <= half && std::abs(x2) <= half) ? 0.25 / (half * half) : 0.0;
  }
  const double r = kCorrelation;
  const double det = 1.0 - r * r;
  const double q = (x1 * x1 - 2.0 * r * x1 * x2 + x2 * x2) / det;
  return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
}

double convolve_with_psi(const ConvolutionFamily& fam,
                         std::size_t axis,
                         const std::function<double(double)>& theta,
                         double x,
                         std::span<const double> kinks)
{
  const double lambda = fam.rate(axis);
  const double lo = x - 30.0 / lambda;
  const double hi = x + 30.0 / lambda;
  std::vector<double> cuts{ lo, x, hi };
  for (double k : kinks)
    if (k > lo && k < hi)
      cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  const auto integrand = [&](double t) { return marginal_psi(fam, axis, x - t) * theta(t); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i])
      total += quad::adaptive_simpson(integrand, cuts[i], cuts[i + 1], 1e-13, 50);
  return total;
}

double convolve_truth(SignalModel model, const ConvolutionFamily& fam, std::size_t axis, double x)
{
  // theta_1 of sig2 and sig3 has a kink at the origin
  static constexpr double origin[] = { 0.0 };
  const std::span<const double> kinks =
    axis == 0 && model != SignalModel::sig1 ? std::span<const double>(origin) : std::span<const double>();
  return convolve_with_psi(
    fam, axis, [model, axis](double t) { return signal_component(model, axis, t); }, x, kinks);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index)
{
  return splitmix64(splitmix64(splitmix64(master) ^ stream) + index);
}

void SimulationConfig::validate() const
{
  if (n < 10)
    throw std::invalid_argument("simulation sample size must be at least 10");
  if (replicates < 1)
    throw std::invalid_argument("simulation needs at least one replicate");
  if (noise_variance < 0.0)
    throw std::invalid_argument("noise variance must be non-negative");
  if (!(truncation > 0.0))
    throw std::invalid_argument("truncation value a_N must be positive");
  if (!(decay_rate > 0.0))
    throw std::invalid_argument("operator decay rate must be positive");
  if (!(window_upper > window_lower) || window_points < 2)
    throw std::invalid_argument("evaluation window must be a non-empty interval with at least two points");
  if (bandwidth_mode == BandwidthMode::fixed) {
    if (!fixed)
      throw std::invalid_argument("fixed bandwidth mode needs explicit bandwidths");
    if (fixed->density.size() != 2 || fixed->inversion.size() != 2 || !(fixed->backfit > 0.0))
      throw std::invalid_argument("fixed bandwidths need two density, one backfit and two inversion values");
  } else {
    if (grids.density_factors.empty() || grids.backfit.empty() || grids.inversion.empty())
      throw std::invalid_argument("bandwidth search grids must be non-empty");
    if (pilot_replicates < 1)
      throw std::invalid_argument("bandwidth search needs at least one pilot replicate");
  }
}

std::vector<double> SimulationConfig::window() const
{
  return quad::linspace(window_lower, window_upper, window_points);
}

ConvolutionFamily simulation_family(const SimulationConfig& config)
{
  return ConvolutionFamily::laplace({ config.decay_rate, config.decay_rate });
}

Dataset generate_replicate(const SimulationConfig& config, const ConvolutionFamily& fam, std::size_t index)
{
  const std::uint64_t seed = substream_seed(config.seed, kDataStream, index);
  Dataset data;
  data.x = sample_design(config.design, config.n, config.truncation, seed);
  // noise comes from a second engine on the same substream so that the
  // design does not depend on the noise level
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> noise(0.0, std::sqrt(config.noise_variance));
  data.y.resize(data.x.rows());
  for (Eigen::Index k = 0; k < data.x.rows(); ++k) {
    const double eps = config.noise_variance > 0.0 ? noise(rng) : 0.0;
    data.y(k) = convolve_truth(config.model, fam, 0, data.x(k, 0)) + convolve_truth(config.model, fam, 1, data.x(k, 1)) + eps;
  }
  return data;
}

double imse(std::span<const double> grid, std::span<const double> estimate, std::span<const double> truth)
{
  if (grid.size() != estimate.size() || grid.size() != truth.size())
    throw std::invalid_argument("imse: estimate and truth live on different grids");
  std::vector<double> sq(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    sq[i] = (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
  return quad::trapezoid(grid, sq);
}

LevelAnchor oracle_anchor(const SimulationConfig& config, const ConvolutionFamily& fam)
{
  const DesignMarginal m = design_marginal(config.design, config.truncation);
  LevelAnchor anchor;
  anchor.intercept = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    const auto integrand = [&](double x) { return convolve_truth(config.model, fam, j, x) * m.density(x); };
    anchor.levels.push_back(quad::adaptive_simpson(integrand, m.lower, m.upper, 1e-10, 40));
  }
  return anchor;
}

namespace {

struct Truth
{
  std::vector<double> window;
  std::vector<std::vector<double>> theta; // target of each component estimate
  std::vector<std::vector<double>> g_centered;
  LevelAnchor anchor;
};

Truth make_truth(const SimulationConfig& config, const ConvolutionFamily& fam)
{
  Truth t;
  t.window = config.window();
  t.anchor = oracle_anchor(config, fam);
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> theta, g;
    const double shift = config.anchor_levels ? 0.0 : t.anchor.levels[j];
    for (double x : t.window) {
      theta.push_back(signal_component(config.model, j, x) - shift);
      g.push_back(convolve_truth(config.model, fam, j, x) - t.anchor.levels[j]);
    }
    t.theta.push_back(std::move(theta));
    t.g_centered.push_back(std::move(g));
  }
  return t;
}

BackfitConfig backfit_config(const SimulationConfig& config, double bandwidth)
{
  BackfitConfig bc;
  bc.bandwidth = bandwidth;
  bc.max_iterations = config.backfit_max_iterations;
  bc.tolerance = config.backfit_tolerance;
  bc.grid = unit_grid(config.backfit_grid_points);
  return bc;
}

double design_sd(const SimulationConfig& config)
{
  return config.design == Design::uniform ? (2.0 / config.truncation) / std::sqrt(12.0) : 1.0;
}

std::size_t argmin(const std::vector<double>& v)
{
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stage 1: density bandwidth per axis.
std::vector<double> search_density(const SimulationConfig& config,
                                   const std::vector<Dataset>& pilots,
                                   const std::vector<double>& candidates,
                                   bool oracle)
{
  const DesignMarginal m = design_marginal(config.design, config.truncation);
  const double lo = config.design == Design::uniform ? m.lower - 1.0 : -5.0;
  const double hi = config.design == Design::uniform ? m.upper + 1.0 : 5.0;
  const auto xs = quad::linspace(lo, hi, 801);
  const auto w = quad::trapezoid_weights(xs);
  std::vector<double> chosen;
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> score(candidates.size(), 0.0);
    for (const auto& data : pilots) {
      const auto col = data.x.col(static_cast<Eigen::Index>(j));
      const std::span<const double> sample(col.data(), data.size());
      const double n = static_cast<double>(sample.size());
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const double h = candidates[c];
        double crit = 0.0;
        if (oracle) {
          for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = kde_marginal(sample, h, xs[i]) - m.density(xs[i]);
            crit += w[i] * e * e;
          }
        } else {
          // least-squares cross validation
          double sq = 0.0;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            const double f = kde_marginal(sample, h, xs[i]);
            sq += w[i] * f * f;
          }
          const SmoothingKernel kernel{};
          double loo = 0.0;
          for (std::size_t k = 0; k < sample.size(); ++k) {
            double s = 0.0;
            for (std::size_t l = 0; l < sample.size(); ++l)
              if (l != k)
                s += eval_smoothing(kernel, (sample[l] - sample[k]) / h);
            loo += s / ((n - 1.0) * h);
          }
          crit = sq - 2.0 * loo / n;
        }
        score[c] += crit;
      }
    }
    chosen.push_back(candidates[argmin(score)]);
  }
  return chosen;
}

// Stage 2: backfitting bandwidth.
double search_backfit(const SimulationConfig& config,
                      const std::vector<Dataset>& pilots,
                      const Truth& truth,
                      bool oracle)
{
  std::vector<double> score(config.grids.backfit.size(), 0.0);
  for (std::size_t c = 0; c < config.grids.backfit.size(); ++c) {
    const double hb = config.grids.backfit[c];
    for (const auto& data : pilots) {
      try {
        const BackfitStage stage = run_backfit(data, backfit_config(config, hb));
        if (oracle) {
          for (std::size_t j = 0; j < 2; ++j) {
            std::vector<double> est;
            for (double x : truth.window)
              est.push_back(compose_with_ecdf(stage.backfit, stage.transformed, j, x));
            score[c] += imse(truth.window, est, truth.g_centered[j]);
          }
        } else {
          // generalized cross validation with the smoother leverage
          const auto& z = stage.transformed.z();
          const double n = static_cast<double>(data.size());
          double rss = 0.0, trace = 0.0;
          for (Eigen::Index k = 0; k < z.rows(); ++k) {
            double fitted = stage.backfit.intercept;
            for (std::size_t j = 0; j < 2; ++j)
              fitted += stage.backfit.components[j].at(z(k, static_cast<Eigen::Index>(j)));
            rss += (data.y(k) - fitted) * (data.y(k) - fitted);
          }
          for (std::size_t j = 0; j < 2; ++j)
            for (Eigen::Index k = 0; k < z.rows(); ++k) {
              const double v = z(k, static_cast<Eigen::Index>(j));
              trace += unit_kernel(v, v, hb) / (n * kde_unit_marginal(stage.transformed, j, hb, v));
            }
          const double denom = 1.0 - trace / n;
          score[c] += denom > 0.0 ? rss / n / (denom * denom) : kInf;
        }
      } catch (const PipelineError&) {
        score[c] = kInf;
      }
    }
  }
  if (std::all_of(score.begin(), score.end(), [](double s) { return !std::isfinite(s); }))
    throw PipelineError("bandwidth search: backfitting failed for every candidate h_B");
  return config.grids.backfit[argmin(score)];
}

// Leave-one-out prediction of U_k by the smoothed regression estimate
// g^{(h)}(x) = (1 / 2 pi N h) sum_m kappa((x - X_m) / h) U_m W_m, where
// kappa(t) = int Phi_K(u) e^{-iut} du.
double loo_inversion_score(const ComponentInput& in, const DeconvKernel& kernel, double h)
{
  const auto nodes = quad::linspace(0.0, 1.0, 513);
  auto weights = quad::simpson_weights(0.0, 1.0, 512);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    weights[i] *= 2.0 * fourier_K(kernel, nodes[i]);
  const auto [lo, hi] = std::minmax_element(in.sample.begin(), in.sample.end());
  const double tmax = (*hi - *lo) / h + 1.0;
  const double dt = 0.01;
  const auto count = static_cast<std::size_t>(std::ceil(tmax / dt)) + 2;
  std::vector<double> table(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = dt * static_cast<double>(i);
    double s = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q)
      s += weights[q] * std::cos(nodes[q] * t);
    table[i] = s;
  }
  const auto kappa = [&](double t) {
    const double a = std::abs(t) / dt;
    const auto i = static_cast<std::size_t>(a);
    const double f = a - static_cast<double>(i);
    return table[i] + f * (table[i + 1] - table[i]);
  };
  const std::size_t n = in.sample.size();
  const double norm = 2.0 * std::numbers::pi * static_cast<double>(n - 1) * h;
  double score = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      if (m != k)
        s += kappa((in.sample[k] - in.sample[m]) / h) * in.residual[m] * in.weight[m];
    const double e = in.residual[k] - s / norm;
    score += e * e;
  }
  return score / static_cast<double>(n);
}

// Stage 3: inversion bandwidth per component.
std::vector<double> search_inversion(const SimulationConfig& config,
                                     const ConvolutionFamily& fam,
                                     const std::vector<Dataset>& pilots,
                                     const Truth& truth,
                                     const std::vector<double>& density_bw,
                                     double backfit_bw,
                                     bool oracle)
{
  const auto& grid = config.grids.inversion;
  std::vector<std::vector<double>> score(2, std::vector<double>(grid.size(), 0.0));
  const LevelAnchor* anchor = (oracle && config.anchor_levels) ? &truth.anchor : nullptr;
  for (const auto& data : pilots) {
    const BackfitStage stage = run_backfit(data, backfit_config(config, backfit_bw));
    for (std::size_t j = 0; j < 2; ++j) {
      const ComponentInput in = component_input(data, stage, j, density_bw[j], config.truncation, anchor);
      for (std::size_t c = 0; c < grid.size(); ++c) {
        if (oracle) {
          const DeconvConfig dc{ grid[c], config.truncation, DeconvKernel{}, config.fourier_panels };
          std::vector<double> est;
          for (const auto& v : estimate_component(in, fam, dc, truth.window))
            est.push_back(v.value);
          score[j][c] += imse(truth.window, est, truth.theta[j]);
        } else {
          score[j][c] += loo_inversion_score(in, DeconvKernel{}, grid[c]);
        }
      }
    }
  }
  return { grid[argmin(score[0])], grid[argmin(score[1])] };
}

} // namespace

Bandwidths bandwidth_search(const SimulationConfig& config, const ConvolutionFamily& fam)
{
  config.validate();
  if (config.bandwidth_mode == BandwidthMode::fixed)
    return *config.fixed;
  const bool oracle = config.bandwidth_mode == BandwidthMode::oracle;
  const Truth truth = make_truth(config, fam);

  std::vector<Dataset> pilots;
  for (std::size_t r = 0; r < config.pilot_replicates; ++r) {
    SimulationConfig pilot = config;
    pilot.seed = substream_seed(config.seed, kPilotStream, r);
    pilots.push_back(generate_replicate(pilot, fam, 0));
  }

  const double rule = 1.06 * design_sd(config) * std::pow(static_cast<double>(config.n), -0.2);
  std::vector<double> density_candidates;
  for (double f : config.grids.density_factors)
    density_candidates.push_back(f * rule);

  Bandwidths out;
  out.density = search_density(config, pilots, density_candidates, oracle);
  out.backfit = search_backfit(config, pilots, truth, oracle);
  out.inversion = search_inversion(config, fam, pilots, truth, out.density, out.backfit, oracle);
  return out;
}

ReplicateCurves fit_replicate(const SimulationConfig& config,
                              const ConvolutionFamily& fam,
                              const Bandwidths& bandwidths,
                              const Dataset& data,
                              const LevelAnchor& anchor)
{
  FitConfig fc;
  fc.backfit = backfit_config(config, bandwidths.backfit);
  fc.truncation = config.truncation;
  fc.fourier_panels = config.fourier_panels;
  fc.density_bandwidths = bandwidths.density;
  fc.inversion_bandwidths = bandwidths.inversion;
  const auto window = config.window();
  fc.eval_grids = { window, window };
  fc.compute_variance = false;
  const FitResult fit = fit_additive(data, fam, fc, config.anchor_levels ? &anchor : nullptr);
  if (!fit.stage.backfit.converged)
    throw PipelineError("backfitting did not converge within " + std::to_string(config.backfit_max_iterations) +
                        " sweeps");
  ReplicateCurves curves;
  for (const auto& c : fit.components)
    curves.components.push_back(c.values);
  return curves;
}

double sample_quantile(std::vector<double> values, double p)
{
  if (values.empty())
    throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SimulationReport run_study(const SimulationConfig& config, const ConvolutionFamily& fam)
{
  return run_study(config, fam, bandwidth_search(config, fam));
}

SimulationReport run_study(const SimulationConfig& config, const ConvolutionFamily& fam, const Bandwidths& bandwidths)
{
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const Truth truth = make_truth(config, fam);

  const std::size_t r_total = config.replicates;
  std::vector<std::optional<ReplicateCurves>> results(r_total);
  std::vector<std::string> errors(r_total);
  std::atomic<std::size_t> next{ 0 };
  const auto worker = [&] {
    for (std::size_t r = next++; r < r_total; r = next++) {
      try {
        const Dataset data = generate_replicate(config, fam, r);
        results[r] = fit_replicate(config, fam, bandwidths, data, truth.anchor);
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    }
  };
  std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, r_total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }

  SimulationReport report;
  report.config = config;
  report.bandwidths = bandwidths;
  std::vector<std::size_t> ok;
  for (std::size_t r = 0; r < r_total; ++r) {
    if (results[r])
      ok.push_back(r);
    else
      report.failures.push_back({ r, errors[r] });
  }
  report.succeeded = ok.size();

  for (std::size_t j = 0; j < 2; ++j) {
    ComponentSummary s;
    s.grid = truth.window;
    s.truth = truth.theta[j];
    const std::size_t g = s.grid.size();
    s.mean.assign(g, 0.0);
    s.q05.assign(g, 0.0);
    s.q95.assign(g, 0.0);
    if (!ok.empty()) {
      for (std::size_t r : ok) {
        const auto& curve = results[r]->components[j];
        s.replicate_imse.push_back(imse(s.grid, curve, s.truth));
        for (std::size_t i = 0; i < g; ++i)
          s.mean[i] += curve[i];
      }
      for (auto& m : s.mean)
        m /= static_cast<double>(ok.size());
      std::vector<double> column(ok.size());
      for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t q = 0; q < ok.size(); ++q)
          column[q] = results[ok[q]]->components[j][i];
        s.q05[i] = sample_quantile(column, 0.05);
        s.q95[i] = sample_quantile(column, 0.95);
      }
      double total = 0.0;
      for (double v : s.replicate_imse)
        total += v;
      s.imse = total / static_cast<double>(s.replicate_imse.size());
    }
    report.components.push_back(std::move(s));
  }
  report.runtime_seconds =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

} // namespace addinv
