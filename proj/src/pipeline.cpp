#include "addinv/pipeline.hpp"

#include "addinv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace addinv {

void FitConfig::validate(std::size_t dimension) const
{
  backfit.validate();
  if (!(truncation > 0.0))
    throw std::invalid_argument("truncation value a_N must be positive");
  auto check_list = [&](const std::vector<double>& v, const char* what, bool allow_empty) {
    if (v.empty() && allow_empty)
      return;
    if (v.size() != 1 && v.size() != dimension)
      throw std::invalid_argument(std::string(what) + ": need one value or one per axis");
    for (double h : v)
      if (!(h > 0.0))
        throw std::invalid_argument(std::string(what) + " must be positive");
  };
  check_list(density_bandwidths, "density bandwidths", true);
  check_list(inversion_bandwidths, "inversion bandwidths", false);
  if (!eval_grids.empty() && eval_grids.size() != dimension)
    throw std::invalid_argument("evaluation grids: need one grid per axis");
  for (const auto& g : eval_grids)
    if (g.size() < 2 || !std::is_sorted(g.begin(), g.end()))
      throw std::invalid_argument("evaluation grids must be increasing with at least two points");
  if (grid_points < 2)
    throw std::invalid_argument("evaluation grid needs at least two points");
  if (!(band_alpha > 0.0 && band_alpha < 1.0))
    throw std::invalid_argument("band level alpha must lie in (0, 1)");
  if (fourier_panels < 2 || fourier_panels % 2 != 0)
    throw std::invalid_argument("frequency quadrature needs an even panel count");
}

double FitConfig::inversion_bandwidth(std::size_t axis) const
{
  return inversion_bandwidths.size() == 1 ? inversion_bandwidths.front() : inversion_bandwidths.at(axis);
}

DeconvConfig FitConfig::deconv(std::size_t axis) const
{
  return DeconvConfig{ inversion_bandwidth(axis), truncation, kernel, fourier_panels };
}

BackfitStage run_backfit(const Dataset& data, const BackfitConfig& config)
{
  BackfitStage stage;
  stage.transformed = ecdf_transform(data);
  stage.backfit = backfit(stage.transformed, data.y, config);
  return stage;
}

DesignMarginal kde_design(std::span<const double> sample, double bandwidth)
{
  auto copy = std::make_shared<std::vector<double>>(sample.begin(), sample.end());
  const auto [lo, hi] = std::minmax_element(copy->begin(), copy->end());
  DesignMarginal design;
  design.lower = *lo - bandwidth;
  design.upper = *hi + bandwidth;
  design.density = [copy, bandwidth](double x) { return kde_marginal(*copy, bandwidth, x); };
  return design;
}

ComponentInput component_input(const Dataset& data,
                               const BackfitStage& stage,
                               std::size_t axis,
                               double density_bandwidth,
                               double truncation,
                               const LevelAnchor* anchor,
                               const DesignMarginal* known)
{
  ComponentInput in;
  in.axis = axis;
  const auto col = data.x.col(static_cast<Eigen::Index>(axis));
  in.sample.assign(col.begin(), col.end());
  const Eigen::VectorXd u = anchor ? residuals(data, stage.transformed, stage.backfit, axis, *anchor)
                                   : residuals(data, stage.transformed, stage.backfit, axis);
  in.residual.assign(u.begin(), u.end());
  in.density_bandwidth = density_bandwidth;
  in.design = known ? *known : kde_design(in.sample, density_bandwidth);
  const Eigen::VectorXd w = density_weights(in.sample, in.design.density, truncation);
  in.weight.assign(w.begin(), w.end());
  return in;
}

std::vector<InversionValue> estimate_component(const ComponentInput& input,
                                               const ConvolutionFamily& fam,
                                               const DeconvConfig& config,
                                               std::span<const double> grid)
{
  const InversionKernel kernel(fam, input.axis, config);
  return invert_on_grid(input.sample, input.residual, input.weight, kernel, grid);
}

FitResult fit_additive(const Dataset& data,
                       const ConvolutionFamily& fam,
                       const FitConfig& config,
                       const LevelAnchor* anchor,
                       std::span<const DesignMarginal> known)
{
  validate(data);
  const auto d = data.dimension();
  config.validate(d);
  if (fam.dimension() != d)
    throw std::invalid_argument("operator dimension differs from the number of predictors");
  if (!known.empty() && known.size() != d)
    throw std::invalid_argument("known design marginals: need one per axis");

  FitResult out;
  out.stage = run_backfit(data, config.backfit);
  out.intercept = anchor ? anchor->intercept : out.stage.backfit.intercept;

  for (std::size_t j = 0; j < d; ++j) {
    const auto col = data.x.col(static_cast<Eigen::Index>(j));
    const std::span<const double> sample(col.data(), data.size());
    double hd;
    if (config.density_bandwidths.empty())
      hd = normal_reference_bandwidth(sample);
    else
      hd = config.density_bandwidths.size() == 1 ? config.density_bandwidths.front() : config.density_bandwidths[j];
    out.density_bandwidths.push_back(hd);

    const ComponentInput input =
      component_input(data, out.stage, j, hd, config.truncation, anchor, known.empty() ? nullptr : &known[j]);

    ComponentEstimate est;
    est.axis = j;
    if (config.eval_grids.empty()) {
      const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
      est.grid = quad::linspace(*lo, *hi, config.grid_points);
    } else {
      est.grid = config.eval_grids[j];
    }
    const DeconvConfig dc = config.deconv(j);
    const InversionKernel kernel(fam, j, dc);
    for (const auto& v : invert_on_grid(input.sample, input.residual, input.weight, kernel, est.grid)) {
      est.values.push_back(v.value);
      est.imag_residue.push_back(v.imag);
    }

    // plug-in g_j on the original scale and noise variance from the residuals
    const double level = anchor ? anchor->levels.at(j) : 0.0;
    const auto& fit = out.stage.backfit;
    const auto& z = out.stage.transformed;
    double ss = 0.0;
    for (std::size_t k = 0; k < input.sample.size(); ++k) {
      const double e = input.residual[k] - compose_with_ecdf(fit, z, j, input.sample[k]) - level;
      ss += e * e;
    }
    const double sigma2 = ss / static_cast<double>(input.sample.size());
    out.noise_variance.push_back(sigma2);

    if (config.compute_variance) {
      const DensityFn g = [&fit, &z, j, level](double x) { return compose_with_ecdf(fit, z, j, x) + level; };
      for (double x : est.grid)
        est.variance.push_back(variance_Vnj(data.size(), input.design, kernel, g, sigma2, x, config.variance_panels));
      const Band band = confidence_band(est.values, est.variance, config.band_alpha);
      est.band_lower = band.lower;
      est.band_upper = band.upper;
    }
    out.components.push_back(std::move(est));
  }
  return out;
}

} // namespace addinv
