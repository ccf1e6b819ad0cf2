#pragma once

#include "addinv/backfitting.hpp"
#include "addinv/deconvolution.hpp"
#include "addinv/empirical.hpp"
#include "addinv/kernels.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace addinv {

//! Settings for the complete estimator: unit-cube transform, backfitting,
//! residuals, density weights and Fourier inversion per component.
struct FitConfig
{
  BackfitConfig backfit;
  double truncation = 0.5;
  DeconvKernel kernel{};
  std::size_t fourier_panels = 2048;
  //! h_{d,j} per axis (one value is broadcast); empty selects the normal
  //! reference rule per column.
  std::vector<double> density_bandwidths;
  //! h per axis (one value is broadcast).
  std::vector<double> inversion_bandwidths{ 0.3 };
  //! Evaluation grid per axis; empty selects `grid_points` points over the
  //! observed range of each column.
  std::vector<std::vector<double>> eval_grids;
  std::size_t grid_points = 101;
  bool compute_variance = true;
  double band_alpha = 0.1;
  std::size_t variance_panels = 1000;

  void validate(std::size_t dimension) const;
  double inversion_bandwidth(std::size_t axis) const;
  DeconvConfig deconv(std::size_t axis) const;
};

//! Unit-cube transform plus converged backfitting components.
struct BackfitStage
{
  TransformedDataset transformed;
  BackfitResult backfit;
};

BackfitStage run_backfit(const Dataset& data, const BackfitConfig& config);

//! Data for the inversion of one component: the predictor column, the
//! residuals U_{k,j}, the truncated density weights and the density used.
struct ComponentInput
{
  std::size_t axis = 0;
  std::vector<double> sample;
  std::vector<double> residual;
  std::vector<double> weight;
  DesignMarginal design;
  double density_bandwidth = 0.0;
};

//! Builds the inversion input for `axis`. Without `known` the design density
//! is the kernel estimate with bandwidth `density_bandwidth`.
ComponentInput component_input(const Dataset& data,
                               const BackfitStage& stage,
                               std::size_t axis,
                               double density_bandwidth,
                               double truncation,
                               const LevelAnchor* anchor = nullptr,
                               const DesignMarginal* known = nullptr);

//! Kernel density estimate as a DesignMarginal (support widened by h).
DesignMarginal kde_design(std::span<const double> sample, double bandwidth);

std::vector<InversionValue> estimate_component(const ComponentInput& input,
                                               const ConvolutionFamily& fam,
                                               const DeconvConfig& config,
                                               std::span<const double> grid);

struct FitResult
{
  BackfitStage stage;
  double intercept = 0.0;
  std::vector<double> density_bandwidths;
  std::vector<double> noise_variance;
  std::vector<ComponentEstimate> components;
};

FitResult fit_additive(const Dataset& data,
                       const ConvolutionFamily& fam,
                       const FitConfig& config,
                       const LevelAnchor* anchor = nullptr,
                       std::span<const DesignMarginal> known = {});

} // namespace addinv
