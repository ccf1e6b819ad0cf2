#pragma once

#include "addinv/backfitting.hpp"
#include "addinv/empirical.hpp"
#include "addinv/kernels.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace addinv {

using DensityFn = std::function<double(double)>;
using JointDensityFn = std::function<double(double, double)>;

struct DeconvConfig
{
  //! Inversion bandwidth h.
  double bandwidth = 0.3;
  //! Truncation value a_N; the density floor is f_j(1 / a_N).
  double truncation = 0.5;
  DeconvKernel kernel{};
  //! Simpson panels for the frequency integral over [-1, 1].
  std::size_t panels = 2048;

  void validate() const;
};

//! Additive level anchoring for the residuals. By default the residuals use
//! the centered backfitting components and the sample mean as intercept, so
//! each deconvolved component carries an unidentified constant. When the
//! levels of the components and the intercept are known (simulation), the
//! anchored residuals target the uncentered components directly.
struct LevelAnchor
{
  double intercept = 0.0;
  std::vector<double> levels;
};

//! U_{k,j} = Y_k - sum_{i != j} g_i(X_{k,i}) - g_0.
Eigen::VectorXd residuals(const Dataset& data,
                          const TransformedDataset& z,
                          const BackfitResult& fit,
                          std::size_t axis);

Eigen::VectorXd residuals(const Dataset& data,
                          const TransformedDataset& z,
                          const BackfitResult& fit,
                          std::size_t axis,
                          const LevelAnchor& anchor);

//! 1 / max(f, f_edge).
double truncated_density_weight(double f_value, double f_edge);

//! Truncated inverse-density weights for a sample column.
Eigen::VectorXd density_weights(std::span<const double> sample, const DensityFn& density, double truncation);

//! (1/N) sum_k e^{i w X_k} U_k W_k.
std::complex<double> empirical_fourier_g(std::span<const double> sample,
                                         std::span<const double> residual,
                                         std::span<const double> weight,
                                         double w);

//! Quadrature of the regularized inverse operator in the substituted
//! frequency u in [-1, 1]: nodes u_i, and combined weights s_i * m(u_i) with
//! m(u) = Phi_K(u) / Phi_{psi_j}(u / h).
class InversionKernel
{
public:
  InversionKernel(const ConvolutionFamily& fam, std::size_t axis, const DeconvConfig& config);

  double bandwidth() const { return bandwidth_; }
  double truncation() const { return truncation_; }
  std::size_t axis() const { return axis_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  //! k(t) = int e^{-iut} Phi_K(u) / Phi_{psi_j}(u / h) du (real by symmetry).
  double kernel(double t) const;

private:
  std::size_t axis_;
  double bandwidth_;
  double truncation_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct InversionValue
{
  double value = 0.0;
  //! Imaginary part of the inversion integral (zero in exact arithmetic).
  double imag = 0.0;
  //! Sum of absolute contributions; reference magnitude for `imag`.
  double scale = 0.0;
};

//! Smoothed Fourier inversion
//!   theta_j(x) = (1 / 2 pi) int e^{-iwx} Phi_K(hw) Phi_g(w) / Phi_psi(w) dw
//! evaluated through the substitution w = u / h.
InversionValue invert_component(std::span<const double> sample,
                                std::span<const double> residual,
                                std::span<const double> weight,
                                const InversionKernel& kernel,
                                double x);

//! Same as invert_component for many points, sharing the empirical transform.
std::vector<InversionValue> invert_on_grid(std::span<const double> sample,
                                           std::span<const double> residual,
                                           std::span<const double> weight,
                                           const InversionKernel& kernel,
                                           std::span<const double> xs);

//! w_{j,N}(x, X_k) so that invert_component(x) = sum_k w_k U_k.
Eigen::VectorXd linear_weights(std::span<const double> sample,
                               std::span<const double> weight,
                               const InversionKernel& kernel,
                               double x);

//! A design marginal with the interval that carries its mass.
struct DesignMarginal
{
  DensityFn density;
  double lower = 0.0;
  double upper = 0.0;
};

//! Variance normalizer V_{N,j}(x) by Simpson quadrature over the design
//! support.
double variance_Vnj(std::size_t n,
                    const DesignMarginal& design,
                    const InversionKernel& kernel,
                    const DensityFn& g,
                    double noise_variance,
                    double x,
                    std::size_t panels = 2000);

//! Cross term V_{N,k,l}(x) for k != l by tensor Simpson quadrature.
double variance_cross(std::size_t n,
                      const DesignMarginal& design_k,
                      const DesignMarginal& design_l,
                      const JointDensityFn& joint,
                      const InversionKernel& kernel_k,
                      const InversionKernel& kernel_l,
                      const DensityFn& g_k,
                      const DensityFn& g_l,
                      double noise_variance,
                      double x_k,
                      double x_l,
                      std::size_t panels = 400);

struct Band
{
  std::vector<double> lower;
  std::vector<double> upper;
};

//! estimate -/+ z_{1 - alpha/2} sqrt(V).
Band confidence_band(std::span<const double> estimate, std::span<const double> variance, double alpha);

//! One deconvolved component tabulated on the original scale.
struct ComponentEstimate
{
  std::size_t axis = 0;
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> imag_residue;
  //! Empty unless variances were requested.
  std::vector<double> variance;
  std::vector<double> band_lower;
  std::vector<double> band_upper;

  double at(double x) const;
};

//! theta(x) = intercept + sum_j theta_j(x_j).
double assemble_additive(std::span<const ComponentEstimate> components, double intercept, std::span<const double> x);

} // namespace addinv
