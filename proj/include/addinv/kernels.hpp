#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace addinv {

enum class SmoothingKind
{
  epanechnikov
};

//! Compactly supported smoothing kernel on [-1, 1]. Used both for the
//! backfitting smoother and for the marginal density estimates.
struct SmoothingKernel
{
  SmoothingKind kind = SmoothingKind::epanechnikov;
};

double eval_smoothing(const SmoothingKernel& kernel, double u);

//! Distribution function of the kernel, i.e. the integral of the kernel
//! over [-1, u].
double smoothing_cdf(const SmoothingKernel& kernel, double u);

//! Deconvolution kernel, represented only through its Fourier transform.
//! The transform equals one on [-b, b], vanishes outside [-1, 1] and decays
//! with a raised-cosine taper in between. b = 1 gives the indicator of
//! [-1, 1].
class DeconvKernel
{
public:
  explicit DeconvKernel(double flat_radius = 1.0);

  double flat_radius() const { return flat_radius_; }

private:
  double flat_radius_;
};

double fourier_K(const DeconvKernel& kernel, double w);

enum class OperatorFamily
{
  laplace_product
};

//! Product convolution operator psi(t) = prod_j psi_j(t_j). Only the Laplace
//! product psi_j(t) = (lambda_j / 2) exp(-lambda_j |t|) is implemented.
class ConvolutionFamily
{
public:
  static ConvolutionFamily laplace(std::vector<double> rates);

  OperatorFamily family() const { return family_; }
  std::size_t dimension() const { return rates_.size(); }
  double rate(std::size_t axis) const;
  //! Polynomial decay order of 1 / Phi_{psi_j}.
  double ill_posedness(std::size_t axis) const;

  //! Full d-dimensional operator density.
  double density(std::span<const double> t) const;

private:
  ConvolutionFamily(OperatorFamily family, std::vector<double> rates, std::vector<double> orders);

  void check_axis(std::size_t axis) const;

  OperatorFamily family_;
  std::vector<double> rates_;
  std::vector<double> orders_;
};

//! Marginal psi_j(t) of the operator along `axis` (zero-based).
double marginal_psi(const ConvolutionFamily& fam, std::size_t axis, double t);

//! Fourier transform of the marginal, Phi_{psi_j}(w) = int psi_j(x) e^{iwx} dx.
//! Real and even for the Laplace family.
double fourier_psi(const ConvolutionFamily& fam, std::size_t axis, double w);

//! Composite Simpson evaluation of
//!   int_{-1}^{1} |Phi_K(w)|^p / |Phi_{psi_j}(w / h)|^p dw ,  p in {1, 2}.
double ratio_integral(const ConvolutionFamily& fam,
                      std::size_t axis,
                      const DeconvKernel& kernel,
                      double h,
                      int power,
                      std::size_t panels = 2048);

} // namespace addinv
