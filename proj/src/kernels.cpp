#include "addinv/kernels.hpp"

#include "addinv/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace addinv {

double eval_smoothing(const SmoothingKernel& kernel, double u)
{
  switch (kernel.kind) {
    case SmoothingKind::epanechnikov:
      return std::abs(u) >= 1.0 ? 0.0 : 0.75 * (1.0 - u * u);
  }
  return 0.0;
}

double smoothing_cdf(const SmoothingKernel& kernel, double u)
{
  switch (kernel.kind) {
    case SmoothingKind::epanechnikov: {
      if (u <= -1.0)
        return 0.0;
      if (u >= 1.0)
        return 1.0;
      return 0.5 + 0.75 * (u - u * u * u / 3.0);
    }
  }
  return 0.0;
}

DeconvKernel::DeconvKernel(double flat_radius)
  : flat_radius_(flat_radius)
{
  if (!(flat_radius > 0.0 && flat_radius <= 1.0))
    throw std::invalid_argument("deconvolution kernel flat radius must lie in (0, 1]");
}

double fourier_K(const DeconvKernel& kernel, double w)
{
  const double a = std::abs(w);
  const double b = kernel.flat_radius();
  if (a <= b)
    return 1.0;
  if (a > 1.0)
    return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (a - b) / (1.0 - b)));
}

ConvolutionFamily::ConvolutionFamily(OperatorFamily family,
                                     std::vector<double> rates,
                                     std::vector<double> orders)
  : family_(family)
  , rates_(std::move(rates))
  , orders_(std::move(orders))
{}

ConvolutionFamily ConvolutionFamily::laplace(std::vector<double> rates)
{
  if (rates.empty())
    throw std::invalid_argument("convolution family needs at least one axis");
  for (double r : rates)
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument("Laplace decay rates must be positive and finite");
  std::vector<double> orders(rates.size(), 2.0);
  return ConvolutionFamily(OperatorFamily::laplace_product, std::move(rates), std::move(orders));
}

void ConvolutionFamily::check_axis(std::size_t axis) const
{
  if (axis >= rates_.size())
    throw std::out_of_range("axis " + std::to_string(axis) + " outside operator dimension " +
                            std::to_string(rates_.size()));
}

double ConvolutionFamily::rate(std::size_t axis) const
{
  check_axis(axis);
  return rates_[axis];
}

double ConvolutionFamily::ill_posedness(std::size_t axis) const
{
  check_axis(axis);
  return orders_[axis];
}

double ConvolutionFamily::density(std::span<const double> t) const
{
  if (t.size() != rates_.size())
    throw std::invalid_argument("operator density: point dimension mismatch");
  double value = 1.0;
  for (std::size_t j = 0; j < t.size(); ++j)
    value *= marginal_psi(*this, j, t[j]);
  return value;
}

double marginal_psi(const ConvolutionFamily& fam, std::size_t axis, double t)
{
  const double lambda = fam.rate(axis);
  return 0.5 * lambda * std::exp(-lambda * std::abs(t));
}

double fourier_psi(const ConvolutionFamily& fam, std::size_t axis, double w)
{
  const double lambda = fam.rate(axis);
  return lambda * lambda / (lambda * lambda + w * w);
}

double ratio_integral(const ConvolutionFamily& fam,
                      std::size_t axis,
                      const DeconvKernel& kernel,
                      double h,
                      int power,
                      std::size_t panels)
{
  if (!(h > 0.0))
    throw std::invalid_argument("ratio_integral: bandwidth must be positive");
  if (power != 1 && power != 2)
    throw std::invalid_argument("ratio_integral: power must be 1 or 2");
  fam.rate(axis); // validates the axis
  return quad::simpson(
    [&](double w) {
      const double r = std::abs(fourier_K(kernel, w)) / std::abs(fourier_psi(fam, axis, w / h));
      return power == 1 ? r : r * r;
    },
    -1.0,
    1.0,
    panels);
}

} // namespace addinv
