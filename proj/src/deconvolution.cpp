#include "addinv/deconvolution.hpp"

#include "addinv/errors.hpp"
#include "addinv/quadrature.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace addinv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what)
{
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(what) + ": length mismatch");
}

} // namespace

void DeconvConfig::validate() const
{
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("inversion bandwidth must be positive");
  if (!(truncation > 0.0))
    throw std::invalid_argument("truncation value a_N must be positive");
  if (panels < 2 || panels % 2 != 0)
    throw std::invalid_argument("frequency quadrature needs an even panel count");
}

Eigen::VectorXd residuals(const Dataset& data,
                          const TransformedDataset& z,
                          const BackfitResult& fit,
                          std::size_t axis)
{
  LevelAnchor anchor;
  anchor.intercept = fit.intercept;
  anchor.levels.assign(fit.components.size(), 0.0);
  return residuals(data, z, fit, axis, anchor);
}

Eigen::VectorXd residuals(const Dataset& data,
                          const TransformedDataset& z,
                          const BackfitResult& fit,
                          std::size_t axis,
                          const LevelAnchor& anchor)
{
  const auto d = data.dimension();
  if (fit.components.size() != d || anchor.levels.size() != d)
    throw std::invalid_argument("residuals: dimension mismatch");
  if (axis >= d)
    throw std::out_of_range("residuals: axis outside dimension");
  Eigen::VectorXd u = data.y.array() - anchor.intercept;
  for (std::size_t i = 0; i < d; ++i) {
    if (i == axis)
      continue;
    const auto col = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < u.size(); ++k)
      u(k) -= compose_with_ecdf(fit, z, i, data.x(k, col)) + anchor.levels[i];
  }
  return u;
}

double truncated_density_weight(double f_value, double f_edge)
{
  if (!(f_edge > 0.0) && !(f_value > 0.0))
    throw std::invalid_argument("truncated_density_weight: density and floor are both non-positive");
  return 1.0 / std::max(f_value, f_edge);
}

Eigen::VectorXd density_weights(std::span<const double> sample, const DensityFn& density, double truncation)
{
  if (!(truncation > 0.0))
    throw std::invalid_argument("truncation value a_N must be positive");
  const double edge = density(1.0 / truncation);
  Eigen::VectorXd w(static_cast<Eigen::Index>(sample.size()));
  for (std::size_t k = 0; k < sample.size(); ++k)
    w(static_cast<Eigen::Index>(k)) = truncated_density_weight(density(sample[k]), edge);
  return w;
}

std::complex<double> empirical_fourier_g(std::span<const double> sample,
                                         std::span<const double> residual,
                                         std::span<const double> weight,
                                         double w)
{
  require_same_length(sample, residual, "empirical_fourier_g");
  require_same_length(sample, weight, "empirical_fourier_g");
  std::complex<double> sum{ 0.0, 0.0 };
  for (std::size_t k = 0; k < sample.size(); ++k)
    sum += std::polar(residual[k] * weight[k], w * sample[k]);
  return sum / static_cast<double>(sample.size());
}

InversionKernel::InversionKernel(const ConvolutionFamily& fam, std::size_t axis, const DeconvConfig& config)
  : axis_(axis)
  , bandwidth_(config.bandwidth)
  , truncation_(config.truncation)
{
  config.validate();
  fam.rate(axis);
  nodes_ = quad::linspace(-1.0, 1.0, config.panels + 1);
  weights_ = quad::simpson_weights(-1.0, 1.0, config.panels);
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    weights_[i] *= fourier_K(config.kernel, nodes_[i]) / fourier_psi(fam, axis, nodes_[i] / bandwidth_);
}

double InversionKernel::kernel(double t) const
{
  // symmetric node pairs contribute 2 cos(u t)
  const std::size_t mid = nodes_.size() / 2;
  double sum = 0.0;
  for (std::size_t i = mid + 1; i < nodes_.size(); ++i)
    sum += weights_[i] * std::cos(nodes_[i] * t);
  return 2.0 * sum + weights_[mid];
}

namespace {

// Empirical transform at the non-negative nodes u_i / h. Nodes are uniform,
// so e^{i u X / h} advances by a fixed rotation per node.
std::vector<std::complex<double>> transform_on_nodes(std::span<const double> sample,
                                                     std::span<const double> residual,
                                                     std::span<const double> weight,
                                                     const InversionKernel& kernel)
{
  require_same_length(sample, residual, "inversion");
  require_same_length(sample, weight, "inversion");
  const auto nodes = kernel.nodes();
  const std::size_t mid = nodes.size() / 2; // index of u = 0
  const std::size_t count = nodes.size() - mid;
  const double h = kernel.bandwidth();
  const double du = nodes[mid + 1] - nodes[mid];
  std::vector<std::complex<double>> phi(count, { 0.0, 0.0 });
  constexpr std::size_t kResync = 64;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double a = residual[k] * weight[k];
    if (a == 0.0)
      continue;
    const std::complex<double> step = std::polar(1.0, du * sample[k] / h);
    std::complex<double> cur{ a, 0.0 };
    for (std::size_t i = 0; i < count; ++i) {
      if (i % kResync == 0)
        cur = std::polar(a, nodes[mid + i] * sample[k] / h);
      phi[i] += cur;
      cur *= step;
    }
  }
  const double n = static_cast<double>(sample.size());
  for (auto& p : phi)
    p /= n;
  return phi;
}

InversionValue invert_at(const std::vector<std::complex<double>>& phi, const InversionKernel& kernel, double x)
{
  const auto nodes = kernel.nodes();
  const auto weights = kernel.weights();
  const std::size_t mid = nodes.size() / 2;
  const double h = kernel.bandwidth();
  // pair u and -u: e^{-iux/h} phi(u) + e^{iux/h} conj(phi(u)) = 2 Re(...)
  double re = weights[mid] * phi[0].real();
  double im = weights[mid] * phi[0].imag();
  double scale = std::abs(weights[mid] * phi[0].real());
  for (std::size_t i = 1; i < phi.size(); ++i) {
    const std::complex<double> term = std::polar(1.0, -nodes[mid + i] * x / h) * phi[i];
    const std::complex<double> mirror = std::polar(1.0, nodes[mid + i] * x / h) * std::conj(phi[i]);
    const double w = weights[mid + i];
    re += w * (term.real() + mirror.real());
    im += w * (term.imag() + mirror.imag());
    scale += std::abs(w) * 2.0 * std::abs(phi[i]);
  }
  const double norm = kTwoPi * h;
  InversionValue out{ re / norm, im / norm, scale / norm };
  if (std::abs(out.imag) > 1e-6 * std::max(out.scale, 1e-300))
    throw QuadratureError("inversion integral has a non-negligible imaginary part at x = " + std::to_string(x));
  return out;
}

} // namespace

InversionValue invert_component(std::span<const double> sample,
                                std::span<const double> residual,
                                std::span<const double> weight,
                                const InversionKernel& kernel,
                                double x)
{
  return invert_at(transform_on_nodes(sample, residual, weight, kernel), kernel, x);
}

std::vector<InversionValue> invert_on_grid(std::span<const double> sample,
                                           std::span<const double> residual,
                                           std::span<const double> weight,
                                           const InversionKernel& kernel,
                                           std::span<const double> xs)
{
  const auto phi = transform_on_nodes(sample, residual, weight, kernel);
  std::vector<InversionValue> out;
  out.reserve(xs.size());
  for (double x : xs)
    out.push_back(invert_at(phi, kernel, x));
  return out;
}

Eigen::VectorXd linear_weights(std::span<const double> sample,
                               std::span<const double> weight,
                               const InversionKernel& kernel,
                               double x)
{
  require_same_length(sample, weight, "linear_weights");
  const double h = kernel.bandwidth();
  const double norm = kTwoPi * static_cast<double>(sample.size()) * h;
  Eigen::VectorXd w(static_cast<Eigen::Index>(sample.size()));
  for (std::size_t k = 0; k < sample.size(); ++k)
    w(static_cast<Eigen::Index>(k)) = kernel.kernel((x - sample[k]) / h) * weight[k] / norm;
  return w;
}

double variance_Vnj(std::size_t n,
                    const DesignMarginal& design,
                    const InversionKernel& kernel,
                    const DensityFn& g,
                    double noise_variance,
                    double x,
                    std::size_t panels)
{
  if (noise_variance < 0.0)
    throw std::invalid_argument("noise variance must be non-negative");
  if (n == 0)
    throw std::invalid_argument("sample size must be positive");
  if (!(design.upper > design.lower))
    throw std::invalid_argument("design support must be a non-empty interval");
  const double h = kernel.bandwidth();
  const double edge = design.density(1.0 / kernel.truncation());
  const double integral = quad::simpson(
    [&](double y) {
      const double f = design.density(y);
      if (f <= 0.0)
        return 0.0;
      const double k = kernel.kernel((x - y) / h);
      const double floor = std::max(f, edge);
      const double gy = g(y);
      return k * k * (gy * gy + noise_variance) * f / (floor * floor);
    },
    design.lower,
    design.upper,
    panels);
  return integral / (static_cast<double>(n) * h * h * kTwoPi * kTwoPi);
}

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
                      std::size_t panels)
{
  if (kernel_k.axis() == kernel_l.axis())
    throw std::invalid_argument("variance_cross needs two distinct axes");
  if (noise_variance < 0.0)
    throw std::invalid_argument("noise variance must be non-negative");
  if (n == 0)
    throw std::invalid_argument("sample size must be positive");
  if (std::abs(kernel_k.bandwidth() - kernel_l.bandwidth()) > 0.0)
    throw std::invalid_argument("variance_cross assumes a common inversion bandwidth");
  const double h = kernel_k.bandwidth();

  struct Axis
  {
    std::vector<double> nodes, weights, kernel, floor, g;
  };
  auto tabulate = [&](const DesignMarginal& design, const InversionKernel& kernel, const DensityFn& g, double x) {
    Axis a;
    a.nodes = quad::linspace(design.lower, design.upper, panels + 1);
    a.weights = quad::simpson_weights(design.lower, design.upper, panels);
    const double edge = design.density(1.0 / kernel.truncation());
    for (double y : a.nodes) {
      a.kernel.push_back(kernel.kernel((x - y) / h));
      a.floor.push_back(std::max(design.density(y), edge));
      a.g.push_back(g(y));
    }
    return a;
  };
  const Axis ak = tabulate(design_k, kernel_k, g_k, x_k);
  const Axis al = tabulate(design_l, kernel_l, g_l, x_l);

  double sum = 0.0;
  for (std::size_t a = 0; a < ak.nodes.size(); ++a) {
    if (ak.kernel[a] == 0.0)
      continue;
    double row = 0.0;
    for (std::size_t b = 0; b < al.nodes.size(); ++b) {
      const double f = joint(ak.nodes[a], al.nodes[b]);
      if (f == 0.0)
        continue;
      row += al.weights[b] * al.kernel[b] * (noise_variance + ak.g[a] * al.g[b]) * f / al.floor[b];
    }
    sum += ak.weights[a] * ak.kernel[a] / ak.floor[a] * row;
  }
  return sum / (static_cast<double>(n) * h * h * kTwoPi * kTwoPi);
}

Band confidence_band(std::span<const double> estimate, std::span<const double> variance, double alpha)
{
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("band level alpha must lie in (0, 1)");
  require_same_length(estimate, variance, "confidence_band");
  const boost::math::normal_distribution<double> normal;
  const double z = boost::math::quantile(normal, 1.0 - 0.5 * alpha);
  Band band;
  band.lower.reserve(estimate.size());
  band.upper.reserve(estimate.size());
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double half = z * std::sqrt(std::max(variance[i], 0.0));
    band.lower.push_back(estimate[i] - half);
    band.upper.push_back(estimate[i] + half);
  }
  return band;
}

double ComponentEstimate::at(double x) const
{
  return interpolate(grid, values, x);
}

double assemble_additive(std::span<const ComponentEstimate> components, double intercept, std::span<const double> x)
{
  if (components.size() != x.size())
    throw std::invalid_argument("assemble_additive: dimension mismatch");
  double total = intercept;
  for (std::size_t j = 0; j < components.size(); ++j)
    total += components[j].at(x[j]);
  return total;
}

} // namespace addinv
