#include "addinv/empirical.hpp"

#include "addinv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace addinv {

namespace {

const SmoothingKernel kEpanechnikov{};

void require_axis(std::size_t axis, std::size_t d)
{
  if (axis >= d)
    throw std::out_of_range("axis " + std::to_string(axis) + " outside dimension " +
                            std::to_string(d));
}

void require_bandwidth(double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("bandwidth must be positive and finite");
}

void require_unit(double z)
{
  if (!(z >= 0.0 && z <= 1.0))
    throw std::invalid_argument("evaluation point outside [0, 1]");
}

// Quadrature of z -> L_h(z, v) over [0, 1]. The kernel is quadratic between
// its kinks at v -/+ h, where three-point Simpson is exact.
double integrate_unit_kernel(double v, double bandwidth)
{
  double cuts[4] = { 0.0, std::clamp(v - bandwidth, 0.0, 1.0), std::clamp(v + bandwidth, 0.0, 1.0), 1.0 };
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b <= a)
      continue;
    const double m = 0.5 * (a + b);
    total += (b - a) / 6.0 *
             (unit_kernel(a, v, bandwidth) + 4.0 * unit_kernel(m, v, bandwidth) + unit_kernel(b, v, bandwidth));
  }
  return total;
}

} // namespace

void validate(const Dataset& data)
{
  if (data.x.rows() < 2)
    throw std::invalid_argument("dataset needs at least two observations");
  if (data.x.cols() < 1)
    throw std::invalid_argument("dataset needs at least one predictor");
  if (data.y.size() != data.x.rows())
    throw std::invalid_argument("predictor rows and response length differ");
  if (!data.x.allFinite() || !data.y.allFinite())
    throw std::invalid_argument("dataset contains non-finite values");
}

TransformedDataset::TransformedDataset(Eigen::MatrixXd z)
  : z_(std::move(z))
{
  if ((z_.array() < 0.0).any() || (z_.array() > 1.0).any() || !z_.allFinite())
    throw std::invalid_argument("transformed values must lie in [0, 1]");
}

TransformedDataset::TransformedDataset(Eigen::MatrixXd z, std::vector<std::vector<double>> sorted_columns)
  : z_(std::move(z))
  , sorted_(std::move(sorted_columns))
{}

std::span<const double> TransformedDataset::column(std::size_t axis) const
{
  require_axis(axis, dimension());
  return { z_.col(static_cast<Eigen::Index>(axis)).data(), size() };
}

double TransformedDataset::transform(std::size_t axis, double x) const
{
  require_axis(axis, dimension());
  if (sorted_.empty())
    throw std::logic_error("transformed dataset carries no source columns");
  const auto& col = sorted_[axis];
  const auto count = std::upper_bound(col.begin(), col.end(), x) - col.begin();
  return static_cast<double>(count) / static_cast<double>(col.size() + 1);
}

TransformedDataset ecdf_transform(const Dataset& data)
{
  validate(data);
  const auto n = data.x.rows();
  const auto d = data.x.cols();
  Eigen::MatrixXd z(n, d);
  std::vector<std::vector<double>> sorted(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    auto& col = sorted[static_cast<std::size_t>(j)];
    col.assign(data.x.col(j).begin(), data.x.col(j).end());
    std::sort(col.begin(), col.end());
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto count = std::upper_bound(col.begin(), col.end(), data.x(k, j)) - col.begin();
      z(k, j) = static_cast<double>(count) / static_cast<double>(n + 1);
    }
  }
  return TransformedDataset(std::move(z), std::move(sorted));
}

double empirical_quantile(const Dataset& data, std::size_t axis, double u)
{
  require_axis(axis, data.dimension());
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("quantile level must lie in (0, 1)");
  const auto n = data.size();
  if (n == 0)
    throw std::invalid_argument("empty dataset");
  std::vector<double> col(data.x.col(static_cast<Eigen::Index>(axis)).begin(),
                          data.x.col(static_cast<Eigen::Index>(axis)).end());
  std::sort(col.begin(), col.end());
  // smallest order statistic X_(i) with i / N >= u
  auto i = static_cast<std::size_t>(std::ceil(u * static_cast<double>(n) - 1e-12));
  i = std::clamp<std::size_t>(i, 1, n);
  return col[i - 1];
}

double kde_marginal(std::span<const double> sample, double bandwidth, double x)
{
  require_bandwidth(bandwidth);
  if (sample.empty())
    throw std::invalid_argument("kde_marginal: empty sample");
  double sum = 0.0;
  for (double v : sample)
    sum += eval_smoothing(kEpanechnikov, (v - x) / bandwidth);
  return sum / (static_cast<double>(sample.size()) * bandwidth);
}

double kde_marginal(const Dataset& data, std::size_t axis, double bandwidth, double x)
{
  require_axis(axis, data.dimension());
  const auto col = data.x.col(static_cast<Eigen::Index>(axis));
  return kde_marginal(std::span<const double>(col.data(), data.size()), bandwidth, x);
}

double normal_reference_bandwidth(std::span<const double> sample)
{
  const auto n = static_cast<double>(sample.size());
  if (sample.size() < 2)
    throw std::invalid_argument("normal reference rule needs at least two points");
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sample)
    ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0))
    throw std::invalid_argument("normal reference rule: sample has zero spread");
  return 1.06 * sd * std::pow(n, -0.2);
}

std::vector<double> unit_grid(std::size_t points)
{
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

double unit_kernel_mass(double v, double bandwidth)
{
  return smoothing_cdf(kEpanechnikov, v / bandwidth) -
         smoothing_cdf(kEpanechnikov, (v - 1.0) / bandwidth);
}

double unit_kernel(double z, double v, double bandwidth)
{
  const double k = eval_smoothing(kEpanechnikov, (v - z) / bandwidth);
  if (k == 0.0)
    return 0.0;
  return k / (bandwidth * unit_kernel_mass(v, bandwidth));
}

double kde_unit_marginal(const TransformedDataset& z, std::size_t axis, double bandwidth, double at)
{
  require_bandwidth(bandwidth);
  require_unit(at);
  const auto col = z.column(axis);
  double sum = 0.0;
  for (double v : col)
    sum += unit_kernel(at, v, bandwidth);
  return sum / static_cast<double>(col.size());
}

double kde_unit_joint(const TransformedDataset& z,
                      std::size_t j,
                      std::size_t k,
                      double bandwidth,
                      double zj,
                      double zk)
{
  if (j == k)
    throw std::invalid_argument("joint density needs two distinct axes");
  require_bandwidth(bandwidth);
  require_unit(zj);
  require_unit(zk);
  const auto cj = z.column(j);
  const auto ck = z.column(k);
  double sum = 0.0;
  for (std::size_t m = 0; m < cj.size(); ++m)
    sum += unit_kernel(zj, cj[m], bandwidth) * unit_kernel(zk, ck[m], bandwidth);
  return sum / static_cast<double>(cj.size());
}

double marginal_over_j(const TransformedDataset& z,
                       std::size_t j,
                       std::size_t k,
                       double bandwidth,
                       double zk)
{
  if (j == k)
    throw std::invalid_argument("marginal_over_j needs two distinct axes");
  require_bandwidth(bandwidth);
  require_unit(zk);
  const auto cj = z.column(j);
  const auto ck = z.column(k);
  const auto n = static_cast<double>(cj.size());
  double numerator = 0.0;
  double mass = 0.0;
  for (std::size_t m = 0; m < cj.size(); ++m) {
    const double inner = integrate_unit_kernel(cj[m], bandwidth);
    numerator += inner * unit_kernel(zk, ck[m], bandwidth);
    mass += inner;
  }
  numerator /= n;
  mass /= n;
  if (mass < 1e-12)
    throw DegenerateDesignError("marginal_over_j: density mass vanishes");
  return numerator / mass;
}

DensityEstimate kde_unit_marginal_on_grid(const TransformedDataset& z,
                                          std::size_t axis,
                                          double bandwidth,
                                          std::span<const double> grid)
{
  DensityEstimate out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.reserve(grid.size());
  for (double g : grid)
    out.values.push_back(kde_unit_marginal(z, axis, bandwidth, g));
  out.bandwidth = bandwidth;
  return out;
}

} // namespace addinv
