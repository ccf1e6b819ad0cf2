#include "addinv/backfitting.hpp"

#include "addinv/errors.hpp"
#include "addinv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace addinv {

double CurveOnGrid::at(double x) const
{
  return interpolate(grid, values, x);
}

double interpolate(std::span<const double> grid, std::span<const double> values, double x)
{
  if (grid.empty() || grid.size() != values.size())
    throw std::logic_error("curve is empty or malformed");
  if (x <= grid.front())
    return values.front();
  if (x >= grid.back())
    return values.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), x) - grid.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - grid[lo]) / (grid[hi] - grid[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

void BackfitConfig::validate() const
{
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("backfitting bandwidth must be positive");
  if (!(tolerance > 0.0))
    throw std::invalid_argument("backfitting tolerance must be positive");
  if (max_iterations < 1)
    throw std::invalid_argument("backfitting needs at least one iteration");
  if (grid.size() < 2 || grid.front() < 0.0 || grid.back() > 1.0 ||
      !std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("backfitting grid must be an increasing grid inside [0, 1]");
}

namespace {

std::vector<std::size_t> canonical_order(const Eigen::MatrixXd& z, const Eigen::VectorXd& y)
{
  std::vector<std::size_t> order(static_cast<std::size_t>(z.rows()));
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double za = z(static_cast<Eigen::Index>(a), j);
      const double zb = z(static_cast<Eigen::Index>(b), j);
      if (za != zb)
        return za < zb;
    }
    return y(static_cast<Eigen::Index>(a)) < y(static_cast<Eigen::Index>(b));
  });
  return order;
}

} // namespace

BackfitSmoothers::BackfitSmoothers(const TransformedDataset& z,
                                   const Eigen::VectorXd& y,
                                   const BackfitConfig& config)
  : grid_(config.grid)
{
  config.validate();
  const auto n = static_cast<Eigen::Index>(z.size());
  const auto d = z.dimension();
  if (y.size() != n)
    throw std::invalid_argument("backfitting: response length differs from sample size");
  if (n < 1 || d < 1)
    throw std::invalid_argument("backfitting: empty sample");

  const auto g = static_cast<Eigen::Index>(grid_.size());
  const auto tw = quad::trapezoid_weights(grid_);
  weights_ = Eigen::Map<const Eigen::VectorXd>(tw.data(), g);

  const auto order = canonical_order(z.z(), y);
  Eigen::VectorXd ys(n);
  for (Eigen::Index m = 0; m < n; ++m)
    ys(m) = y(static_cast<Eigen::Index>(order[static_cast<std::size_t>(m)]));
  intercept_ = ys.sum() / static_cast<double>(n);
  response_scale_ = ys.cwiseAbs().maxCoeff();

  // kernel matrices: rows = grid points, columns = observations
  std::vector<Eigen::MatrixXd> kernel(d, Eigen::MatrixXd(g, n));
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = z.column(j);
    for (Eigen::Index m = 0; m < n; ++m) {
      const double v = col[order[static_cast<std::size_t>(m)]];
      for (Eigen::Index a = 0; a < g; ++a)
        kernel[j](a, m) = unit_kernel(grid_[static_cast<std::size_t>(a)], v, config.bandwidth);
    }
  }

  density_.resize(d);
  nw_.resize(d);
  centering_.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    Eigen::VectorXd mass = kernel[j].rowwise().sum();
    density_[j] = mass / static_cast<double>(n);
    const Eigen::Index worst = [&] {
      Eigen::Index i;
      density_[j].minCoeff(&i);
      return i;
    }();
    if (density_[j](worst) < 1e-12)
      throw DegenerateDesignError("no observation within bandwidth " + std::to_string(config.bandwidth) +
                                  " of grid point " + std::to_string(grid_[static_cast<std::size_t>(worst)]) +
                                  " on axis " + std::to_string(j));
    nw_[j] = (kernel[j] * ys).cwiseQuotient(mass);
    const double total = weights_.dot(density_[j]);
    centering_[j] = weights_.dot(nw_[j].cwiseProduct(density_[j])) / total;
  }

  cross_.assign(d * d, Eigen::MatrixXd());
  for (std::size_t j = 0; j < d; ++j) {
    const double mass_j = weights_.dot(density_[j]);
    for (std::size_t k = 0; k < d; ++k) {
      if (j == k)
        continue;
      Eigen::MatrixXd joint = kernel[j] * kernel[k].transpose() / static_cast<double>(n);
      // p_{k,[j+]} on the grid, using the same quadrature as the recursion
      Eigen::RowVectorXd marginal = (weights_.transpose() * joint) / mass_j;
      Eigen::MatrixXd op = joint.array().colwise() / density_[j].array();
      op.rowwise() -= marginal;
      op.array().rowwise() *= weights_.transpose().array();
      cross_[j * d + k] = std::move(op);
    }
  }
}

Eigen::VectorXd BackfitSmoothers::update(std::size_t j, std::span<const Eigen::VectorXd> state) const
{
  Eigen::VectorXd out = nw_[j].array() - centering_[j];
  for (std::size_t k = 0; k < dimension(); ++k)
    if (k != j)
      out.noalias() -= cross(j, k) * state[k];
  return out;
}

double nadaraya_watson(const TransformedDataset& z,
                       const Eigen::VectorXd& y,
                       std::size_t axis,
                       double bandwidth,
                       double at)
{
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("Nadaraya-Watson bandwidth must be positive");
  const auto col = z.column(axis);
  if (static_cast<Eigen::Index>(col.size()) != y.size())
    throw std::invalid_argument("Nadaraya-Watson: response length differs from sample size");
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < col.size(); ++m) {
    const double w = unit_kernel(at, col[m], bandwidth);
    num += w * y(static_cast<Eigen::Index>(m));
    den += w;
  }
  if (!(den > 0.0))
    throw EmptyWindowError("no observation within bandwidth " + std::to_string(bandwidth) + " of " +
                           std::to_string(at));
  return num / den;
}

double centering_constant(const CurveOnGrid& curve, const DensityEstimate& density)
{
  if (curve.grid != density.grid)
    throw std::invalid_argument("centering_constant: curve and density live on different grids");
  const auto w = quad::trapezoid_weights(curve.grid);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += w[i] * curve.values[i] * density.values[i];
    den += w[i] * density.values[i];
  }
  return num / den;
}

std::vector<Eigen::VectorXd> backfit_sweep(const std::vector<Eigen::VectorXd>& state,
                                           const BackfitSmoothers& smoothers)
{
  if (state.size() != smoothers.dimension())
    throw std::invalid_argument("backfit_sweep: state has wrong number of components");
  std::vector<Eigen::VectorXd> next = state;
  for (std::size_t j = 0; j < next.size(); ++j)
    next[j] = smoothers.update(j, next);
  return next;
}

namespace {

std::vector<CurveOnGrid> to_curves(const std::vector<Eigen::VectorXd>& state, const std::vector<double>& grid)
{
  std::vector<CurveOnGrid> out;
  out.reserve(state.size());
  for (const auto& v : state)
    out.push_back({ grid, std::vector<double>(v.data(), v.data() + v.size()) });
  return out;
}

std::vector<Eigen::VectorXd> to_state(const std::vector<CurveOnGrid>& curves)
{
  std::vector<Eigen::VectorXd> out;
  out.reserve(curves.size());
  for (const auto& c : curves)
    out.push_back(Eigen::Map<const Eigen::VectorXd>(c.values.data(), static_cast<Eigen::Index>(c.values.size())));
  return out;
}

} // namespace

BackfitResult backfit(const BackfitSmoothers& smoothers, const BackfitConfig& config)
{
  config.validate();
  const auto g = static_cast<Eigen::Index>(smoothers.grid().size());
  std::vector<Eigen::VectorXd> state(smoothers.dimension(), Eigen::VectorXd::Zero(g));
  const double threshold = config.tolerance * (1.0 + smoothers.response_scale());

  BackfitResult result;
  result.intercept = smoothers.intercept();
  for (int r = 1; r <= config.max_iterations; ++r) {
    auto next = backfit_sweep(state, smoothers);
    double change = 0.0;
    for (std::size_t j = 0; j < state.size(); ++j)
      change = std::max(change, (next[j] - state[j]).cwiseAbs().maxCoeff());
    state = std::move(next);
    result.iterations = r;
    result.final_change = change;
    result.changes.push_back(change);
    // without cross terms the first sweep already solves the system
    if (change < threshold || state.size() == 1) {
      result.converged = true;
      break;
    }
  }
  result.components = to_curves(state, smoothers.grid());
  result.residual = fixed_point_residual(result, smoothers);
  return result;
}

BackfitResult backfit(const TransformedDataset& z, const Eigen::VectorXd& y, const BackfitConfig& config)
{
  const BackfitSmoothers smoothers(z, y, config);
  return backfit(smoothers, config);
}

double fixed_point_residual(const BackfitResult& result, const BackfitSmoothers& smoothers)
{
  if (result.components.size() != smoothers.dimension())
    throw std::invalid_argument("fixed_point_residual: dimension mismatch");
  const auto state = to_state(result.components);
  double worst = 0.0;
  for (std::size_t j = 0; j < state.size(); ++j)
    worst = std::max(worst, (state[j] - smoothers.update(j, state)).cwiseAbs().maxCoeff());
  return worst;
}

double compose_with_ecdf(const BackfitResult& result,
                         const TransformedDataset& z,
                         std::size_t axis,
                         double x)
{
  if (axis >= result.components.size())
    throw std::out_of_range("compose_with_ecdf: axis outside fitted dimension");
  return result.components[axis].at(z.transform(axis, x));
}

} // namespace addinv
