#pragma once

#include "addinv/empirical.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace addinv {

//! Linear interpolation on an increasing grid, holding end values outside.
double interpolate(std::span<const double> grid, std::span<const double> values, double x);

//! A scalar function tabulated on an increasing grid. Evaluation between
//! nodes is linear; outside the grid the end values are held.
struct CurveOnGrid
{
  std::vector<double> grid;
  std::vector<double> values;

  double at(double x) const;
};

struct BackfitConfig
{
  double bandwidth = 0.1;
  int max_iterations = 100;
  //! Sweeps stop once the sup-norm change over all components drops below
  //! tolerance * (1 + max |Y|).
  double tolerance = 1e-8;
  std::vector<double> grid = unit_grid();

  void validate() const;
};

//! Everything the backfitting recursion needs from the data, tabulated on
//! the shared grid: marginal densities p_j, Nadaraya-Watson curves, the
//! centering constants g*_{0,j} and, for every ordered pair (j, k), the
//! integral operator
//!   (A_jk g)(z_j) = int g(z_k) [p_jk(z_j, z_k) / p_j(z_j) - p_{k,[j+]}(z_k)] dz_k
//! with the trapezoid weights already folded in.
//!
//! Observations are summed in a canonical order (lexicographic on the
//! transformed row, then the response), which makes every quantity invariant
//! under permutations of the input rows, bit for bit.
class BackfitSmoothers
{
public:
  BackfitSmoothers(const TransformedDataset& z, const Eigen::VectorXd& y, const BackfitConfig& config);

  std::size_t dimension() const { return nw_.size(); }
  const std::vector<double>& grid() const { return grid_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double intercept() const { return intercept_; }
  double response_scale() const { return response_scale_; }

  const Eigen::VectorXd& density(std::size_t j) const { return density_[j]; }
  const Eigen::VectorXd& nadaraya_watson(std::size_t j) const { return nw_[j]; }
  double centering(std::size_t j) const { return centering_[j]; }
  const Eigen::MatrixXd& cross(std::size_t j, std::size_t k) const { return cross_[j * dimension() + k]; }

  //! Right-hand side of the fixed-point system for component j given the
  //! current values of all other components.
  Eigen::VectorXd update(std::size_t j, std::span<const Eigen::VectorXd> state) const;

private:
  std::vector<double> grid_;
  Eigen::VectorXd weights_;
  double intercept_ = 0.0;
  double response_scale_ = 0.0;
  std::vector<Eigen::VectorXd> density_;
  std::vector<Eigen::VectorXd> nw_;
  std::vector<double> centering_;
  std::vector<Eigen::MatrixXd> cross_;
};

struct BackfitResult
{
  double intercept = 0.0;
  std::vector<CurveOnGrid> components;
  int iterations = 0;
  double final_change = 0.0;
  bool converged = false;
  double residual = 0.0;
  //! Sup-norm change after every sweep.
  std::vector<double> changes;
};

//! Kernel-weighted response average at z with the boundary-normalized
//! kernel of the unit-interval density estimate. Throws EmptyWindowError when
//! no observation lies within the bandwidth of z.
double nadaraya_watson(const TransformedDataset& z,
                       const Eigen::VectorXd& y,
                       std::size_t axis,
                       double bandwidth,
                       double at);

//! int g p / int p by trapezoid quadrature on the shared grid.
double centering_constant(const CurveOnGrid& curve, const DensityEstimate& density);

//! One Gauss-Seidel pass over all components (ascending j). Components
//! k < j already use their values from this pass.
std::vector<Eigen::VectorXd> backfit_sweep(const std::vector<Eigen::VectorXd>& state,
                                           const BackfitSmoothers& smoothers);

BackfitResult backfit(const BackfitSmoothers& smoothers, const BackfitConfig& config);
BackfitResult backfit(const TransformedDataset& z, const Eigen::VectorXd& y, const BackfitConfig& config);

//! Maximum violation of the fixed-point system over all components and grid
//! points.
double fixed_point_residual(const BackfitResult& result, const BackfitSmoothers& smoothers);

//! g_j(x) = g*_j(F_j(x)) with the empirical distribution function of the
//! source column.
double compose_with_ecdf(const BackfitResult& result,
                         const TransformedDataset& z,
                         std::size_t axis,
                         double x);

} // namespace addinv
