#pragma once

#include "addinv/kernels.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace addinv {

//! Raw observations: one row of predictors per observation plus the
//! response vector.
struct Dataset
{
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(x.cols()); }
};

//! Throws std::invalid_argument unless N >= 2, d >= 1, shapes agree and all
//! entries are finite.
void validate(const Dataset& data);

//! Predictors mapped to (0, 1) column by column through the empirical
//! distribution function with denominator N + 1. Keeps the sorted source
//! columns so that new points can be mapped the same way.
class TransformedDataset
{
public:
  TransformedDataset() = default;
  //! Wrap already transformed values (all entries in [0, 1]). Used when the
  //! unit-cube sample is produced elsewhere.
  explicit TransformedDataset(Eigen::MatrixXd z);
  TransformedDataset(Eigen::MatrixXd z, std::vector<std::vector<double>> sorted_columns);

  const Eigen::MatrixXd& z() const { return z_; }
  std::size_t size() const { return static_cast<std::size_t>(z_.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(z_.cols()); }
  std::span<const double> column(std::size_t axis) const;

  //! #{m : X_{m,j} <= x} / (N + 1) against the source column.
  double transform(std::size_t axis, double x) const;
  bool has_source() const { return !sorted_.empty(); }

private:
  Eigen::MatrixXd z_;
  std::vector<std::vector<double>> sorted_;
};

TransformedDataset ecdf_transform(const Dataset& data);

//! Left-continuous generalized inverse of the (denominator N) empirical
//! distribution function of column `axis`.
double empirical_quantile(const Dataset& data, std::size_t axis, double u);

//! Kernel density estimate of a single column on the real line.
double kde_marginal(std::span<const double> sample, double bandwidth, double x);
double kde_marginal(const Dataset& data, std::size_t axis, double bandwidth, double x);

//! 1.06 * sd * N^{-1/5}.
double normal_reference_bandwidth(std::span<const double> sample);

//! A density tabulated on a grid.
struct DensityEstimate
{
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
};

//! Equispaced grid on [0, 1] including both endpoints.
std::vector<double> unit_grid(std::size_t points = 101);

//! Boundary-normalized kernel weight on [0, 1]:
//!   L_h(z, v) = L((v - z) / h) / (h * int_0^1 L((v - w) / h) / h dw),
//! so that int_0^1 L_h(z, v) dz = 1 for every observation v.
double unit_kernel(double z, double v, double bandwidth);

//! Truncated kernel mass int_0^1 L((v - w) / h) / h dw in closed form; the
//! normalizer of unit_kernel. Equals one when v lies in [h, 1 - h].
double unit_kernel_mass(double v, double bandwidth);

double kde_unit_marginal(const TransformedDataset& z, std::size_t axis, double bandwidth, double at);

double kde_unit_joint(const TransformedDataset& z,
                      std::size_t j,
                      std::size_t k,
                      double bandwidth,
                      double zj,
                      double zk);

//! p_{k,[j+]}(z_k) = int p_jk(z_j, z_k) dz_j / int p_j(z_j) dz_j. The inner
//! integrals over the product kernel are exact.
double marginal_over_j(const TransformedDataset& z,
                       std::size_t j,
                       std::size_t k,
                       double bandwidth,
                       double zk);

DensityEstimate kde_unit_marginal_on_grid(const TransformedDataset& z,
                                          std::size_t axis,
                                          double bandwidth,
                                          std::span<const double> grid);

} // namespace addinv
