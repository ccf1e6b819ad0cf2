#pragma once

#include "addinv/empirical.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

namespace addinv::testing {

inline Dataset uniform_dataset(std::size_t n, std::size_t d, std::uint64_t seed,
                               const std::function<double(const Eigen::RowVectorXd&)>& signal,
                               double noise_sd = 0.0)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::normal_distribution<double> noise(0.0, noise_sd > 0.0 ? noise_sd : 1.0);
  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  data.y.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < data.x.rows(); ++k) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j)
      data.x(k, j) = unif(rng);
    data.y(k) = signal(data.x.row(k)) + (noise_sd > 0.0 ? noise(rng) : 0.0);
  }
  return data;
}

// Composite Gauss-Legendre (5 points per panel) as an independent quadrature rule.
template <class F>
double gauss_legendre(F&& f, double a, double b, std::size_t panels)
{
  static const double nodes[] = { 0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640 };
  static const double weights[] = { 0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891, 0.2369268850561891 };
  const double step = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + step * (static_cast<double>(p) + 0.5);
    for (int i = 0; i < 5; ++i)
      sum += 0.5 * step * weights[i] * f(mid + 0.5 * step * nodes[i]);
  }
  return sum;
}

} // namespace addinv::testing
