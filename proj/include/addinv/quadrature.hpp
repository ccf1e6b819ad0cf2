#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

//! Quadrature rules shared by every module. All rules work on uniform grids
//! except the adaptive Simpson integrator.
namespace addinv::quad {

//! n equispaced points on [a, b], endpoints included (n >= 2).
std::vector<double> linspace(double a, double b, std::size_t n);

//! Composite Simpson weights for `panels` (even, >= 2) panels on [a, b].
//! The matching nodes are linspace(a, b, panels + 1).
std::vector<double> simpson_weights(double a, double b, std::size_t panels);

//! Trapezoid weights for an arbitrary increasing grid.
std::vector<double> trapezoid_weights(std::span<const double> grid);

double trapezoid(std::span<const double> x, std::span<const double> y);

template<class F>
double simpson(F&& f, double a, double b, std::size_t panels)
{
  const auto w = simpson_weights(a, b, panels);
  const double step = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t i = 0; i <= panels; ++i)
    sum += w[i] * f(a + step * static_cast<double>(i));
  return sum;
}

//! Adaptive Simpson with Richardson correction. Throws QuadratureError when
//! the recursion depth is exhausted before the local error estimate drops
//! below tolerance.
double adaptive_simpson(const std::function<double(double)>& f,
                        double a,
                        double b,
                        double tolerance,
                        int max_depth = 40);

} // namespace addinv::quad
