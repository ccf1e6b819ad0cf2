#include "addinv/quadrature.hpp"

#include "addinv/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace addinv::quad {

std::vector<double> linspace(double a, double b, std::size_t n)
{
  if (n < 2)
    throw std::invalid_argument("linspace needs at least two points");
  std::vector<double> out(n);
  const double step = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = a + step * static_cast<double>(i);
  out.back() = b;
  return out;
}

std::vector<double> simpson_weights(double a, double b, std::size_t panels)
{
  if (panels < 2 || panels % 2 != 0)
    throw std::invalid_argument("Simpson rule needs an even panel count >= 2");
  const double third = (b - a) / static_cast<double>(panels) / 3.0;
  std::vector<double> w(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i)
    w[i] = third * ((i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
  return w;
}

std::vector<double> trapezoid_weights(std::span<const double> grid)
{
  const std::size_t n = grid.size();
  if (n < 2)
    throw std::invalid_argument("trapezoid rule needs at least two points");
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double half = 0.5 * (grid[i + 1] - grid[i]);
    w[i] += half;
    w[i + 1] += half;
  }
  return w;
}

double trapezoid(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size())
    throw std::invalid_argument("trapezoid: abscissae and values differ in length");
  const auto w = trapezoid_weights(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    sum += w[i] * y[i];
  return sum;
}

namespace {

struct Panel
{
  double a, m, b;
  double fa, fm, fb;
  double whole;
};

double simpson_panel(double a, double b, double fa, double fm, double fb)
{
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double refine(const std::function<double(double)>& f,
              const Panel& p,
              double tolerance,
              int depth)
{
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_panel(p.a, p.m, p.fa, flm, p.fm);
  const double right = simpson_panel(p.m, p.b, p.fm, frm, p.fb);
  const double delta = left + right - p.whole;
  if (std::abs(delta) <= 15.0 * tolerance)
    return left + right + delta / 15.0;
  if (depth <= 0)
    throw QuadratureError("adaptive Simpson did not converge");
  return refine(f, { p.a, lm, p.m, p.fa, flm, p.fm, left }, 0.5 * tolerance, depth - 1) +
         refine(f, { p.m, rm, p.b, p.fm, frm, p.fb, right }, 0.5 * tolerance, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f,
                        double a,
                        double b,
                        double tolerance,
                        int max_depth)
{
  if (!(tolerance > 0.0))
    throw std::invalid_argument("adaptive_simpson: tolerance must be positive");
  if (a == b)
    return 0.0;
  // Start from a fixed subdivision so that narrow features are not missed by
  // the very first error estimate.
  constexpr int initial = 16;
  const double step = (b - a) / initial;
  double total = 0.0;
  for (int i = 0; i < initial; ++i) {
    const double lo = a + step * i;
    const double hi = (i + 1 == initial) ? b : lo + step;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo), fmid = f(mid), fhi = f(hi);
    const Panel p{ lo, mid, hi, flo, fmid, fhi, simpson_panel(lo, hi, flo, fmid, fhi) };
    total += refine(f, p, tolerance / initial, max_depth);
  }
  return total;
}

} // namespace addinv::quad
