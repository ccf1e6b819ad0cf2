#include "addinv/backfitting.hpp"
#include "addinv/errors.hpp"
#include "addinv/quadrature.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace addinv;

namespace {

TransformedDataset unit_sample(std::size_t n, std::size_t d, std::uint64_t seed, double correlation = 0.0)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    const double common = u(rng);
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double own = u(rng);
      z(k, j) = correlation > 0.0 && u(rng) < correlation ? common : own;
    }
  }
  return TransformedDataset(z);
}

double sup_distance(const CurveOnGrid& a, const std::function<double(double)>& f)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.grid.size(); ++i)
    s = std::max(s, std::abs(a.values[i] - f(a.grid[i])));
  return s;
}

DensityEstimate density_of(const BackfitSmoothers& s, std::size_t j)
{
  const auto& p = s.density(j);
  return { s.grid(), std::vector<double>(p.data(), p.data() + p.size()), 0.0 };
}

} // namespace

TEST_CASE("Nadaraya-Watson examples")
{
  const auto z = unit_sample(40, 1, 1);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(40, 3.5);
  for (double at : { 0.0, 0.3, 0.99 })
    CHECK(nadaraya_watson(z, c, 0, 0.2, at) == doctest::Approx(3.5));

  Eigen::MatrixXd one(1, 1);
  one << 0.4;
  Eigen::VectorXd y1(1);
  y1 << -2.0;
  CHECK(nadaraya_watson(TransformedDataset(one), y1, 0, 0.2, 0.5) == doctest::Approx(-2.0));

  Eigen::MatrixXd two(2, 1);
  two << 0.4, 0.6;
  Eigen::VectorXd y2(2);
  y2 << 0.0, 4.0;
  CHECK(nadaraya_watson(TransformedDataset(two), y2, 0, 0.3, 0.5) == doctest::Approx(2.0));

  CHECK_THROWS_AS(nadaraya_watson(TransformedDataset(one), y1, 0, 0.05, 0.9), EmptyWindowError);
}

TEST_CASE("centering constant")
{
  const auto grid = unit_grid();
  const std::vector<double> flat(grid.size(), 1.0);
  const DensityEstimate uniform{ grid, flat, 0.1 };
  CHECK(centering_constant({ grid, std::vector<double>(grid.size(), 2.5) }, uniform) == doctest::Approx(2.5));

  std::vector<double> odd, sym;
  for (double z : grid) {
    odd.push_back(std::pow(z - 0.5, 3));
    sym.push_back(1.0 + std::cos(2.0 * std::numbers::pi * z));
  }
  CHECK(std::abs(centering_constant({ grid, odd }, { grid, sym, 0.1 })) < 1e-15);
  CHECK(centering_constant({ grid, grid }, uniform) == doctest::Approx(0.5));
  CHECK_THROWS_AS(centering_constant({ unit_grid(11), std::vector<double>(11, 0.0) }, uniform), std::invalid_argument);
}

TEST_CASE("single predictor converges in one sweep")
{
  const auto z = unit_sample(200, 1, 4);
  Eigen::VectorXd y(200);
  for (Eigen::Index k = 0; k < 200; ++k)
    y(k) = std::sin(3.0 * z.z()(k, 0));
  BackfitConfig cfg;
  const BackfitSmoothers s(z, y, cfg);
  const auto next = backfit_sweep({ Eigen::VectorXd::Zero(101) }, s);
  const Eigen::VectorXd expected = s.nadaraya_watson(0).array() - s.centering(0);
  CHECK((next[0] - expected).cwiseAbs().maxCoeff() < 1e-14);

  const auto result = backfit(s, cfg);
  CHECK(result.converged);
  CHECK(result.iterations <= 2);
  CHECK(fixed_point_residual(result, s) < 1e-14);
}

TEST_CASE("zero response stays zero")
{
  const auto z = unit_sample(100, 2, 5);
  const BackfitSmoothers s(z, Eigen::VectorXd::Zero(100), BackfitConfig{});
  const auto next = backfit_sweep({ Eigen::VectorXd::Zero(101), Eigen::VectorXd::Zero(101) }, s);
  CHECK(next[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(next[1].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant response")
{
  const auto z = unit_sample(300, 2, 6);
  const auto r = backfit(z, Eigen::VectorXd::Constant(300, 1.7), BackfitConfig{});
  CHECK(r.intercept == doctest::Approx(1.7));
  for (const auto& c : r.components)
    CHECK(sup_distance(c, [](double) { return 0.0; }) < 1e-10);
}

TEST_CASE("independent predictors reduce to marginal smoothers")
{
  // The marginal smoother of axis j treats the other component as noise, so
  // the signals are kept small enough that this noise stays below the tolerance.
  const auto z = unit_sample(2000, 2, 8);
  Eigen::VectorXd y(2000);
  for (Eigen::Index k = 0; k < 2000; ++k)
    y(k) = 0.5 * z.z()(k, 0) * z.z()(k, 0) + 0.25 * std::cos(4.0 * z.z()(k, 1));
  BackfitConfig cfg;
  const BackfitSmoothers s(z, y, cfg);
  const auto r = backfit(s, cfg);
  for (std::size_t j = 0; j < 2; ++j) {
    const Eigen::VectorXd nw = s.nadaraya_watson(j).array() - s.centering(j);
    double sup = 0.0;
    for (Eigen::Index i = 0; i < nw.size(); ++i)
      sup = std::max(sup, std::abs(nw(i) - r.components[j].values[i]));
    CHECK(sup < 0.05);
    // the cross-term brackets applied to the other component nearly vanish
    const std::size_t k = 1 - j;
    const Eigen::VectorXd other =
      Eigen::Map<const Eigen::VectorXd>(r.components[k].values.data(), static_cast<Eigen::Index>(r.components[k].values.size()));
    CHECK((s.cross(j, k) * other).cwiseAbs().maxCoeff() < 0.05);
  }
}

TEST_CASE("additive noiseless recovery")
{
  const auto z = unit_sample(2000, 2, 12);
  Eigen::VectorXd y(2000);
  const auto g1 = [](double t) { return t - 0.5; };
  const auto g2 = [](double t) { return std::sin(2.0 * std::numbers::pi * t); };
  for (Eigen::Index k = 0; k < 2000; ++k)
    y(k) = g1(z.z()(k, 0)) + g2(z.z()(k, 1));
  // local-constant boundary bias is about 0.375 h |g'|, so h stays small
  BackfitConfig cfg;
  cfg.bandwidth = 0.03;
  const auto r = backfit(z, y, cfg);
  CHECK(r.converged);
  CHECK(sup_distance(r.components[0], g1) < 0.1);
  CHECK(sup_distance(r.components[1], g2) < 0.1);

  // geometric decay of the sweep changes
  REQUIRE(r.changes.size() >= 4);
  const auto n = r.changes.size();
  for (std::size_t i = n - 3; i < n; ++i)
    CHECK(r.changes[i] < r.changes[i - 1]);
}

TEST_CASE("fixed point residual")
{
  const auto z = unit_sample(500, 2, 13, 0.6);
  Eigen::VectorXd y(500);
  for (Eigen::Index k = 0; k < 500; ++k)
    y(k) = std::exp(z.z()(k, 0)) - z.z()(k, 1) * z.z()(k, 1);
  BackfitConfig tight;
  tight.tolerance = 1e-10;
  const BackfitSmoothers s(z, y, tight);
  const auto converged = backfit(s, tight);
  CHECK(converged.converged);
  const double res = fixed_point_residual(converged, s);
  CHECK(res < 1e-8);
  CHECK(converged.residual == doctest::Approx(res));

  BackfitConfig once = tight;
  once.max_iterations = 1;
  const auto early = backfit(s, once);
  CHECK_FALSE(early.converged);
  CHECK(early.iterations == 1);
  CHECK(fixed_point_residual(early, s) > res);
}

TEST_CASE("components stay centered after every sweep")
{
  const auto z = unit_sample(400, 3, 14, 0.4);
  Eigen::VectorXd y(400);
  for (Eigen::Index k = 0; k < 400; ++k)
    y(k) = 5.0 * z.z()(k, 0) + std::sin(6.0 * z.z()(k, 1)) - z.z()(k, 2);
  const BackfitSmoothers s(z, y, BackfitConfig{});
  std::vector<Eigen::VectorXd> state(3, Eigen::VectorXd::Zero(101));
  const double scale = y.cwiseAbs().maxCoeff();
  for (int sweep = 0; sweep < 10; ++sweep) {
    state = backfit_sweep(state, s);
    for (std::size_t j = 0; j < 3; ++j) {
      const CurveOnGrid c{ s.grid(), std::vector<double>(state[j].data(), state[j].data() + state[j].size()) };
      CHECK(std::abs(centering_constant(c, density_of(s, j))) < 1e-6 * scale);
    }
  }
}

TEST_CASE("permutation of observations changes nothing")
{
  auto data = testing::uniform_dataset(300, 2, 15, [](const Eigen::RowVectorXd& x) { return x(0) * x(1) + x(0); }, 0.3);
  std::vector<Eigen::Index> perm(300);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(99));
  Dataset shuffled = data;
  for (Eigen::Index k = 0; k < 300; ++k) {
    shuffled.x.row(k) = data.x.row(perm[k]);
    shuffled.y(k) = data.y(perm[k]);
  }
  const auto a = backfit(ecdf_transform(data), data.y, BackfitConfig{});
  const auto b = backfit(ecdf_transform(shuffled), shuffled.y, BackfitConfig{});
  CHECK(a.intercept == b.intercept);
  CHECK(a.iterations == b.iterations);
  for (std::size_t j = 0; j < 2; ++j)
    CHECK(a.components[j].values == b.components[j].values);
}

TEST_CASE("backfitting is linear in the response")
{
  const auto z = unit_sample(300, 2, 16, 0.5);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  Eigen::VectorXd y1(300), y2(300);
  for (Eigen::Index k = 0; k < 300; ++k) {
    y1(k) = z.z()(k, 0) + normal(rng);
    y2(k) = std::cos(5.0 * z.z()(k, 1)) + normal(rng);
  }
  BackfitConfig cfg;
  cfg.tolerance = 1e-12;
  const auto a = backfit(z, y1, cfg);
  const auto b = backfit(z, y2, cfg);
  const auto ab = backfit(z, y1 + y2, cfg);
  CHECK(ab.intercept == doctest::Approx(a.intercept + b.intercept));
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < ab.components[j].values.size(); ++i)
      CHECK(std::abs(ab.components[j].values[i] - a.components[j].values[i] - b.components[j].values[i]) < 1e-8);
}

TEST_CASE("composition with the empirical distribution function")
{
  auto data = testing::uniform_dataset(101, 2, 17, [](const Eigen::RowVectorXd& x) { return std::sin(x(0)) + x(1); });
  const auto z = ecdf_transform(data);
  const auto r = backfit(z, data.y, BackfitConfig{});
  CHECK(compose_with_ecdf(r, z, 0, -10.0) == r.components[0].values.front());

  auto col = std::vector<double>(z.column(1).begin(), z.column(1).end());
  std::vector<double> sorted(data.x.col(1).data(), data.x.col(1).data() + 101);
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[50];
  CHECK(compose_with_ecdf(r, z, 1, median) == doctest::Approx(r.components[1].at(51.0 / 102.0)));

  BackfitResult flat;
  flat.components = { { unit_grid(), std::vector<double>(101, 0.3) }, { unit_grid(), std::vector<double>(101, 0.3) } };
  for (double x : { -3.0, 0.0, 1.7 })
    CHECK(compose_with_ecdf(flat, z, 0, x) == doctest::Approx(0.3));
  CHECK_THROWS_AS(compose_with_ecdf(r, z, 2, 0.0), std::out_of_range);
}

TEST_CASE("degenerate designs and invalid settings")
{
  const auto z = unit_sample(5, 2, 18);
  BackfitConfig tiny;
  tiny.bandwidth = 1e-3;
  CHECK_THROWS_AS(BackfitSmoothers(z, Eigen::VectorXd::Zero(5), tiny), DegenerateDesignError);
  BackfitConfig bad;
  bad.bandwidth = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = BackfitConfig{};
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
