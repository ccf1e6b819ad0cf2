#include "addinv/errors.hpp"
#include "addinv/pipeline.hpp"
#include "addinv/quadrature.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace addinv;

namespace {

Dataset additive(std::size_t n, std::uint64_t seed, double noise = 0.3)
{
  return testing::uniform_dataset(
    n, 2, seed, [](const Eigen::RowVectorXd& x) { return std::exp(-x(0) * x(0)) + 0.5 * x(1); }, noise);
}

FitConfig small_config()
{
  FitConfig cfg;
  cfg.grid_points = 21;
  cfg.variance_panels = 200;
  cfg.inversion_bandwidths = { 0.35 };
  return cfg;
}

} // namespace

TEST_CASE("single predictor uses centered responses")
{
  const auto data = testing::uniform_dataset(200, 1, 1, [](const Eigen::RowVectorXd& x) { return std::sin(x(0)); }, 0.2);
  const auto fam = ConvolutionFamily::laplace({ 3.0 });
  const auto cfg = small_config();
  const auto fit = fit_additive(data, fam, cfg);
  REQUIRE(fit.components.size() == 1);
  CHECK(fit.intercept == doctest::Approx(data.y.mean()));
  CHECK(fit.stage.backfit.iterations <= 2);

  const auto in = component_input(data, fit.stage, 0, fit.density_bandwidths[0], cfg.truncation);
  for (std::size_t k = 0; k < in.residual.size(); ++k)
    CHECK(in.residual[k] == doctest::Approx(data.y(static_cast<Eigen::Index>(k)) - data.y.mean()));
}

TEST_CASE("estimates are linear in the response")
{
  const auto d1 = additive(300, 2);
  Dataset d2 = d1;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (Eigen::Index k = 0; k < d2.y.size(); ++k)
    d2.y(k) = std::cos(d2.x(k, 1)) + normal(rng);
  Dataset sum = d1;
  sum.y = d1.y + d2.y;
  const auto fam = ConvolutionFamily::laplace({ 3.0, 3.0 });
  auto cfg = small_config();
  cfg.compute_variance = false;
  cfg.backfit.tolerance = 1e-13;
  const auto a = fit_additive(d1, fam, cfg);
  const auto b = fit_additive(d2, fam, cfg);
  const auto ab = fit_additive(sum, fam, cfg);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < ab.components[j].values.size(); ++i)
      CHECK(std::abs(ab.components[j].values[i] - a.components[j].values[i] - b.components[j].values[i]) < 1e-8);
  const std::vector<double> x{ 0.3, -0.7 };
  CHECK(std::abs(assemble_additive(ab.components, ab.intercept, x) - assemble_additive(a.components, a.intercept, x) -
                 assemble_additive(b.components, b.intercept, x)) < 1e-8);
}

TEST_CASE("fits are deterministic and permutation invariant")
{
  const auto data = additive(250, 3);
  const auto fam = ConvolutionFamily::laplace({ 3.0, 3.0 });
  const auto cfg = small_config();
  const auto a = fit_additive(data, fam, cfg);
  const auto b = fit_additive(data, fam, cfg);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(a.components[j].values == b.components[j].values);
    CHECK(a.components[j].variance == b.components[j].variance);
  }

  std::vector<Eigen::Index> perm(250);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(8));
  Dataset shuffled = data;
  for (Eigen::Index k = 0; k < 250; ++k) {
    shuffled.x.row(k) = data.x.row(perm[k]);
    shuffled.y(k) = data.y(perm[k]);
  }
  const auto c = fit_additive(shuffled, fam, cfg);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < a.components[j].values.size(); ++i)
      CHECK(std::abs(c.components[j].values[i] - a.components[j].values[i]) < 1e-12);
}

TEST_CASE("variance and band outputs")
{
  const auto data = additive(300, 5);
  const auto fam = ConvolutionFamily::laplace({ 3.0, 3.0 });
  const auto fit = fit_additive(data, fam, small_config());
  for (const auto& c : fit.components) {
    REQUIRE(c.variance.size() == c.grid.size());
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      CHECK(c.variance[i] > 0.0);
      CHECK(c.band_lower[i] < c.values[i]);
      CHECK(c.band_upper[i] > c.values[i]);
      CHECK(std::abs(c.imag_residue[i]) < 1e-8 * std::max(1.0, std::abs(c.values[i])));
    }
  }
  for (double s2 : fit.noise_variance)
    CHECK(s2 > 0.0);
}

TEST_CASE("known design density")
{
  const auto data = additive(200, 6);
  const auto fam = ConvolutionFamily::laplace({ 3.0, 3.0 });
  const auto stage = run_backfit(data, BackfitConfig{});
  const DesignMarginal uniform{ [](double x) { return std::abs(x) <= 2.0 ? 0.25 : 0.0; }, -2.0, 2.0 };
  const auto in = component_input(data, stage, 1, 0.3, 0.5, nullptr, &uniform);
  for (double w : in.weight)
    CHECK(w == doctest::Approx(4.0));

  const auto kde = kde_design(in.sample, 0.3);
  const auto [lo, hi] = std::minmax_element(in.sample.begin(), in.sample.end());
  CHECK(kde.lower == doctest::Approx(*lo - 0.3));
  CHECK(kde.upper == doctest::Approx(*hi + 0.3));
  CHECK(quad::simpson(kde.density, kde.lower, kde.upper, 4000) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("invalid configurations")
{
  const auto data = additive(100, 7);
  const auto fam2 = ConvolutionFamily::laplace({ 3.0, 3.0 });
  auto cfg = small_config();
  cfg.inversion_bandwidths = { 0.3, 0.3, 0.3 };
  CHECK_THROWS_AS(fit_additive(data, fam2, cfg), std::invalid_argument);
  cfg = small_config();
  cfg.band_alpha = 0.0;
  CHECK_THROWS_AS(fit_additive(data, fam2, cfg), std::invalid_argument);
  CHECK_THROWS_AS(fit_additive(data, ConvolutionFamily::laplace({ 3.0 }), small_config()), std::invalid_argument);
}

TEST_CASE("bandwidth too small for the design")
{
  const auto data = additive(30, 8);
  auto cfg = small_config();
  cfg.backfit.bandwidth = 1e-3;
  CHECK_THROWS_AS(fit_additive(data, ConvolutionFamily::laplace({ 3.0, 3.0 }), cfg), PipelineError);
}
