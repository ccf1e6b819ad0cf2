#include "addinv/errors.hpp"
#include "addinv/quadrature.hpp"
#include "addinv/simulation.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace addinv;

namespace {

SimulationConfig quick(std::size_t replicates)
{
  SimulationConfig c;
  c.n = 301;
  c.replicates = replicates;
  c.seed = 42;
  c.bandwidth_mode = BandwidthMode::fixed;
  c.fixed = Bandwidths{ { 0.35, 0.35 }, 0.1, { 0.35, 0.35 } };
  c.window_points = 41;
  c.threads = 1;
  return c;
}

std::size_t grid_index(const std::vector<double>& grid, double v)
{
  return static_cast<std::size_t>(std::find(grid.begin(), grid.end(), v) - grid.begin());
}

} // namespace

TEST_CASE("signal models")
{
  const auto a = eval_signal(SignalModel::sig1, 0.4, 0.1);
  CHECK(a.first == 1.0);
  CHECK(a.second == 1.0);
  CHECK(a.total == 2.0);
  const auto b = eval_signal(SignalModel::sig2, 0.0, 0.0);
  CHECK(b.first == 0.0);
  CHECK(b.second == 1.0);
  CHECK(b.total == 1.0);
  const auto c = eval_signal(SignalModel::sig3, 0.0, 0.0);
  CHECK(c.total == 2.0);
  CHECK(parse_model("sig2") == SignalModel::sig2);
  CHECK_THROWS_AS(parse_model("sig4"), std::invalid_argument);
  CHECK(parse_design(to_string(Design::correlated_normal)) == Design::correlated_normal);
  CHECK_THROWS_AS(parse_design("gamma"), std::invalid_argument);
  CHECK_THROWS_AS(signal_component(SignalModel::sig1, 2, 0.0), std::out_of_range);
}

TEST_CASE("design samples")
{
  const auto u = sample_design(Design::uniform, 5000, 0.5, 3);
  CHECK(u.cwiseAbs().maxCoeff() <= 2.0);
  CHECK(u.cwiseAbs().maxCoeff() > 1.99);
  CHECK(sample_design(Design::uniform, 100, 0.5, 3) == sample_design(Design::uniform, 100, 0.5, 3));
  CHECK(sample_design(Design::uniform, 100, 0.5, 3) != sample_design(Design::uniform, 100, 0.5, 4));

  const auto n = sample_design(Design::correlated_normal, 100000, 0.5, 5);
  const Eigen::VectorXd a = n.col(0).array() - n.col(0).mean();
  const Eigen::VectorXd b = n.col(1).array() - n.col(1).mean();
  const double r = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
  CHECK(std::abs(r - 1.0 / std::sqrt(2.0)) < 0.01);
  CHECK(a.squaredNorm() / 1e5 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(b.squaredNorm() / 1e5 == doctest::Approx(1.0).epsilon(0.02));
  CHECK_THROWS_AS(sample_design(Design::uniform, 0, 0.5, 1), std::invalid_argument);
}

TEST_CASE("design densities integrate to one")
{
  for (Design d : { Design::uniform, Design::correlated_normal }) {
    const auto m = design_marginal(d, 0.5);
    CHECK(quad::adaptive_simpson(m.density, m.lower, m.upper, 1e-10) == doctest::Approx(1.0).epsilon(1e-8));
    const double joint = quad::simpson(
      [&](double a) {
        return quad::simpson([&](double b) { return design_joint_density(d, 0.5, a, b); }, m.lower, m.upper, 400);
      },
      m.lower, m.upper, 400);
    CHECK(joint == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("convolved truth")
{
  const auto fam = ConvolutionFamily::laplace({ 3.0, 3.0 });
  for (double x : { -2.0, 0.0, 1.3 })
    CHECK(convolve_with_psi(fam, 0, [](double) { return 2.5; }, x) == doctest::Approx(2.5).epsilon(1e-12));

  const double g = convolve_truth(SignalModel::sig3, fam, 1, 0.0);
  const auto integrand = [](double t) { return 1.5 * std::exp(-3.0 * std::abs(t)) / (1.0 + t * t); };
  const double oracle = 2.0 * testing::gauss_legendre(integrand, 0.0, 12.0, 2000);
  CHECK(std::abs(g - oracle) < 1e-8);

  for (double delta : { 0.1, 0.7, 1.9 })
    CHECK(std::abs(convolve_truth(SignalModel::sig1, fam, 0, 0.4 + delta) -
                   convolve_truth(SignalModel::sig1, fam, 0, 0.4 - delta)) < 1e-8);

  // kinked component of sig2 against an independent rule split at the kinks
  const double x = 0.35;
  const auto kinked = [&](double t) { return 1.5 * std::exp(-3.0 * std::abs(x - t)) * t * std::exp(-std::abs(t)); };
  const double ref = testing::gauss_legendre(kinked, x - 10.0, 0.0, 2000) + testing::gauss_legendre(kinked, 0.0, x, 200) +
                     testing::gauss_legendre(kinked, x, x + 10.0, 2000);
  CHECK(std::abs(convolve_truth(SignalModel::sig2, fam, 0, x) - ref) < 1e-9);
}

TEST_CASE("replicate generation")
{
  auto cfg = quick(1);
  cfg.noise_variance = 0.0;
  const auto fam = simulation_family(cfg);
  const auto clean = generate_replicate(cfg, fam, 0);
  for (Eigen::Index k = 0; k < 20; ++k)
    CHECK(clean.y(k) == convolve_truth(cfg.model, fam, 0, clean.x(k, 0)) + convolve_truth(cfg.model, fam, 1, clean.x(k, 1)));

  cfg = SimulationConfig{};
  const auto noisy = generate_replicate(cfg, fam, 0);
  cfg.noise_variance = 0.0;
  const auto truth = generate_replicate(cfg, fam, 0);
  CHECK(noisy.x == truth.x);
  const Eigen::VectorXd eps = noisy.y - truth.y;
  CHECK(std::abs(eps.mean()) < 4.0 * 0.5 / std::sqrt(701.0));

  const auto other_truth = generate_replicate(cfg, fam, 1);
  cfg.noise_variance = 0.25;
  const auto other = generate_replicate(cfg, fam, 1);
  CHECK((other.y - other_truth.y) != eps);
  CHECK(substream_seed(1, 0, 0) != substream_seed(1, 0, 1));
  CHECK(substream_seed(1, 0, 0) != substream_seed(1, 1, 0));
  CHECK(substream_seed(1, 0, 0) != substream_seed(2, 0, 0));
}

TEST_CASE("integrated squared error")
{
  const auto grid = quad::linspace(-2.0, 2.0, 101);
  std::vector<double> truth(grid.size()), est(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    truth[i] = std::sin(grid[i]);
    est[i] = truth[i] + 0.1;
  }
  CHECK(imse(grid, truth, truth) == 0.0);
  CHECK(imse(grid, est, truth) == doctest::Approx(0.04));
  const auto unit = quad::linspace(0.0, 1.0, 2001);
  const std::vector<double> zeros(unit.size(), 0.0);
  CHECK(imse(unit, unit, zeros) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  const std::vector<double> short_grid(5, 0.0);
  CHECK_THROWS_AS(imse(grid, short_grid, truth), std::invalid_argument);
}

TEST_CASE("sample quantile")
{
  CHECK(sample_quantile({ 3.0, 1.0, 2.0, 4.0 }, 0.5) == doctest::Approx(2.5));
  CHECK(sample_quantile({ 3.0, 1.0, 2.0, 4.0 }, 0.0) == 1.0);
  CHECK(sample_quantile({ 3.0, 1.0, 2.0, 4.0 }, 1.0) == 4.0);
  CHECK(sample_quantile({ 7.0 }, 0.05) == 7.0);
  CHECK_THROWS_AS(sample_quantile({}, 0.5), std::invalid_argument);
}

TEST_CASE("configuration checks")
{
  SimulationConfig c;
  CHECK_NOTHROW(c.validate());
  c.n = 5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimulationConfig{};
  c.replicates = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimulationConfig{};
  c.noise_variance = -0.1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimulationConfig{};
  c.grids.inversion.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimulationConfig{};
  c.bandwidth_mode = BandwidthMode::fixed;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("bandwidth search over single-value grids")
{
  SimulationConfig c;
  c.n = 201;
  c.pilot_replicates = 2;
  c.grids = SearchGrids{ { 1.0 }, { 0.1 }, { 0.3 } };
  const auto fam = simulation_family(c);
  for (BandwidthMode mode : { BandwidthMode::oracle, BandwidthMode::cross_validation }) {
    c.bandwidth_mode = mode;
    const auto b = bandwidth_search(c, fam);
    const double rule = 1.06 * (4.0 / std::sqrt(12.0)) * std::pow(201.0, -0.2);
    CHECK(b.density == std::vector<double>{ rule, rule });
    CHECK(b.backfit == 0.1);
    CHECK(b.inversion == std::vector<double>{ 0.3, 0.3 });
  }
}

TEST_CASE("oracle inversion bandwidth is interior and stable")
{
  SimulationConfig c;
  c.pilot_replicates = 25;
  c.threads = 1;
  std::vector<double> grid;
  for (int i = 0; i < 5; ++i)
    grid.push_back(0.1 * std::pow(12.0, i / 4.0));
  c.grids = SearchGrids{ { 1.0 }, { 0.1 }, grid };
  const auto fam = simulation_family(c);
  const auto b = bandwidth_search(c, fam);
  for (double h : b.inversion) {
    CHECK(h > grid.front());
    CHECK(h < grid.back());
  }
  c.pilot_replicates = 50;
  const auto doubled = bandwidth_search(c, fam);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto a = static_cast<int>(grid_index(grid, b.inversion[j]));
    const auto d = static_cast<int>(grid_index(grid, doubled.inversion[j]));
    CHECK(std::abs(a - d) <= 1);
  }
}

TEST_CASE("study is deterministic across thread counts")
{
  auto c = quick(4);
  const auto fam = simulation_family(c);
  const auto a = run_study(c, fam);
  c.threads = 3;
  const auto b = run_study(c, fam);
  CHECK(a.succeeded == 4);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(a.components[j].imse == b.components[j].imse);
    CHECK(a.components[j].mean == b.components[j].mean);
    CHECK(a.components[j].q05 == b.components[j].q05);
    CHECK(a.components[j].replicate_imse == b.components[j].replicate_imse);
  }
}

TEST_CASE("single replicate summaries coincide")
{
  const auto c = quick(1);
  const auto r = run_study(c, simulation_family(c));
  for (const auto& s : r.components) {
    CHECK(s.mean == s.q05);
    CHECK(s.mean == s.q95);
  }
}

TEST_CASE("noise free study has smaller error")
{
  auto c = quick(1);
  const auto fam = simulation_family(c);
  const double noisy = run_study(c, fam).components[0].imse;
  c.noise_variance = 0.0;
  const double clean = run_study(c, fam).components[0].imse;
  CHECK(clean > 0.0);
  CHECK(clean < noisy);
}

TEST_CASE("quantile curves bracket the mean")
{
  const auto c = quick(20);
  const auto r = run_study(c, simulation_family(c));
  CHECK(r.succeeded == 20);
  CHECK(r.failures.empty());
  for (const auto& s : r.components) {
    CHECK(s.imse >= 0.0);
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      CHECK(s.q05[i] <= s.mean[i]);
      CHECK(s.mean[i] <= s.q95[i]);
    }
  }
}

TEST_CASE("replicate failures are reported with their index")
{
  auto c = quick(3);
  c.fixed->backfit = 1e-4;
  const auto r = run_study(c, simulation_family(c));
  CHECK(r.succeeded == 0);
  REQUIRE(r.failures.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.failures[i].index == i);
    CHECK_FALSE(r.failures[i].message.empty());
  }
}
