#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "freepath/constants.hpp"
#include "freepath/pointsets.hpp"
#include "freepath/simulate.hpp"
#include "freepath/stats.hpp"

using namespace freepath;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

// Oracle: recount the histogram per threshold with the same floating-point
// comparison the estimator defines, one bin at a time.
std::uint64_t naive_count_ge(const StepHistogram& h, double eps, double T) {
  std::uint64_t count = h.censored;
  for (std::uint64_t k = 1; k <= h.cap; ++k)
    if (static_cast<double>(k) * eps >= T) count += h.hits[k];
  return count;
}

// Synthetic curve with survival(T) = phi(T) to ~2^-40: counts are rounded
// against n = 2^40, keeping n * survival an exact integer.
template <class Phi>
SurvivalCurve synthetic_curve(const std::vector<double>& thresholds, Phi phi,
                              double censor_limit) {
  SurvivalCurve c;
  c.n = std::uint64_t{1} << 40;
  c.epsilon = 1e-3;
  c.censor_limit = censor_limit;
  c.field_tag = "synthetic";
  c.thresholds = thresholds;
  for (const double T : thresholds) {
    const auto count = static_cast<std::uint64_t>(
        std::llround(phi(T) * static_cast<double>(c.n)));
    c.count_ge.push_back(count);
    c.survival.push_back(static_cast<double>(count) /
                         static_cast<double>(c.n));
  }
  return c;
}

}  // namespace

TEST_CASE("survival estimator hand cases", "[stats]") {
  StepHistogram h(4);
  for (std::uint64_t k = 1; k <= 4; ++k) h.add(TrajectoryOutcome::hit(k));

  const SurvivalCurve c =
      survival_from_steps(h, 1.0, {0.5, 2.5, 4.0}, "demo");
  CHECK(c.n == 4);
  CHECK(c.censor_limit == 4.0);
  CHECK(c.field_tag == "demo");
  CHECK(c.count_ge == std::vector<std::uint64_t>{4, 2, 1});
  CHECK(c.survival[0] == 1.0);
  CHECK(c.survival[1] == 0.5);
  CHECK(c.survival[2] == 0.25);

  StepHistogram censored(10);
  for (int i = 0; i < 7; ++i) censored.add(TrajectoryOutcome::censored_at(10));
  const SurvivalCurve all =
      survival_from_steps(censored, 0.5, {0.1, 2.0, 5.0});
  CHECK(all.survival == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("survival equals a naive recount on random histograms", "[stats]") {
  std::mt19937_64 rng(20240815);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint64_t cap = 3 + rng() % 58;
    StepHistogram h(cap);
    for (std::uint64_t k = 1; k <= cap; ++k) h.hits[k] = rng() % 6;
    h.censored = rng() % 10;
    h.total = h.censored;
    for (std::uint64_t k = 1; k <= cap; ++k) h.total += h.hits[k];
    if (h.total == 0) {
      h.censored = 1;
      h.total = 1;
    }
    const double eps = 0.01 + 1.99 * u(rng);
    const double censor = eps * static_cast<double>(cap);

    std::vector<double> ts;
    for (int i = 0; i < 8; ++i) ts.push_back(u(rng) * censor);
    std::sort(ts.begin(), ts.end());
    std::vector<double> grid;
    for (const double t : ts)
      if (t > 0.0 && (grid.empty() || t > grid.back() + 1e-12 * censor))
        grid.push_back(t);
    if (grid.empty()) grid.push_back(censor);

    const SurvivalCurve c = survival_from_steps(h, eps, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::uint64_t want = naive_count_ge(h, eps, grid[i]);
      REQUIRE(c.count_ge[i] == want);
      REQUIRE(c.survival[i] == static_cast<double>(want) /
                                   static_cast<double>(h.total));
      if (i > 0) REQUIRE(c.survival[i] <= c.survival[i - 1]);
      // n * survival recovers the integer numerator
      REQUIRE(std::llround(c.survival[i] * static_cast<double>(c.n)) ==
              static_cast<long long>(want));
    }
  }
}

TEST_CASE("survival at the censor limit absorbs the censored mass", "[stats]") {
  StepHistogram h(20);
  for (int i = 0; i < 5; ++i) h.add(TrajectoryOutcome::hit(20));
  for (int i = 0; i < 3; ++i) h.add(TrajectoryOutcome::censored_at(20));
  for (int i = 0; i < 12; ++i) h.add(TrajectoryOutcome::hit(1 + i % 7));
  const double eps = 0.1;
  const double censor = eps * 20.0;
  const SurvivalCurve c = survival_from_steps(h, eps, {censor});
  CHECK(c.count_ge[0] == 8);  // Hit(cap) mass plus every censored outcome
  CHECK(c.survival[0] == 0.4);
}

TEST_CASE("survival input validation", "[stats]") {
  StepHistogram h(5);
  h.add(TrajectoryOutcome::hit(2));

  CHECK_THROWS_AS(survival_from_steps(h, 0.0, {1.0}), std::domain_error);
  CHECK_THROWS_AS(survival_from_steps(h, 1.0, {}), std::domain_error);
  CHECK_THROWS_AS(survival_from_steps(h, 1.0, {1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(survival_from_steps(h, 1.0, {-1.0, 2.0}), std::domain_error);

  CHECK_THROWS_WITH(survival_from_steps(h, 1.0, {6.0}),
                    ContainsSubstring("beyond censor limit") &&
                        ContainsSubstring("6.000000"));

  StepHistogram empty(5);
  CHECK_THROWS_AS(survival_from_steps(empty, 1.0, {1.0}), std::domain_error);
  StepHistogram mangled(5);
  mangled.add(TrajectoryOutcome::hit(1));
  mangled.hits.resize(3);
  CHECK_THROWS_AS(survival_from_steps(mangled, 1.0, {1.0}),
                  std::domain_error);
}

TEST_CASE("threshold resolution matches the step grid exactly", "[stats]") {
  CHECK(detail::smallest_step_at_least(2.5, 1.0) == 3);
  CHECK(detail::smallest_step_at_least(3.0, 1.0) == 3);
  CHECK(detail::smallest_step_at_least(0.05, 0.1) == 1);
  CHECK(detail::smallest_step_at_least(1e-12, 0.5) == 1);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double eps = 0.001 + u(rng);
    const double T = u(rng) * 100.0 + 1e-9;
    const std::uint64_t k = detail::smallest_step_at_least(T, eps);
    REQUIRE(static_cast<double>(k) * eps >= T);
    if (k > 1) REQUIRE(static_cast<double>(k - 1) * eps < T);
  }
}

TEST_CASE("log-spaced threshold grid", "[stats]") {
  const auto g = default_thresholds(1.0, 100.0, 3);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == Approx(10.0).epsilon(1e-12));
  CHECK(g[2] == 100.0);

  const auto h = default_thresholds(0.1, 10.0, 5);
  CHECK(h[1] == Approx(std::sqrt(0.1)).epsilon(1e-12));
  CHECK(h[2] == Approx(1.0).epsilon(1e-12));
  CHECK(h[3] == Approx(std::sqrt(10.0)).epsilon(1e-12));

  CHECK_THROWS_AS(default_thresholds(0.0, 1.0, 4), std::domain_error);
  CHECK_THROWS_AS(default_thresholds(2.0, 1.0, 4), std::domain_error);
  CHECK_THROWS_AS(default_thresholds(1.0, 2.0, 1), std::domain_error);
  CHECK_THROWS_AS(default_thresholds(1.0, 1.0 + 1e-15, 64),
                  std::domain_error);
}

TEST_CASE("tail fits recover planted curves", "[stats]") {
  const auto grid = default_thresholds(0.5, 5.0, 40);

  SECTION("power law") {
    const auto c = synthetic_curve(
        grid, [](double T) { return 0.5 / T; }, 50.0);
    const TailFit fit = fit_power_tail(c, 0.5, 5.0);
    CHECK(fit.model == TailModel::power_law);
    CHECK(fit.param == Approx(-1.0).margin(1e-6));
    CHECK(fit.prefactor == Approx(0.5).epsilon(1e-6));
    CHECK(fit.rms_residual <= 1e-6);
    CHECK(fit.points_used == 40);
    CHECK(fit.dropped_zeros == 0);
    CHECK(fit.fit_lo == 0.5);
    CHECK(fit.fit_hi == 5.0);

    // the wrong model family leaves visible curvature
    const TailFit wrong = fit_exponential_tail(c, 0.5, 5.0);
    CHECK(wrong.rms_residual > 0.01);
  }

  SECTION("exponential") {
    const auto c = synthetic_curve(
        grid, [](double T) { return std::exp(-2.0 * T); }, 50.0);
    const TailFit fit = fit_exponential_tail(c, 0.5, 5.0);
    CHECK(fit.model == TailModel::exponential);
    CHECK(fit.param == Approx(2.0).margin(1e-6));
    CHECK(fit.prefactor == Approx(1.0).epsilon(1e-6));
    CHECK(fit.rms_residual <= 1e-6);

    const TailFit wrong = fit_power_tail(c, 0.5, 5.0);
    CHECK(wrong.rms_residual > 0.01);
  }

  SECTION("half-window restriction") {
    const auto c = synthetic_curve(
        grid, [](double T) { return 0.5 / T; }, 50.0);
    const TailFit fit = fit_power_tail(c, 1.0, 3.0);
    CHECK(fit.param == Approx(-1.0).margin(1e-6));
    CHECK(fit.points_used ==
          static_cast<std::size_t>(std::count_if(
              grid.begin(), grid.end(),
              [](double t) { return t >= 1.0 && t <= 3.0; })));
  }
}

TEST_CASE("zero-survival points are dropped, not clamped", "[stats]") {
  const auto grid = default_thresholds(0.5, 5.0, 24);
  const auto c = synthetic_curve(
      grid, [](double T) { return T <= 3.0 ? 0.4 / T : 0.0; }, 50.0);
  const std::size_t zeros = static_cast<std::size_t>(
      std::count(c.count_ge.begin(), c.count_ge.end(), std::uint64_t{0}));
  REQUIRE(zeros >= 4);

  const TailFit fit = fit_power_tail(c, 0.5, 5.0);
  CHECK(fit.dropped_zeros == zeros);
  CHECK(fit.points_used == grid.size() - zeros);
  CHECK(fit.param == Approx(-1.0).margin(1e-6));

  CHECK_THROWS_AS(fit_power_tail(c, 3.2, 5.0), insufficient_data_error);
  CHECK_THROWS_WITH(fit_power_tail(c, 3.2, 5.0),
                    ContainsSubstring("need at least 5"));
}

TEST_CASE("fit range validation", "[stats]") {
  const auto grid = default_thresholds(0.5, 5.0, 16);
  const auto c = synthetic_curve(
      grid, [](double T) { return 0.5 / T; }, 50.0);
  CHECK_THROWS_AS(fit_power_tail(c, 2.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(fit_power_tail(c, 5.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(fit_power_tail(c, 0.5, 51.0), std::domain_error);
  CHECK_THROWS_AS(fit_power_tail(c, 4.9, 5.0), insufficient_data_error);
}

TEST_CASE("poisson batch survival tracks the exponential law", "[stats]") {
  const GoldenConstants k = golden_constants();
  const SimConfig cfg = SimConfig::defaults(1e-3, 1'000'000, 5);
  const ScattererField field = ScattererField::poisson(k.alpha, 123);
  const StepHistogram h = run_batch(cfg, field, 1);
  const SurvivalCurve c =
      survival_from_steps(h, cfg.epsilon, {0.5, 1.0, 2.0}, "poisson");
  for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
    const double p = std::exp(-k.alpha * c.thresholds[i]);
    const double se =
        std::sqrt(p * (1.0 - p) / static_cast<double>(c.n));
    // 3e-4 covers the geometric-vs-exponential step discretization bias
    REQUIRE(std::fabs(c.survival[i] - p) <= 3.0 * se + 3e-4);
  }
}

TEST_CASE("sup distance between curves on a shared grid", "[stats]") {
  const auto grid = default_thresholds(0.2, 5.0, 20);
  const auto a = synthetic_curve(
      grid, [](double T) { return 0.5 / T; }, 50.0);
  auto b = a;
  CHECK(curve_sup_distance(a, b, 0.5) == 0.0);

  b.survival[10] += 0.125;
  CHECK(curve_sup_distance(a, b, 0.5) == 0.125);
  // below t_min the difference is invisible
  b = a;
  b.survival[0] += 0.5;
  CHECK(curve_sup_distance(a, b, 0.5) == 0.0);

  // grids may differ below t_min only
  SurvivalCurve c = a;
  c.thresholds[0] *= 0.9;
  CHECK(curve_sup_distance(a, c, 0.5) == 0.0);
  c = a;
  c.thresholds[12] *= 1.001;
  CHECK_THROWS_AS(curve_sup_distance(a, c, 0.5), std::domain_error);
  SurvivalCurve d = a;
  d.thresholds.pop_back();
  d.survival.pop_back();
  d.count_ge.pop_back();
  CHECK_THROWS_AS(curve_sup_distance(a, d, 0.5), std::domain_error);
  CHECK_THROWS_AS(curve_sup_distance(a, b, 100.0), std::domain_error);
}
