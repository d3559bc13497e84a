#include "oracles.hpp"

#include "heraldsim/estimators.hpp"
#include "heraldsim/measured_data.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>
#include <random>

using namespace heraldsim;

namespace {

ProbabilityTable campaign_table(double p11, double p11_sigma) {
  const double half = 0.5 * measured::kCampaignPSum;
  return make_probability_table({half, 1e-8}, {half, 1e-8}, {p11, p11_sigma});
}

std::vector<FringePoint> fringe(double v, double amp, double phase0, int points) {
  std::vector<FringePoint> scan;
  for (int i = 0; i < points; ++i) {
    const double phi = 2 * std::numbers::pi * i / points;
    scan.push_back({phi, amp * (1 + v * std::cos(phi - phase0)), amp * (1 - v * std::cos(phi - phase0))});
  }
  return scan;
}

}  // namespace

TEST_CASE("probability table normalization") {
  const auto t = make_probability_table({1e-4, 1e-6}, {2e-4, 1e-6}, {1e-8, 1e-9});
  CHECK(t.p00.value == doctest::Approx(1 - 3e-4 - 1e-8));
  CHECK(t.p00.sigma == doctest::Approx(std::sqrt(2e-12 + 1e-18)));
  CHECK_THROWS(make_probability_table({0.7, 0}, {0.4, 0}, {0, 0}));
}

TEST_CASE("probabilities from blocked-arm records") {
  CountRecord a{1000, 30, 10, 5, 0, 0, 1e6, 0};
  CountRecord b{2000, 20, 40, 10, 0, 0, 1e6, 0};
  const auto t = probabilities_from_counts(a, b, {1e-5, 0});
  CHECK(t.p10.value == doctest::Approx(35.0 / 1000));
  CHECK(t.p01.value == doctest::Approx(50.0 / 2000));
}

TEST_CASE("cross-correlation estimate from counts") {
  const auto g = gsi_from_counts(100, 1000, 1000, 1e5);
  CHECK(g.value == doctest::Approx(10.0));
  CHECK(g.sigma > 0);
  CHECK_THROWS(gsi_from_counts(1, 0, 10, 10));
}

TEST_CASE("threefold probability from cross-correlation") {
  const auto p = p11_xcorr({1e-4, 0}, {2e-4, 0}, {9.0, 0});
  CHECK(p.value == doctest::Approx(1e-8));
  CHECK_THROWS_AS(p11_xcorr({1e-4, 0}, {1e-4, 0}, {1.0, 0}), std::domain_error);
}

TEST_CASE("concurrence bound examples") {
  const auto c = concurrence_bound({0.965, 0.012}, campaign_table(2.9e-9, 2.1e-9));
  CHECK(c.value == doctest::Approx(6.39e-5).epsilon(1e-3));
  CHECK(c.sigma == doctest::Approx(3.8e-5).epsilon(0.05));
  // No threefolds: no subtraction.
  const auto free = concurrence_bound({0.965, 0}, campaign_table(0, 0));
  CHECK(free.value == doctest::Approx(0.965 * measured::kCampaignPSum));
  // Clamped at zero when the subtraction dominates.
  CHECK(concurrence_bound({0.1, 0}, campaign_table(1e-6, 0)).value == 0.0);
}

TEST_CASE("concurrence bound is monotone") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    const double v = u(rng), dv = 0.1 * u(rng);
    const double p11 = 1e-9 * (1 + 10 * u(rng)), dp = 1e-9 * u(rng);
    const auto t = campaign_table(p11, 0);
    const auto t2 = campaign_table(p11 + dp, 0);
    CHECK(concurrence_bound({std::min(1.0, v + dv), 0}, t).value >= concurrence_bound({v, 0}, t).value);
    CHECK(concurrence_bound({v, 0}, t2).value <= concurrence_bound({v, 0}, t).value);
  }
}

TEST_CASE("bootstrap agrees with the delta method") {
  const auto t = make_probability_table({1e-3, 2e-5}, {1e-3, 2e-5}, {2e-8, 2e-9});
  const auto c = concurrence_bound({0.9, 0.01}, t);
  const double boot = bootstrap_concurrence_sigma({0.9, 0.01}, t, 20000, 5);
  CHECK(boot == doctest::Approx(c.sigma).epsilon(0.1));
  CHECK(bootstrap_concurrence_sigma({0.9, 0.01}, t, 2000, 5) == bootstrap_concurrence_sigma({0.9, 0.01}, t, 2000, 5));
}

TEST_CASE("threefold estimators") {
  const auto mle = threefold_estimate(2, 1.566e9, ThreefoldMethod::mle);
  CHECK(mle.p11.value == doctest::Approx(2.27 * 2 / 1.566e9));
  CHECK(mle.p11.sigma == doctest::Approx(2.27 * std::sqrt(2.0) / 1.566e9));
  const auto ce0 = threefold_estimate(0, 1e6, ThreefoldMethod::ce, 1.0);
  CHECK(ce0.p11.value == doctest::Approx(1e-6));
  CHECK(ce0.p11.sigma == ce0.p11.value);
  for (std::uint64_t n = 0; n < 20; ++n) {
    CHECK(threefold_estimate(n, 1e6, ThreefoldMethod::ce).p11.value >
          threefold_estimate(n, 1e6, ThreefoldMethod::mle).p11.value);
    CHECK(threefold_estimate(n, 2e6, ThreefoldMethod::ce).p11.value ==
          doctest::Approx(0.5 * threefold_estimate(n, 1e6, ThreefoldMethod::ce).p11.value));
  }
  CHECK_THROWS(threefold_estimate(1, 0.0, ThreefoldMethod::mle));
}

TEST_CASE("posterior against quadrature") {
  for (std::uint64_t n : {0u, 3u, 10u}) {
    const double heralds = 1e4;
    const PosteriorDensity post(n, heralds);
    const auto in_x = [&](double x) { return post(x / heralds) / heralds; };
    CHECK(oracle::moment(in_x, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(oracle::moment(in_x, 1) / heralds == doctest::Approx(post.mean()).epsilon(1e-10));
    CHECK(oracle::moment(in_x, 2) / (heralds * heralds) == doctest::Approx(post.second_moment()).epsilon(1e-10));
  }
  CHECK(PosteriorDensity(0, 10).operator()(-1.0) == 0.0);
}

TEST_CASE("fringe fit round trip") {
  const auto fits = fit_visibility(fringe(0.965, 500, 0.3, 12));
  CHECK(fits.detector1.visibility.value == doctest::Approx(0.965).epsilon(1e-9));
  CHECK(fits.detector2.visibility.value == doctest::Approx(0.965).epsilon(1e-9));
  CHECK(fits.detector1.phase0 == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(fits.detector1.amplitude == doctest::Approx(500).epsilon(1e-9));
  CHECK(fit_visibility(fringe(0.0, 500, 0.0, 8)).detector1.visibility.value == doctest::Approx(0.0));
}

TEST_CASE("fringe fit errors") {
  auto scan = fringe(0.5, 100, 0, 8);
  scan.resize(3);
  CHECK_THROWS(fit_visibility(scan));
  auto repeated = fringe(0.5, 100, 0, 4);
  repeated.push_back(repeated.front());
  repeated[1].phase = repeated[0].phase + 2 * std::numbers::pi;
  CHECK_THROWS(fit_visibility(repeated));
  CHECK_THROWS(fit_visibility(fringe(0.5, 0, 0, 8)));
}

TEST_CASE("simple concurrence") {
  CHECK(simple_concurrence(2.2e-4, 0.965, 10) == doctest::Approx(6.56e-5).epsilon(1e-3));
  CHECK(simple_concurrence(0.3, 2 / std::sqrt(9.0), 10) == doctest::Approx(0.0));
  CHECK(simple_concurrence(1, 1, INFINITY) == 1.0);
  CHECK_THROWS(simple_concurrence(0.1, 0.9, 1.0));
}
