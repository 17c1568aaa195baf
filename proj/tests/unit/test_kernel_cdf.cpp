#include "doctest.h"
#include "helpers.hpp"

#include "mmv/kernel_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace mmv;
using mmv::testing::error_of;

namespace {

// Composite Simpson rule of the kernel density on [a, b].
double integrate_density(KernelFamily family, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double s = kernel_density(family, a) + kernel_density(family, b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * kernel_density(family, a + k * h);
  return s * h / 3.0;
}

double integrate_moment(KernelFamily family, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  auto f = [&](double u) { return u * kernel_density(family, u); };
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

std::vector<double> random_scores(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> z(n);
  for (auto& v : z) v = rng.normal();
  return z;
}

}  // namespace

TEST_CASE("step_cdf counts samples <= z") {
  const std::vector<double> s{1, 2, 3, 4};
  CHECK(step_cdf(s, 2.0) == 0.5);
  CHECK(step_cdf(s, 0.5) == 0.0);
  CHECK(step_cdf(s, 4.0) == 1.0);
  CHECK(step_cdf(s, 9.0) == 1.0);
  CHECK(step_cdf(s, 1.999999) == 0.25);
  const std::vector<double> ties{1, 1, 2};
  CHECK(step_cdf(ties, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(error_of([] { step_cdf(std::vector<double>{}, 0.0); }) == ErrorCode::EmptySample);
}

TEST_CASE("smoothed_cdf examples") {
  const std::vector<double> zero{0.0};
  for (double h : {1e-3, 0.7, 25.0}) {
    CHECK(smoothed_cdf(zero, 0.0, {KernelFamily::Gaussian, h}) == 0.5);
    CHECK(smoothed_cdf(zero, 0.0, {KernelFamily::Epanechnikov, h}) == 0.5);
  }
  const std::vector<double> s{1, 2, 3, 4};
  CHECK(smoothed_cdf(s, 1e6, {KernelFamily::Gaussian, 1.0}) == 1.0);
  CHECK(smoothed_cdf(s, -1e6, {KernelFamily::Gaussian, 1.0}) == 0.0);
  CHECK(std::abs(smoothed_cdf(s, 2.5, {KernelFamily::Gaussian, 1e-6}) - 0.5) <= 1e-6);

  // Gaussian smoothing is the average of Phi((z - Z_i) / h).
  const double expected =
      (mmv::testing::phi(1.5 / 0.8) + mmv::testing::phi(0.5 / 0.8) + mmv::testing::phi(-0.5 / 0.8) +
       mmv::testing::phi(-1.5 / 0.8)) / 4.0;
  CHECK(smoothed_cdf(s, 2.5, {KernelFamily::Gaussian, 0.8}) == doctest::Approx(expected).epsilon(1e-14));

  CHECK(error_of([] { smoothed_cdf(std::vector<double>{}, 0.0, {}); }) == ErrorCode::EmptySample);
  CHECK(error_of([&] { smoothed_cdf(s, 0.0, {KernelFamily::Gaussian, 0.0}); }) ==
        ErrorCode::NonPositiveBandwidth);
  CHECK(error_of([&] { smoothed_cdf(s, 0.0, {KernelFamily::Gaussian, -1.0}); }) ==
        ErrorCode::NonPositiveBandwidth);
}

TEST_CASE("kernels integrate to one, are centred and match their integrated form") {
  for (auto family : {KernelFamily::Gaussian, KernelFamily::Epanechnikov}) {
    CAPTURE(static_cast<int>(family));
    CHECK(integrate_density(family, -12.0, 12.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(integrate_moment(family, -12.0, 12.0)) < 1e-12);
    CHECK(integrated_kernel(family, 0.0) == 0.5);
    for (double u : {-2.5, -0.9, -0.3, 0.2, 0.75, 1.6}) {
      // The Epanechnikov density is a polynomial on its support, where Simpson's rule is exact.
      const bool compact = family == KernelFamily::Epanechnikov;
      const double lo = compact ? -1.0 : -12.0;
      const double hi = compact ? std::min(u, 1.0) : u;
      CHECK(integrated_kernel(family, u) == doctest::Approx(integrate_density(family, lo, hi)).epsilon(1e-9));
      CHECK(integrated_kernel(family, -u) == doctest::Approx(1.0 - integrated_kernel(family, u)).epsilon(1e-14));
    }
  }
  CHECK(integrated_kernel(KernelFamily::Epanechnikov, -1.0) == 0.0);
  CHECK(integrated_kernel(KernelFamily::Epanechnikov, 1.0) == 1.0);
  CHECK(integrated_kernel(KernelFamily::Epanechnikov, 3.0) == 1.0);
  CHECK(kernel_density(KernelFamily::Epanechnikov, 1.5) == 0.0);
}

TEST_CASE("property: smoothed_cdf is nondecreasing with limits 0 and 1") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto z = random_scores(30, seed);
    RngStream grid_rng(seed + 100);
    std::vector<double> grid(300);
    for (auto& g : grid) g = 8.0 * (grid_rng.uniform() - 0.5);
    std::sort(grid.begin(), grid.end());
    for (auto family : {KernelFamily::Gaussian, KernelFamily::Epanechnikov}) {
      const KernelSpec k{family, 0.1 + 0.05 * static_cast<double>(seed)};
      double prev = 0.0;
      for (double g : grid) {
        const double f = smoothed_cdf(z, g, k);
        REQUIRE(f >= prev);
        REQUIRE(f >= 0.0);
        REQUIRE(f <= 1.0);
        prev = f;
      }
      CHECK(smoothed_cdf(z, -1e9, k) == 0.0);
      CHECK(smoothed_cdf(z, 1e9, k) == 1.0);
    }
  }
}

TEST_CASE("property: smoothed_cdf converges to step_cdf as h -> 0") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto z = random_scores(25, seed);
    std::vector<double> sorted = z;
    std::sort(sorted.begin(), sorted.end());
    const double range = sorted.back() - sorted.front();
    const KernelSpec k{KernelFamily::Gaussian, 1e-6 * range};
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const double mid = 0.5 * (sorted[i] + sorted[i + 1]);
      CHECK(std::abs(smoothed_cdf(z, mid, k) - step_cdf(sorted, mid)) <= 1e-6);
    }
  }
}

TEST_CASE("per_class_cdfs") {
  const std::vector<double> s{1, 2, 3, 4};
  const std::vector<int> y{0, 0, 1, 1};
  const auto step = per_class_cdfs(s, y, 2, 2.0, StepMode{});
  CHECK(step.overall == 0.5);
  CHECK(step.per_class == std::vector<double>{1.0, 0.0});

  const std::vector<double> flat{3, 3, 3, 3};
  const auto tied = per_class_cdfs(flat, y, 2, 3.0, StepMode{});
  CHECK(tied.overall == 1.0);
  CHECK(tied.per_class == std::vector<double>{1.0, 1.0});

  const std::vector<int> missing{0, 0, 2, 2};
  CHECK(error_of([&] { per_class_cdfs(s, missing, 3, 2.0, StepMode{}); }) == ErrorCode::EmptyClass);
  CHECK(error_of([&] { per_class_cdfs(s, y, 2, 2.0, SmoothedMode{}, 0.0); }) ==
        ErrorCode::NonPositiveBandwidth);
}

TEST_CASE("property: class mixture of per-class CDFs equals the overall CDF") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    RngStream rng(seed);
    const std::size_t n = 5 + rng.below(40);
    const std::size_t classes = 2 + rng.below(3);
    std::vector<double> z(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = std::round(4.0 * rng.normal()) / 2.0;  // ties on purpose
      y[i] = static_cast<int>(i < classes ? i : rng.below(classes));
    }
    std::vector<double> pr(classes, 0.0);
    for (int l : y) pr[static_cast<std::size_t>(l)] += 1.0 / static_cast<double>(n);
    for (double at : {-3.0, -0.5, 0.0, 0.25, 1.0, 2.5}) {
      const auto step = per_class_cdfs(z, y, classes, at, StepMode{});
      const auto smooth = per_class_cdfs(z, y, classes, at, SmoothedMode{}, 0.4);
      double mix_step = 0.0;
      double mix_smooth = 0.0;
      for (std::size_t r = 0; r < classes; ++r) {
        mix_step += pr[r] * step.per_class[r];
        mix_smooth += pr[r] * smooth.per_class[r];
      }
      CHECK(std::abs(mix_step - step.overall) <= 1e-12);
      CHECK(std::abs(mix_smooth - smooth.overall) <= 1e-10);
    }
  }
}

TEST_CASE("bandwidth_rule") {
  // Exactly standardized scores: sd = 1, n = 1000.
  auto z = random_scores(1000, 3);
  double mean = 0.0;
  for (double v : z) mean += v / 1000.0;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 999.0);
  for (auto& v : z) v = (v - mean) / sd;
  CHECK(bandwidth_rule(z) == doctest::Approx(0.3).epsilon(1e-12));

  // sd = 2 with n = 8: values +-2 * sqrt(7/8).
  const double a = 2.0 * std::sqrt(7.0 / 8.0);
  const std::vector<double> eight{a, -a, a, -a, a, -a, a, -a};
  CHECK(bandwidth_rule(eight) == doctest::Approx(3.0).epsilon(1e-12));

  const std::vector<double> constant(10, 4.2);
  CHECK(error_of([&] { bandwidth_rule(constant); }) == ErrorCode::DegenerateScores);
  CHECK(error_of([] { bandwidth_rule(std::vector<double>{1.0}); }).has_value());

  // n h^4 -> 0 requires 1 + 4 * exponent < 0.
  CHECK(kBandwidthExponent == doctest::Approx(-1.0 / 3.0));
  CHECK(1.0 + 4.0 * kBandwidthExponent < 0.0);
  const std::vector<double> small{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<double> big;
  for (int rep = 0; rep < 8; ++rep) big.insert(big.end(), small.begin(), small.end());
  // Same spread, 8x the sample: h shrinks by 8^{-1/3} times the (n - 1) correction of the sd.
  const double ratio = bandwidth_rule(big) / bandwidth_rule(small);
  const double sd_ratio = std::sqrt((64.0 / 63.0) / (8.0 / 7.0));
  CHECK(ratio == doctest::Approx(0.5 * sd_ratio).epsilon(1e-12));
}
