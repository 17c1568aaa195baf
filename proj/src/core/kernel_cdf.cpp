#include "mmv/kernel_cdf.hpp"

#include "mmv/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mmv {

void check_kernel(const KernelSpec& kernel) {
  if (!(kernel.bandwidth > 0.0) || !std::isfinite(kernel.bandwidth)) {
    throw MmvError(ErrorCode::NonPositiveBandwidth,
                   "bandwidth must be positive and finite, got " + std::to_string(kernel.bandwidth));
  }
}

double integrated_kernel(KernelFamily family, double u) noexcept {
  switch (family) {
    case KernelFamily::Gaussian:
      return 0.5 * std::erfc(-u * std::numbers::sqrt2 / 2.0);
    case KernelFamily::Epanechnikov:
      if (u <= -1.0) return 0.0;
      if (u >= 1.0) return 1.0;
      return 0.5 + 0.75 * u - 0.25 * u * u * u;
  }
  return 0.0;
}

double kernel_density(KernelFamily family, double u) noexcept {
  switch (family) {
    case KernelFamily::Gaussian:
      return std::exp(-0.5 * u * u) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
    case KernelFamily::Epanechnikov:
      return std::abs(u) >= 1.0 ? 0.0 : 0.75 * (1.0 - u * u);
  }
  return 0.0;
}

double step_cdf(std::span<const double> sorted_samples, double z) {
  if (sorted_samples.empty()) throw MmvError(ErrorCode::EmptySample, "step_cdf of empty sample");
  const auto below = std::upper_bound(sorted_samples.begin(), sorted_samples.end(), z);
  return static_cast<double>(below - sorted_samples.begin()) /
         static_cast<double>(sorted_samples.size());
}

double smoothed_cdf(std::span<const double> samples, double z, const KernelSpec& kernel) {
  if (samples.empty()) throw MmvError(ErrorCode::EmptySample, "smoothed_cdf of empty sample");
  check_kernel(kernel);
  double total = 0.0;
  for (double s : samples) total += integrated_kernel(kernel.family, (z - s) / kernel.bandwidth);
  return total / static_cast<double>(samples.size());
}

PerClassCdf per_class_cdfs(std::span<const double> scores, std::span<const int> labels,
                           std::size_t num_classes, double z, const CdfMode& mode,
                           double bandwidth) {
  if (scores.size() != labels.size()) {
    throw MmvError(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  }
  if (scores.empty()) throw MmvError(ErrorCode::EmptySample, "per_class_cdfs of empty sample");
  const auto* smoothed = std::get_if<SmoothedMode>(&mode);
  if (smoothed) check_kernel({smoothed->family, bandwidth});

  std::vector<double> mass(num_classes, 0.0);
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto r = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || r >= num_classes) {
      throw MmvError(ErrorCode::InvalidArgument, "label outside 0..R-1");
    }
    ++counts[r];
    mass[r] += smoothed ? integrated_kernel(smoothed->family, (z - scores[i]) / bandwidth)
                        : (scores[i] <= z ? 1.0 : 0.0);
  }

  PerClassCdf out;
  out.per_class.resize(num_classes);
  double total = 0.0;
  for (std::size_t r = 0; r < num_classes; ++r) {
    if (counts[r] == 0) {
      throw MmvError(ErrorCode::EmptyClass, "class " + std::to_string(r) + " has no samples");
    }
    out.per_class[r] = mass[r] / static_cast<double>(counts[r]);
    total += mass[r];
  }
  out.overall = total / static_cast<double>(scores.size());
  return out;
}

double bandwidth_rule(std::span<const double> scores) {
  const auto n = scores.size();
  if (n < 2) throw MmvError(ErrorCode::EmptySample, "bandwidth_rule needs at least 2 scores");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) throw MmvError(ErrorCode::DegenerateScores, "scores have zero variance");
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw MmvError(ErrorCode::DegenerateScores, "scores have zero variance");
  return 3.0 * sd * std::pow(static_cast<double>(n), kBandwidthExponent);
}

}  // namespace mmv
