#pragma once

// Step-function and kernel-smoothed estimators of univariate CDFs.

#include <span>
#include <variant>
#include <vector>

namespace mmv {

enum class KernelFamily { Gaussian, Epanechnikov };

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double bandwidth = 1.0;
};

/// Throws NonPositiveBandwidth unless h > 0 and finite.
void check_kernel(const KernelSpec& kernel);

struct StepMode {};
struct SmoothedMode {
  KernelFamily family = KernelFamily::Gaussian;
};
/// Bandwidth is resolved separately (see MvConfig); the mode only fixes the estimator.
using CdfMode = std::variant<StepMode, SmoothedMode>;

inline bool is_step(const CdfMode& mode) noexcept {
  return std::holds_alternative<StepMode>(mode);
}

/// Integral of the standardized kernel up to u, i.e. G(u) = int_{-inf}^{u} K.
double integrated_kernel(KernelFamily family, double u) noexcept;
/// The kernel density K(u) itself.
double kernel_density(KernelFamily family, double u) noexcept;

/// Fraction of samples <= z. `samples` must be sorted ascending.
double step_cdf(std::span<const double> sorted_samples, double z);

/// n^{-1} sum_i G((z - Z_i) / h).
double smoothed_cdf(std::span<const double> samples, double z, const KernelSpec& kernel);

struct PerClassCdf {
  double overall = 0.0;
  std::vector<double> per_class;
};

/// Unconditional and per-class CDF at z, sharing one estimator (and, when
/// smoothed, one bandwidth). Class ids are 0..num_classes-1.
PerClassCdf per_class_cdfs(std::span<const double> scores, std::span<const int> labels,
                           std::size_t num_classes, double z, const CdfMode& mode,
                           double bandwidth = 0.0);

/// h = 3 * sd(scores) * n^{-1/3} with the (n-1)-denominator sample sd.
double bandwidth_rule(std::span<const double> scores);

/// Exponent of n in bandwidth_rule.
inline constexpr double kBandwidthExponent = -1.0 / 3.0;

}  // namespace mmv
