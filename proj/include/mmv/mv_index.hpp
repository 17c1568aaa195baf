#pragma once

// Empirical mean-variance (MV) dependence index between a scalar score and a
// categorical label:
//
//   MV_n(Z|Y) = (1/n) sum_r sum_i p_r [F(Z_i) - F_r(Z_i)]^2
//
// with F, F_r either step or kernel-smoothed CDF estimators sharing a single
// bandwidth. Also hosts the gradient in the projection direction, marginal
// screening and the closed-form population value for two Gaussian classes.

#include "mmv/core_model.hpp"
#include "mmv/kernel_cdf.hpp"

#include <Eigen/Dense>

#include <span>
#include <variant>
#include <vector>

namespace mmv {

struct FixedBandwidth {
  double value = 1.0;
};
/// h = 3 sd(scores) n^{-1/3}, evaluated on the scores being smoothed.
struct RuleOfThumbBandwidth {};
using BandwidthSource = std::variant<FixedBandwidth, RuleOfThumbBandwidth>;

struct MvConfig {
  CdfMode cdf_mode = SmoothedMode{};
  BandwidthSource bandwidth = RuleOfThumbBandwidth{};

  static MvConfig step() { return {StepMode{}, RuleOfThumbBandwidth{}}; }
  static MvConfig smoothed(KernelFamily family = KernelFamily::Gaussian) {
    return {SmoothedMode{family}, RuleOfThumbBandwidth{}};
  }
  static MvConfig smoothed_fixed(double h, KernelFamily family = KernelFamily::Gaussian) {
    return {SmoothedMode{family}, FixedBandwidth{h}};
  }
};

/// Throws NonPositiveBandwidth for a non-positive fixed bandwidth.
void check_mv_config(const MvConfig& config);

/// Bandwidth the config implies for these scores (0 in step mode).
double resolve_bandwidth(std::span<const double> scores, const MvConfig& config);

/// Copy of `config` with the bandwidth pinned to `h` (no-op in step mode).
MvConfig freeze_bandwidth(const MvConfig& config, double h);

/// MV_n in [0, 1]. Labels are class ids 0..num_classes-1, each class nonempty.
/// Step mode runs in O(n log n + nR); smoothed mode is the exact O(n^2) double sum.
double mv_empirical(std::span<const double> scores, std::span<const int> labels,
                    std::size_t num_classes, const MvConfig& config);

struct MvValueGradient {
  double value = 0.0;
  /// d MV_n / d Z_i with the bandwidth held fixed.
  Eigen::VectorXd score_gradient;
};

/// Smoothed MV_n and its exact derivative with respect to every score.
MvValueGradient mv_value_and_score_gradient(std::span<const double> scores,
                                            std::span<const int> labels,
                                            std::size_t num_classes, KernelFamily family,
                                            double bandwidth);

/// Scores X beta.
std::vector<double> project(const Dataset& data, const Eigen::VectorXd& beta);

double mv_of_direction(const Dataset& data, const Eigen::VectorXd& beta, const MvConfig& config);

/// Central finite-difference gradient of mv_of_direction. Step for coordinate j
/// is cbrt(eps) * max(1, |beta_j|); a rule-of-thumb bandwidth is resolved at
/// `beta` and frozen for every perturbed evaluation. Throws StepModeGradient.
Eigen::VectorXd mv_gradient(const Dataset& data, const Eigen::VectorXd& beta,
                            const MvConfig& config);

/// Closed-form gradient under the same frozen-bandwidth convention.
Eigen::VectorXd mv_gradient_analytic(const Dataset& data, const Eigen::VectorXd& beta,
                                     const MvConfig& config);

/// X ~ N(+-mu, Sigma) with P(Y = +1) = p1.
struct GaussianTwoClassModel {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double p1 = 0.5;
};

/// Throws InvalidArgument unless sigma is symmetric positive definite and 0 < p1 < 1.
void check_gaussian_model(const GaussianTwoClassModel& model);

/// beta' mu / sqrt(beta' Sigma beta).
double standardized_separation(const Eigen::VectorXd& beta, const GaussianTwoClassModel& model);

/// Population MV of beta'X for the two-class Gaussian model, evaluated by
/// adaptive quadrature of
///   p1 p_{-1} { p1 E[Phi(t) - Phi(t + 2 delta)]^2 + p_{-1} E[Phi(t) - Phi(t - 2 delta)]^2 }
/// over t ~ N(0, 1). Throws QuadratureFailure above 1e-10 estimated error.
double mv_population_gaussian(const Eigen::VectorXd& beta, const GaussianTwoClassModel& model);

/// Same quantity as a function of the separation delta alone.
double mv_population_gaussian_delta(double delta, double p1);

/// Step-mode MV_n(X_j | Y) for every column j.
std::vector<double> marginal_mv(const Dataset& data);

/// The `keep` columns with largest marginal MV, best first; ties go to the lower index.
std::vector<std::size_t> screen_by_mv(const Dataset& data, std::size_t keep);

}  // namespace mmv
