#pragma once

// Seeded generators for the four simulation models.
//
//   I   X = beta1 * Y + Delta eps, labels +1 (first half) then -1
//   II  X ~ N(0, Psi), Y = 1{beta1'X <= 0}
//   III X ~ N(0, Psi), Y = 1{beta1'X / (0.5 + (beta2'X + 1.5)^2) + 0.2 eps >= 0}
//   IV  X ~ N(0, Psi), Y = 1{(beta1'X)^2 + (beta2'X)^2 + 0.2 eps >= 1}
//
// with beta1 = (1,1,1,1,0,...), beta2 = (1,-1,1,-1,0,...), Psi_ij = 0.5^|i-j|
// and Delta the lower Cholesky factor of Psi.

#include "mmv/core_model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string_view>

namespace mmv {

enum class SimModel { I, II, III, IV };

std::optional<SimModel> parse_sim_model(std::string_view text);
std::string_view sim_model_name(SimModel model);

struct ModelSpec {
  SimModel model = SimModel::I;
  std::size_t n = 80;
  std::size_t p = 50;
  std::uint64_t seed = 0;
};

/// Test hooks; defaults reproduce the models exactly.
struct SimOptions {
  bool zero_noise = false;        // eps == 0 (label noise and Model I feature noise)
  bool zero_features = false;     // X == 0 for Models II-IV
  bool identity_covariance = false;  // Psi replaced by I
  double rho = 0.5;
};

inline constexpr double kDefaultRho = 0.5;

/// Entry (i, j) = rho^|i-j|.
Eigen::MatrixXd ar_covariance(std::size_t p, double rho);

Eigen::VectorXd beta1(std::size_t p);
Eigen::VectorXd beta2(std::size_t p);

/// Label rules of the index models given s1 = beta1'x, s2 = beta2'x and the noise draw.
bool model_ii_rule(double s1);
bool model_iii_rule(double s1, double s2, double eps);
bool model_iv_rule(double s1, double s2, double eps);

Dataset gen_model_i(std::size_t n, std::size_t p, RngStream rng, const SimOptions& options = {});
Dataset gen_model_ii(std::size_t n, std::size_t p, RngStream rng, const SimOptions& options = {});
Dataset gen_model_iii(std::size_t n, std::size_t p, RngStream rng, const SimOptions& options = {});
Dataset gen_model_iv(std::size_t n, std::size_t p, RngStream rng, const SimOptions& options = {});

Dataset generate(SimModel model, std::size_t n, std::size_t p, RngStream rng,
                 const SimOptions& options = {});
/// Uses the stream derived from spec.seed under the "simulate" tag.
Dataset generate(const ModelSpec& spec, const SimOptions& options = {});

}  // namespace mmv
