#pragma once

// Sequential extraction of maximum-MV directions: each direction maximizes the
// smoothed MV_n(beta'X | Y) over unit vectors orthogonal to the ones already
// found. Constraints are eliminated by working in coordinates of the
// orthogonal complement and renormalizing after every step.

#include "mmv/core_model.hpp"
#include "mmv/mv_index.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace mmv {

struct OptimizerConfig {
  std::size_t restarts = 10;
  std::size_t max_iters = 200;
  double step_init = 1.0;
  double step_shrink = 0.5;
  double grad_tol = 1e-5;
  double value_tol = 1e-8;
  std::size_t d = 1;
  double mv_floor = 1e-3;
  /// Keep every accepted iterate in RestartTrace::path (diagnostics only).
  bool record_path = false;
};

void check_optimizer_config(const OptimizerConfig& config);

struct RestartTrace {
  double start_value = 0.0;
  double final_value = 0.0;
  std::size_t iterations = 0;
  /// Iterates in p-space, start first; filled when OptimizerConfig::record_path is set.
  std::vector<Eigen::VectorXd> path;
};

struct DirectionDiagnostics {
  std::size_t winner_restart = 0;
  std::size_t iterations = 0;
  double projected_gradient_norm = 0.0;
  double bandwidth = 0.0;
  /// Set when no restart improved on its starting value.
  bool no_ascent = false;
  /// Accepted MV values of the winning restart, starting point first.
  std::vector<double> value_trace;
  std::vector<RestartTrace> restarts;
};

struct DirectionResult {
  Eigen::VectorXd direction;
  double mv_value = 0.0;
  DirectionDiagnostics diagnostics;
};

struct ExtractionResult {
  DirectionBasis basis;
  std::vector<DirectionDiagnostics> diagnostics;
  /// Direction found at the step that fell below mv_floor, if any. Lets callers
  /// that need at least one projection fall back to it.
  std::optional<DirectionResult> below_floor;

  std::size_t effective_d() const noexcept { return basis.size(); }
};

/// p x (p-k) orthonormal basis of the complement of span(prev).
Eigen::MatrixXd null_space_basis(const std::vector<Eigen::VectorXd>& prev, std::size_t p);

/// Moment seed (Sigma + gamma I)^{-1}(xbar_r* - xbar) projected onto the
/// feasible set, followed by uniform random unit vectors in that set.
std::vector<Eigen::VectorXd> initial_directions(const Dataset& data,
                                                const std::vector<Eigen::VectorXd>& prev,
                                                std::size_t count, RngStream rng);

/// Multi-start projected gradient ascent for one direction. A rule-of-thumb
/// bandwidth is computed once from the scores of the moment seed and frozen.
DirectionResult maximize_direction(const Dataset& data, const std::vector<Eigen::VectorXd>& prev,
                                   const MvConfig& mv_config, const OptimizerConfig& opt,
                                   RngStream rng);

ExtractionResult fit_mmv(const Dataset& data, const MvConfig& mv_config,
                         const OptimizerConfig& opt, RngStream rng);

/// Flips the sign so the largest-magnitude coordinate is positive.
Eigen::VectorXd canonical_sign(Eigen::VectorXd v);

}  // namespace mmv
