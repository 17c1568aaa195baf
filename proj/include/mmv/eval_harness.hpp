#pragma once

// Stratified k-fold cross-validation and repeated experiments.

#include "mmv/classifiers.hpp"
#include "mmv/core_model.hpp"
#include "mmv/simgen.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mmv {

struct CvPlan {
  std::size_t folds = 10;
  bool stratified = true;
};

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Partition of 0..n-1 into `plan.folds` test folds. Stratified assignment
/// deals each class's shuffled members round-robin, continuing the deal across
/// classes, so fold sizes and per-class counts differ by at most one.
std::vector<FoldSplit> kfold_indices(std::span<const int> labels, std::size_t num_classes,
                                     const CvPlan& plan, RngStream rng);

struct CvOutcome {
  double error = 0.0;
  std::size_t misclassified = 0;
  std::vector<std::size_t> fold_errors;
  /// Filled only when cv_error is asked to keep them.
  std::vector<FoldSplit> splits;
  std::vector<FittedPipeline> models;
};

/// Fits `spec` on each training fold only and scores the held-out fold.
CvOutcome cv_error(const Dataset& data, const PipelineSpec& spec, const CvPlan& plan,
                   RngStream rng, bool keep_models = false);

struct ExperimentReport {
  std::string method;
  std::vector<double> errors;  // per repetition, fractions in [0, 1]
  double mean = 0.0;
  double sd = 0.0;             // sample sd; 0 for a single repetition
  std::size_t repetitions = 0;
  bool single_repetition = false;
};

/// Mean and sample sd of the per-repetition errors.
ExperimentReport summarize(std::string method, std::vector<double> errors);

struct ExperimentConfig {
  std::vector<PipelineSpec> methods;
  CvPlan plan;
  std::size_t repetitions = 50;
  std::uint64_t seed = 0;
  /// 0 = MMV_THREADS or hardware concurrency.
  std::size_t threads = 0;
};

/// Simulation: each repetition regenerates data from (model, n, p). All methods
/// in a repetition share data and folds.
std::vector<ExperimentReport> run_experiment(SimModel model, std::size_t n, std::size_t p,
                                             const ExperimentConfig& config,
                                             const SimOptions& options = {});

/// Fixed dataset: each repetition only re-randomizes fold assignment.
std::vector<ExperimentReport> run_experiment(const Dataset& data, const ExperimentConfig& config);

/// Worker count: explicit > MMV_THREADS > hardware concurrency (at least 1).
std::size_t worker_count(std::size_t requested = 0);

/// Runs body(0..count-1) over `threads` workers; exceptions are rethrown
/// (lowest failing index first) after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace mmv
