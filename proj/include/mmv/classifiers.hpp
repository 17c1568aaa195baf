#pragma once

// Downstream classifiers (LDA, ridge logistic regression, k-NN) and the
// screen -> MMV projection -> classifier pipeline built on top of them.

#include "mmv/core_model.hpp"
#include "mmv/mv_index.hpp"
#include "mmv/optimizer.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mmv {

/// Fisher LDA for two classes: predicts `positive_class` when w'x > threshold.
struct LdaModel {
  Eigen::VectorXd weight;
  double threshold = 0.0;
  int negative_class = 0;
  int positive_class = 1;
};

/// P(class 1 | x) = 1 / (1 + exp(-(b0 + b'x))); coefficients = (b0, b).
struct LogisticModel {
  Eigen::VectorXd coefficients;
  bool converged = false;
  std::size_t iterations = 0;
  /// Penalized negative log-likelihood after each IRLS update, initial point first.
  std::vector<double> loss_trace;
};

struct KnnModel {
  Eigen::MatrixXd points;
  std::vector<int> labels;
  std::size_t num_classes = 0;
  std::size_t k = 1;
};

using TrainedClassifier = std::variant<LdaModel, LogisticModel, KnnModel>;

inline constexpr double kLdaRidge = 1e-6;
inline constexpr double kLogisticRidge = 1e-4;
inline constexpr std::size_t kDefaultKnnK = 1;

/// `ridge` multiplies trace/q of the pooled covariance; 0 disables it.
LdaModel fit_lda(const Dataset& train, double ridge = kLdaRidge);
/// `ridge` penalizes the slopes only; 0 gives the plain maximum-likelihood fit.
LogisticModel fit_logistic(const Dataset& train, std::size_t max_iters = 100, double tol = 1e-8,
                           double ridge = kLogisticRidge);
KnnModel fit_knn(const Dataset& train, std::size_t k = kDefaultKnnK);

double logistic_probability(const LogisticModel& model, const Eigen::VectorXd& x);

/// Class id for a point already in the classifier's feature space.
int predict(const TrainedClassifier& model, const Eigen::VectorXd& x);

enum class ClassifierKind { Lda, Logistic, Knn };

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::Lda;
  std::size_t knn_k = kDefaultKnnK;
  std::size_t logistic_max_iters = 100;
  double logistic_tol = 1e-8;
  double logistic_ridge = kLogisticRidge;
  double lda_ridge = kLdaRidge;
};

TrainedClassifier fit_classifier(const Dataset& train, const ClassifierSpec& spec);

/// Feature map applied before the classifier: optional column selection
/// followed by an optional projection onto a direction basis.
struct Pipeline {
  std::size_t input_dim = 0;
  /// Empty means every column.
  std::vector<std::size_t> columns;
  std::optional<DirectionBasis> basis;

  Eigen::MatrixXd transform(const Eigen::MatrixXd& rows) const;
};

/// Maps x through the pipeline and applies the classifier. Throws DimensionMismatch.
int predict(const TrainedClassifier& model, const Pipeline& pipeline, const Eigen::VectorXd& x);

struct PipelineSpec {
  std::string name;
  bool use_mmv = false;
  /// Marginal MV screening size; 0 keeps every column.
  std::size_t keep = 0;
  ClassifierSpec classifier;
  MvConfig mv = MvConfig::smoothed();
  OptimizerConfig optimizer;
};

/// Parses "lda", "logistic", "knn", optionally prefixed with "mmv+".
PipelineSpec parse_method(std::string_view name, const PipelineSpec& defaults = {});

struct FittedPipeline {
  Pipeline pipeline;
  TrainedClassifier model;
  std::optional<ExtractionResult> extraction;

  int predict(const Eigen::VectorXd& x) const { return mmv::predict(model, pipeline, x); }
  std::vector<int> predict_rows(const Eigen::MatrixXd& rows) const;
};

/// Fits every stage on `train` only. When MMV finds no direction above the MV
/// floor, the best below-floor direction is used so the classifier still sees
/// one projected feature.
FittedPipeline fit_pipeline(const Dataset& train, const PipelineSpec& spec, RngStream rng);

}  // namespace mmv
