#include "mmv/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmv {

namespace {

void require_binary(const Dataset& train, const char* who) {
  if (train.num_classes() != 2) {
    throw MmvError(ErrorCode::NotBinary, std::string(who) + " needs exactly 2 classes, got " +
                                             std::to_string(train.num_classes()));
  }
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

LdaModel fit_lda(const Dataset& train, double ridge) {
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw MmvError(ErrorCode::InvalidArgument, "LDA ridge must be finite and >= 0");
  }
  require_binary(train, "LDA");
  for (auto count : train.class_counts()) {
    if (count < 2) throw MmvError(ErrorCode::InvalidArgument, "LDA needs >= 2 samples per class");
  }
  const Eigen::MatrixXd& x = train.features();
  const auto q = x.cols();
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(q, 2);
  for (std::size_t i = 0; i < train.rows(); ++i) {
    means.col(train.labels()[i]) += x.row(static_cast<Eigen::Index>(i)).transpose();
  }
  means.col(0) /= static_cast<double>(train.class_counts()[0]);
  means.col(1) /= static_cast<double>(train.class_counts()[1]);

  Eigen::MatrixXd centered(x.rows(), q);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    centered.row(i) = x.row(i) - means.col(train.labels()[static_cast<std::size_t>(i)]).transpose();
  }
  Eigen::MatrixXd pooled = centered.transpose() * centered / static_cast<double>(x.rows() - 2);
  const double gamma = ridge * pooled.trace() / static_cast<double>(q);
  if (!(pooled.trace() > 0.0)) {
    throw MmvError(ErrorCode::DegenerateCovariance, "pooled covariance is zero; ridge cannot fix it");
  }
  pooled.diagonal().array() += gamma;
  const Eigen::LLT<Eigen::MatrixXd> llt(pooled);
  if (llt.info() != Eigen::Success) {
    throw MmvError(ErrorCode::DegenerateCovariance, "ridged pooled covariance is not positive definite");
  }

  LdaModel model;
  model.weight = llt.solve(means.col(1) - means.col(0));
  const double log_odds = std::log(static_cast<double>(train.class_counts()[1]) /
                                   static_cast<double>(train.class_counts()[0]));
  model.threshold = model.weight.dot(means.col(1) + means.col(0)) / 2.0 - log_odds;
  if (!model.weight.allFinite() || !std::isfinite(model.threshold)) {
    throw MmvError(ErrorCode::DegenerateCovariance, "LDA produced non-finite parameters");
  }
  return model;
}

LogisticModel fit_logistic(const Dataset& train, std::size_t max_iters, double tol, double ridge) {
  require_binary(train, "logistic regression");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw MmvError(ErrorCode::InvalidArgument, "logistic ridge must be finite and >= 0");
  }
  const Eigen::Index n = train.features().rows();
  const Eigen::Index q = train.features().cols();
  Eigen::MatrixXd design(n, q + 1);
  design.col(0).setOnes();
  design.rightCols(q) = train.features();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = train.labels()[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;

  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(q + 1, ridge);
  penalty[0] = 0.0;
  const auto loss = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd eta = design * theta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += softplus(eta[i]) - y[i] * eta[i];
    return total + 0.5 * theta.dot(penalty.cwiseProduct(theta));
  };

  LogisticModel model;
  model.coefficients = Eigen::VectorXd::Zero(q + 1);
  double current = loss(model.coefficients);
  model.loss_trace.push_back(current);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd eta = design * model.coefficients;
    Eigen::VectorXd prob(n);
    Eigen::VectorXd weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob[i] = sigmoid(eta[i]);
      weight[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-12);
    }
    const Eigen::VectorXd grad =
        design.transpose() * (prob - y) + penalty.cwiseProduct(model.coefficients);
    Eigen::MatrixXd hessian = design.transpose() * weight.asDiagonal() * design;
    hessian.diagonal() += penalty;
    hessian(0, 0) += 1e-10;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() != Eigen::Success) break;
    const Eigen::VectorXd newton = ldlt.solve(grad);
    if (!newton.allFinite()) break;

    // Step halving keeps the penalized loss nonincreasing.
    double step = 1.0;
    Eigen::VectorXd next;
    double next_loss = current;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      next = model.coefficients - step * newton;
      next_loss = loss(next);
      if (next_loss <= current) break;
    }
    if (!(next_loss <= current)) break;
    const double change = (next - model.coefficients).cwiseAbs().maxCoeff();
    model.coefficients = std::move(next);
    current = next_loss;
    model.loss_trace.push_back(current);
    ++model.iterations;
    if (change < tol) {
      model.converged = true;
      break;
    }
  }
  return model;
}

double logistic_probability(const LogisticModel& model, const Eigen::VectorXd& x) {
  if (x.size() + 1 != model.coefficients.size()) {
    throw MmvError(ErrorCode::DimensionMismatch, "logistic input has wrong dimension");
  }
  return sigmoid(model.coefficients[0] + model.coefficients.tail(x.size()).dot(x));
}

KnnModel fit_knn(const Dataset& train, std::size_t k) {
  if (k < 1 || k % 2 == 0) {
    throw MmvError(ErrorCode::InvalidArgument, "k-NN needs a positive odd k, got " + std::to_string(k));
  }
  if (k > train.rows()) {
    throw MmvError(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " exceeds n=" +
                                             std::to_string(train.rows()));
  }
  return {train.features(), train.labels(), train.num_classes(), k};
}

namespace {

int predict_knn(const KnnModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.points.cols()) {
    throw MmvError(ErrorCode::DimensionMismatch, "k-NN input has wrong dimension");
  }
  const auto n = static_cast<std::size_t>(model.points.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = {(model.points.row(static_cast<Eigen::Index>(i)).transpose() - x).squaredNorm(), i};
  }
  // Pair ordering breaks distance ties by the lower training index.
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(model.k), dist.end());
  std::vector<std::size_t> votes(model.num_classes, 0);
  for (std::size_t j = 0; j < model.k; ++j) ++votes[static_cast<std::size_t>(model.labels[dist[j].second])];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

}  // namespace

int predict(const TrainedClassifier& model, const Eigen::VectorXd& x) {
  if (!x.allFinite()) throw MmvError(ErrorCode::NonFiniteValue, "query point is not finite");
  if (const auto* lda = std::get_if<LdaModel>(&model)) {
    if (x.size() != lda->weight.size()) {
      throw MmvError(ErrorCode::DimensionMismatch, "LDA input has wrong dimension");
    }
    return lda->weight.dot(x) > lda->threshold ? lda->positive_class : lda->negative_class;
  }
  if (const auto* logit = std::get_if<LogisticModel>(&model)) {
    return logistic_probability(*logit, x) > 0.5 ? 1 : 0;
  }
  return predict_knn(std::get<KnnModel>(model), x);
}

TrainedClassifier fit_classifier(const Dataset& train, const ClassifierSpec& spec) {
  switch (spec.kind) {
    case ClassifierKind::Lda: return fit_lda(train, spec.lda_ridge);
    case ClassifierKind::Logistic:
      return fit_logistic(train, spec.logistic_max_iters, spec.logistic_tol, spec.logistic_ridge);
    case ClassifierKind::Knn: return fit_knn(train, spec.knn_k);
  }
  throw MmvError(ErrorCode::InvalidArgument, "unknown classifier kind");
}

Eigen::MatrixXd Pipeline::transform(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != input_dim) {
    throw MmvError(ErrorCode::DimensionMismatch, "expected " + std::to_string(input_dim) +
                                                     " features, got " + std::to_string(rows.cols()));
  }
  Eigen::MatrixXd selected;
  if (columns.empty()) {
    selected = rows;
  } else {
    selected.resize(rows.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
      selected.col(static_cast<Eigen::Index>(k)) = rows.col(static_cast<Eigen::Index>(columns[k]));
    }
  }
  if (!basis) return selected;
  return selected * basis->as_matrix();
}

int predict(const TrainedClassifier& model, const Pipeline& pipeline, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd mapped = pipeline.transform(x.transpose());
  return predict(model, Eigen::VectorXd(mapped.row(0).transpose()));
}

std::vector<int> FittedPipeline::predict_rows(const Eigen::MatrixXd& rows) const {
  const Eigen::MatrixXd mapped = pipeline.transform(rows);
  std::vector<int> out(static_cast<std::size_t>(mapped.rows()));
  for (Eigen::Index i = 0; i < mapped.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = mmv::predict(model, Eigen::VectorXd(mapped.row(i).transpose()));
  }
  return out;
}

PipelineSpec parse_method(std::string_view name, const PipelineSpec& defaults) {
  PipelineSpec spec = defaults;
  spec.name = std::string(name);
  std::string_view rest = name;
  constexpr std::string_view prefix = "mmv+";
  spec.use_mmv = rest.substr(0, prefix.size()) == prefix;
  if (spec.use_mmv) rest.remove_prefix(prefix.size());
  if (rest == "lda") {
    spec.classifier.kind = ClassifierKind::Lda;
  } else if (rest == "logistic") {
    spec.classifier.kind = ClassifierKind::Logistic;
  } else if (rest == "knn") {
    spec.classifier.kind = ClassifierKind::Knn;
  } else {
    throw MmvError(ErrorCode::InvalidArgument,
                   "unknown method '" + std::string(name) +
                       "' (expected lda, logistic, knn, optionally prefixed with mmv+)");
  }
  return spec;
}

FittedPipeline fit_pipeline(const Dataset& train, const PipelineSpec& spec, RngStream rng) {
  FittedPipeline out;
  out.pipeline.input_dim = train.cols();
  const Dataset* current = &train;
  std::optional<Dataset> screened;
  if (spec.keep > 0 && spec.keep < train.cols()) {
    out.pipeline.columns = screen_by_mv(train, spec.keep);
    screened = train.select_columns(out.pipeline.columns);
    current = &*screened;
  }

  std::optional<Dataset> projected;
  if (spec.use_mmv) {
    if (spec.optimizer.d < 1) {
      throw MmvError(ErrorCode::InvalidArgument, "an mmv+ pipeline needs d >= 1");
    }
    ExtractionResult extraction = fit_mmv(*current, spec.mv, spec.optimizer, rng.derive("mmv"));
    DirectionBasis basis = extraction.basis;
    if (basis.size() == 0 && extraction.below_floor) {
      basis.directions.push_back(extraction.below_floor->direction);
      basis.mv_values.push_back(extraction.below_floor->mv_value);
    }
    projected = current->with_features(current->features() * basis.as_matrix());
    out.pipeline.basis = std::move(basis);
    out.extraction = std::move(extraction);
    current = &*projected;
  }
  out.model = fit_classifier(*current, spec.classifier);
  return out;
}

}  // namespace mmv
