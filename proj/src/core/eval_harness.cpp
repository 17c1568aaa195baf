#include "mmv/eval_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <thread>

namespace mmv {

std::vector<FoldSplit> kfold_indices(std::span<const int> labels, std::size_t num_classes,
                                     const CvPlan& plan, RngStream rng) {
  const std::size_t n = labels.size();
  if (plan.folds < 2) throw MmvError(ErrorCode::InvalidArgument, "need at least 2 folds");
  if (plan.folds > n) {
    throw MmvError(ErrorCode::TooManyFolds, std::to_string(plan.folds) + " folds for n=" +
                                                std::to_string(n));
  }
  std::vector<std::vector<std::size_t>> members(num_classes);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw MmvError(ErrorCode::InvalidArgument, "label outside 0..R-1");
    }
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }

  std::vector<std::size_t> deal;
  deal.reserve(n);
  if (plan.stratified) {
    for (std::size_t r = 0; r < num_classes; ++r) {
      if (members[r].size() < plan.folds) {
        throw MmvError(ErrorCode::TooManyFolds,
                       std::to_string(plan.folds) + " stratified folds but class " +
                           std::to_string(r) + " has only " + std::to_string(members[r].size()) +
                           " members");
      }
      rng.shuffle(members[r]);
      deal.insert(deal.end(), members[r].begin(), members[r].end());
    }
  } else {
    deal.resize(n);
    std::iota(deal.begin(), deal.end(), std::size_t{0});
    rng.shuffle(deal);
  }

  std::vector<int> fold_of(n);
  for (std::size_t t = 0; t < n; ++t) fold_of[deal[t]] = static_cast<int>(t % plan.folds);

  std::vector<FoldSplit> out(plan.folds);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < plan.folds; ++f) {
      (static_cast<int>(f) == fold_of[i] ? out[f].test : out[f].train).push_back(i);
    }
  }
  for (std::size_t f = 0; f < plan.folds; ++f) {
    std::vector<bool> seen(num_classes, false);
    for (auto i : out[f].train) seen[static_cast<std::size_t>(labels[i])] = true;
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw MmvError(ErrorCode::EmptyClass, "training fold " + std::to_string(f) +
                                                " misses a class; use stratified folds");
    }
  }
  return out;
}

CvOutcome cv_error(const Dataset& data, const PipelineSpec& spec, const CvPlan& plan,
                   RngStream rng, bool keep_models) {
  const auto splits = kfold_indices(data.labels(), data.num_classes(), plan, rng.derive("folds"));
  CvOutcome out;
  for (std::size_t f = 0; f < splits.size(); ++f) {
    const Dataset train = data.subset(splits[f].train);
    const FittedPipeline fitted = fit_pipeline(train, spec, rng.derive("fit", f));
    Eigen::MatrixXd test(static_cast<Eigen::Index>(splits[f].test.size()), data.features().cols());
    for (std::size_t t = 0; t < splits[f].test.size(); ++t) {
      test.row(static_cast<Eigen::Index>(t)) =
          data.features().row(static_cast<Eigen::Index>(splits[f].test[t]));
    }
    const auto predicted = fitted.predict_rows(test);
    std::size_t wrong = 0;
    for (std::size_t t = 0; t < predicted.size(); ++t) {
      if (predicted[t] != data.labels()[splits[f].test[t]]) ++wrong;
    }
    out.fold_errors.push_back(wrong);
    out.misclassified += wrong;
    if (keep_models) out.models.push_back(fitted);
  }
  if (keep_models) out.splits = splits;
  out.error = static_cast<double>(out.misclassified) / static_cast<double>(data.rows());
  return out;
}

ExperimentReport summarize(std::string method, std::vector<double> errors) {
  ExperimentReport report;
  report.method = std::move(method);
  report.repetitions = errors.size();
  report.single_repetition = errors.size() == 1;
  if (!errors.empty()) {
    report.mean = std::accumulate(errors.begin(), errors.end(), 0.0) /
                  static_cast<double>(errors.size());
    if (errors.size() > 1) {
      double ss = 0.0;
      for (double e : errors) ss += (e - report.mean) * (e - report.mean);
      report.sd = std::sqrt(ss / static_cast<double>(errors.size() - 1));
    }
  }
  report.errors = std::move(errors);
  return report;
}

std::size_t worker_count(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MMV_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && value > 0) return static_cast<std::size_t>(value);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

void check_experiment(const ExperimentConfig& config) {
  if (config.repetitions < 1) throw MmvError(ErrorCode::InvalidArgument, "repetitions must be >= 1");
  if (config.methods.empty()) throw MmvError(ErrorCode::InvalidArgument, "no methods given");
}

std::vector<ExperimentReport> collect(const ExperimentConfig& config,
                                      const std::vector<std::vector<double>>& errors) {
  std::vector<ExperimentReport> out;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    out.push_back(summarize(config.methods[m].name, errors[m]));
  }
  return out;
}

}  // namespace

std::vector<ExperimentReport> run_experiment(SimModel model, std::size_t n, std::size_t p,
                                             const ExperimentConfig& config,
                                             const SimOptions& options) {
  check_experiment(config);
  const RngStream root(config.seed);
  std::vector<std::vector<double>> errors(config.methods.size(),
                                          std::vector<double>(config.repetitions));
  parallel_for(config.repetitions, worker_count(config.threads), [&](std::size_t r) {
    const Dataset data = generate(model, n, p, root.derive("data", r), options);
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      errors[m][r] = cv_error(data, config.methods[m], config.plan, root.derive("cv", r)).error;
    }
  });
  return collect(config, errors);
}

std::vector<ExperimentReport> run_experiment(const Dataset& data, const ExperimentConfig& config) {
  check_experiment(config);
  const RngStream root(config.seed);
  std::vector<std::vector<double>> errors(config.methods.size(),
                                          std::vector<double>(config.repetitions));
  parallel_for(config.repetitions, worker_count(config.threads), [&](std::size_t r) {
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      errors[m][r] = cv_error(data, config.methods[m], config.plan, root.derive("cv", r)).error;
    }
  });
  return collect(config, errors);
}

}  // namespace mmv
