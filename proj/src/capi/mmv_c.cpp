#include "mmv/mmv.h"

#include "mmv/classifiers.hpp"
#include "mmv/eval_harness.hpp"
#include "mmv/io.hpp"
#include "mmv/mv_index.hpp"
#include "mmv/optimizer.hpp"
#include "mmv/simgen.hpp"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <vector>

struct mmv_dataset {
  mmv::Dataset data;
};

struct mmv_report {
  std::vector<mmv::ExperimentReport> rows;
};

namespace {

thread_local std::string g_last_error;

mmv_status fail(mmv_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename Body>
mmv_status guarded(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return MMV_OK;
  } catch (const mmv::MmvError& e) {
    return fail(static_cast<mmv_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MMV_ERR_PARSE_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MMV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MMV_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MMV_ERR_INTERNAL, "unknown error");
  }
}

void require(bool condition, const char* what) {
  if (!condition) throw mmv::MmvError(mmv::ErrorCode::InvalidArgument, what);
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

mmv_options resolved(const mmv_options* options) {
  mmv_options out;
  mmv_options_init(&out);
  if (options) out = *options;
  return out;
}

mmv::MvConfig mv_config(const mmv_options& o) {
  if (o.cdf == MMV_CDF_STEP) return mmv::MvConfig::step();
  const auto family = o.kernel == MMV_KERNEL_EPANECHNIKOV ? mmv::KernelFamily::Epanechnikov
                                                          : mmv::KernelFamily::Gaussian;
  if (o.bandwidth > 0.0) return mmv::MvConfig::smoothed_fixed(o.bandwidth, family);
  return mmv::MvConfig::smoothed(family);
}

mmv::OptimizerConfig optimizer_config(const mmv_options& o) {
  mmv::OptimizerConfig cfg;
  cfg.d = o.d;
  cfg.restarts = o.restarts;
  cfg.max_iters = o.max_iters;
  cfg.mv_floor = o.mv_floor;
  mmv::check_optimizer_config(cfg);
  return cfg;
}

mmv::SimModel sim_model(const char* name) {
  require(name != nullptr, "model name is null");
  const auto model = mmv::parse_sim_model(name);
  if (!model) {
    throw mmv::MmvError(mmv::ErrorCode::InvalidArgument,
                        std::string("unknown model '") + name + "' (expected I, II, III or IV)");
  }
  return *model;
}

std::vector<std::string> split_methods(const char* methods) {
  require(methods != nullptr, "method list is null");
  std::vector<std::string> out;
  std::string current;
  for (const char* c = methods;; ++c) {
    if (*c == ',' || *c == '\0') {
      const auto first = current.find_first_not_of(' ');
      const auto last = current.find_last_not_of(' ');
      if (first != std::string::npos) out.push_back(current.substr(first, last - first + 1));
      current.clear();
      if (*c == '\0') break;
    } else {
      current += *c;
    }
  }
  require(!out.empty(), "method list is empty");
  return out;
}

mmv::ExperimentConfig experiment_config(const char* methods, const mmv_options& o) {
  mmv::PipelineSpec defaults;
  defaults.keep = o.keep;
  defaults.mv = mv_config(o);
  mmv::check_mv_config(defaults.mv);
  defaults.optimizer = optimizer_config(o);
  defaults.classifier.knn_k = o.knn_k;

  mmv::ExperimentConfig config;
  for (const auto& name : split_methods(methods)) {
    mmv::PipelineSpec spec = mmv::parse_method(name, defaults);
    if (spec.use_mmv && spec.optimizer.d < 1) {
      throw mmv::MmvError(mmv::ErrorCode::InvalidArgument, "method '" + name + "' needs d >= 1");
    }
    if (spec.classifier.kind == mmv::ClassifierKind::Knn &&
        (spec.classifier.knn_k == 0 || spec.classifier.knn_k % 2 == 0)) {
      throw mmv::MmvError(mmv::ErrorCode::InvalidArgument, "k-NN needs a positive odd k");
    }
    config.methods.push_back(std::move(spec));
  }
  config.plan.folds = o.folds;
  config.plan.stratified = o.stratified != 0;
  config.repetitions = o.repetitions;
  config.seed = o.seed;
  config.threads = o.threads;
  require(config.repetitions >= 1, "repetitions must be >= 1");
  return config;
}

mmv::SimOptions sim_options(const mmv_options& o) {
  mmv::SimOptions out;
  out.identity_covariance = o.identity_covariance != 0;
  return out;
}

// Shape checks a run would otherwise only hit inside the first fold.
void check_shape(std::size_t n, std::size_t p, const mmv::ExperimentConfig& config) {
  for (const auto& m : config.methods) {
    if (m.keep > p) {
      throw mmv::MmvError(mmv::ErrorCode::KeepOutOfRange, "keep=" + std::to_string(m.keep) +
                                                              " exceeds p=" + std::to_string(p));
    }
    const std::size_t width = m.keep > 0 ? m.keep : p;
    if (m.use_mmv && m.optimizer.d > width) {
      throw mmv::MmvError(mmv::ErrorCode::InvalidArgument,
                          "d=" + std::to_string(m.optimizer.d) + " exceeds the " +
                              std::to_string(width) + " columns left after screening");
    }
  }
  if (config.plan.folds > n) {
    throw mmv::MmvError(mmv::ErrorCode::TooManyFolds, std::to_string(config.plan.folds) +
                                                          " folds for n=" + std::to_string(n));
  }
}

nlohmann::json options_json(const mmv_options& o) {
  return {{"d", o.d},
          {"keep", o.keep},
          {"cdf", o.cdf == MMV_CDF_STEP ? "step" : "smoothed"},
          {"kernel", o.kernel == MMV_KERNEL_EPANECHNIKOV ? "epanechnikov" : "gaussian"},
          {"bandwidth", o.bandwidth > 0.0 ? nlohmann::json(o.bandwidth) : nlohmann::json("rule")},
          {"restarts", o.restarts},
          {"max_iters", o.max_iters},
          {"mv_floor", o.mv_floor},
          {"knn_k", o.knn_k},
          {"folds", o.folds},
          {"stratified", o.stratified != 0},
          {"repetitions", o.repetitions},
          {"seed", o.seed}};
}

nlohmann::json plan_json(const mmv::ExperimentConfig& config, const mmv_options& o, std::size_t n,
                         std::size_t p) {
  std::vector<std::string> names;
  std::size_t mmv_fits = 0;
  for (const auto& m : config.methods) {
    names.push_back(m.name);
    if (m.use_mmv) mmv_fits += config.repetitions * config.plan.folds;
  }
  return {{"n", n},
          {"p", p},
          {"methods", names},
          {"options", options_json(o)},
          {"workers", mmv::worker_count(config.threads)},
          {"pipeline_fits", config.methods.size() * config.repetitions * config.plan.folds},
          {"mmv_fits", mmv_fits}};
}

}  // namespace

extern "C" {

void mmv_options_init(mmv_options* options) {
  if (!options) return;
  const mmv::OptimizerConfig opt;
  const mmv::CvPlan plan;
  options->d = 1;
  options->keep = 0;
  options->cdf = MMV_CDF_SMOOTHED;
  options->kernel = MMV_KERNEL_GAUSSIAN;
  options->bandwidth = 0.0;
  options->restarts = opt.restarts;
  options->max_iters = opt.max_iters;
  options->mv_floor = opt.mv_floor;
  options->knn_k = mmv::kDefaultKnnK;
  options->folds = plan.folds;
  options->stratified = plan.stratified ? 1 : 0;
  options->repetitions = 50;
  options->seed = 0;
  options->threads = 0;
  options->identity_covariance = 0;
}

const char* mmv_last_error(void) { return g_last_error.c_str(); }

const char* mmv_status_name(mmv_status status) {
  if (status == MMV_OK) return "Ok";
  if (status == MMV_ERR_INTERNAL) return "Internal";
  const auto name = mmv::error_code_name(static_cast<mmv::ErrorCode>(status));
  return name.data();
}

void mmv_string_free(char* text) { std::free(text); }

const char* mmv_version(void) { return "0.1.0"; }

mmv_status mmv_dataset_load_csv(const char* path, const char* label_column, mmv_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto data = mmv::load_csv(path, label_column ? label_column : mmv::kDefaultLabelColumn);
    *out = new mmv_dataset{std::move(data)};
  });
}

mmv_status mmv_dataset_simulate(const char* model, size_t n, size_t p, const mmv_options* options,
                                mmv_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = nullptr;
    const mmv_options o = resolved(options);
    mmv::ModelSpec spec{sim_model(model), n, p, o.seed};
    *out = new mmv_dataset{mmv::generate(spec, sim_options(o))};
  });
}

mmv_status mmv_dataset_save_csv(const mmv_dataset* data, const char* path, const char* label_column) {
  return guarded([&] {
    require(data != nullptr && path != nullptr, "null argument");
    mmv::save_csv(data->data, path, label_column ? label_column : mmv::kDefaultLabelColumn);
  });
}

mmv_status mmv_dataset_shape(const mmv_dataset* data, size_t* rows, size_t* cols, size_t* classes) {
  return guarded([&] {
    require(data != nullptr, "null dataset");
    if (rows) *rows = data->data.rows();
    if (cols) *cols = data->data.cols();
    if (classes) *classes = data->data.num_classes();
  });
}

void mmv_dataset_free(mmv_dataset* data) { delete data; }

mmv_status mmv_mv_of_direction(const mmv_dataset* data, const double* beta, size_t length,
                               const mmv_options* options, double* value) {
  return guarded([&] {
    require(data != nullptr && beta != nullptr && value != nullptr, "null argument");
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta, static_cast<Eigen::Index>(length));
    *value = mmv::mv_of_direction(data->data, b, mv_config(resolved(options)));
  });
}

mmv_status mmv_screen(const mmv_dataset* data, size_t keep, size_t* indices, double* mv_values) {
  return guarded([&] {
    require(data != nullptr, "null dataset");
    const auto chosen = mmv::screen_by_mv(data->data, keep);
    const auto scores = mmv::marginal_mv(data->data);
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      if (indices) indices[k] = chosen[k];
      if (mv_values) mv_values[k] = scores[chosen[k]];
    }
  });
}

mmv_status mmv_fit_json(const mmv_dataset* data, const mmv_options* options, char** json) {
  return guarded([&] {
    require(data != nullptr && json != nullptr, "null argument");
    *json = nullptr;
    const mmv_options o = resolved(options);
    const mmv::MvConfig mv = mv_config(o);
    mmv::check_mv_config(mv);
    const mmv::OptimizerConfig opt = optimizer_config(o);

    mmv::FitRecord record;
    record.p = data->data.cols();
    std::optional<mmv::Dataset> screened;
    const mmv::Dataset* current = &data->data;
    if (o.keep > 0) {
      record.screened = mmv::screen_by_mv(data->data, o.keep);
      screened = data->data.select_columns(record.screened);
      current = &*screened;
    }
    if (opt.d > current->cols()) {
      throw mmv::MmvError(mmv::ErrorCode::InvalidArgument,
                          "d=" + std::to_string(opt.d) + " exceeds the " +
                              std::to_string(current->cols()) + " available columns");
    }
    record.extraction = mmv::fit_mmv(*current, mv, opt, mmv::RngStream(o.seed).derive("fit"));
    record.config = options_json(o);
    record.config["n"] = data->data.rows();
    *json = copy_string(mmv::fit_to_json(record).dump(2) + "\n");
  });
}

mmv_status mmv_cv_plan_simulation(const char* model, size_t n, size_t p, const char* methods,
                                  const mmv_options* options, char** json) {
  return guarded([&] {
    require(json != nullptr, "null argument");
    *json = nullptr;
    const mmv_options o = resolved(options);
    const mmv::SimModel m = sim_model(model);
    const mmv::ExperimentConfig config = experiment_config(methods, o);
    check_shape(n, p, config);
    // One draw surfaces generator errors such as an odd n for model I.
    const mmv::Dataset probe = mmv::generate(m, n, p, mmv::RngStream(o.seed).derive("data", 0),
                                             sim_options(o));
    (void)probe;
    nlohmann::json plan = plan_json(config, o, n, p);
    plan["model"] = std::string(mmv::sim_model_name(m));
    *json = copy_string(plan.dump(2) + "\n");
  });
}

mmv_status mmv_cv_plan_dataset(const mmv_dataset* data, const char* methods,
                               const mmv_options* options, char** json) {
  return guarded([&] {
    require(data != nullptr && json != nullptr, "null argument");
    *json = nullptr;
    const mmv_options o = resolved(options);
    const mmv::ExperimentConfig config = experiment_config(methods, o);
    check_shape(data->data.rows(), data->data.cols(), config);
    mmv::kfold_indices(data->data.labels(), data->data.num_classes(), config.plan,
                       mmv::RngStream(o.seed));
    *json = copy_string(plan_json(config, o, data->data.rows(), data->data.cols()).dump(2) + "\n");
  });
}

mmv_status mmv_cv_simulation(const char* model, size_t n, size_t p, const char* methods,
                             const mmv_options* options, mmv_report** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = nullptr;
    const mmv_options o = resolved(options);
    const mmv::SimModel m = sim_model(model);
    const mmv::ExperimentConfig config = experiment_config(methods, o);
    check_shape(n, p, config);
    *out = new mmv_report{mmv::run_experiment(m, n, p, config, sim_options(o))};
  });
}

mmv_status mmv_cv_dataset(const mmv_dataset* data, const char* methods, const mmv_options* options,
                          mmv_report** out) {
  return guarded([&] {
    require(data != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const mmv_options o = resolved(options);
    const mmv::ExperimentConfig config = experiment_config(methods, o);
    check_shape(data->data.rows(), data->data.cols(), config);
    *out = new mmv_report{mmv::run_experiment(data->data, config)};
  });
}

size_t mmv_report_rows(const mmv_report* report) { return report ? report->rows.size() : 0; }

mmv_status mmv_report_row(const mmv_report* report, size_t row, const char** method, double* mean,
                          double* sd, size_t* repetitions) {
  return guarded([&] {
    require(report != nullptr, "null report");
    if (row >= report->rows.size()) {
      throw mmv::MmvError(mmv::ErrorCode::InvalidArgument, "row index out of range");
    }
    const auto& r = report->rows[row];
    if (method) *method = r.method.c_str();
    if (mean) *mean = r.mean;
    if (sd) *sd = r.sd;
    if (repetitions) *repetitions = r.repetitions;
  });
}

mmv_status mmv_report_format(const mmv_report* report, mmv_format format, char** text) {
  return guarded([&] {
    require(report != nullptr && text != nullptr, "null argument");
    *text = nullptr;
    const auto table = format == MMV_FORMAT_JSON ? mmv::TableFormat::Json : mmv::TableFormat::Csv;
    *text = copy_string(mmv::format_report(report->rows, table));
  });
}

void mmv_report_free(mmv_report* report) { delete report; }

}  // extern "C"
