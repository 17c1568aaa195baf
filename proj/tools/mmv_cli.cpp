// mmv: command-line front end over libmmv.
//
//   mmv simulate --model I --n 80 --p 50 --seed 7 --out data.csv
//   mmv fit --input colon.csv --keep 100 --d 1 --out basis.json
//   mmv cv --model I --n 80 --p 50 --methods mmv+lda,lda --reps 50
//   mmv screen --input colon.csv --keep 20
//
// Exit status is 0 on success, otherwise the library status code.

#include "mmv/mmv.h"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct DatasetDeleter {
  void operator()(mmv_dataset* d) const { mmv_dataset_free(d); }
};
struct ReportDeleter {
  void operator()(mmv_report* r) const { mmv_report_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { mmv_string_free(s); }
};
using DatasetPtr = std::unique_ptr<mmv_dataset, DatasetDeleter>;
using ReportPtr = std::unique_ptr<mmv_report, ReportDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

struct Failure {
  int code;
};

void check(mmv_status status) {
  if (status == MMV_OK) return;
  std::cerr << "mmv: error [" << mmv_status_name(status) << "]: " << mmv_last_error() << '\n';
  throw Failure{static_cast<int>(status)};
}

struct Args {
  std::string model = "I";
  std::size_t n = 80;
  std::size_t p = 50;
  std::string input;
  std::string label = "y";
  std::string out;
  std::string format = "csv";
  std::string cdf = "smoothed";
  std::string kernel = "gaussian";
  std::string methods = "mmv+lda,lda";
  bool identity_cov = false;
  bool dry_run = false;
  bool unstratified = false;
  mmv_options options{};
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream file(path);
  if (!file || !(file << text)) {
    std::cerr << "mmv: error [IoError]: cannot write '" << path << "'\n";
    throw Failure{MMV_ERR_IO_ERROR};
  }
}

void finish_options(Args& a) {
  a.options.cdf = a.cdf == "step" ? MMV_CDF_STEP : MMV_CDF_SMOOTHED;
  a.options.kernel = a.kernel == "epanechnikov" ? MMV_KERNEL_EPANECHNIKOV : MMV_KERNEL_GAUSSIAN;
  a.options.identity_covariance = a.identity_cov ? 1 : 0;
  a.options.stratified = a.unstratified ? 0 : 1;
}

DatasetPtr acquire_dataset(const Args& a) {
  mmv_dataset* raw = nullptr;
  if (!a.input.empty()) {
    check(mmv_dataset_load_csv(a.input.c_str(), a.label.c_str(), &raw));
  } else {
    check(mmv_dataset_simulate(a.model.c_str(), a.n, a.p, &a.options, &raw));
  }
  return DatasetPtr(raw);
}

void add_model_flags(CLI::App* cmd, Args& a) {
  cmd->add_option("--model", a.model, "Simulation model: I, II, III or IV")->capture_default_str();
  cmd->add_option("--n", a.n, "Sample size")->capture_default_str();
  cmd->add_option("--p", a.p, "Number of predictors")->capture_default_str();
  cmd->add_flag("--identity-cov", a.identity_cov, "Use identity instead of AR(0.5) covariance");
}

void add_mv_flags(CLI::App* cmd, Args& a) {
  cmd->add_option("--d", a.options.d, "Directions to extract")->capture_default_str();
  cmd->add_option("--keep", a.options.keep, "Marginal MV screening size (0 = off)")
      ->capture_default_str();
  cmd->add_option("--cdf", a.cdf, "CDF estimator")
      ->check(CLI::IsMember({"step", "smoothed"}))
      ->capture_default_str();
  cmd->add_option("--bandwidth", a.options.bandwidth, "Fixed bandwidth (<= 0 uses the rule of thumb)");
  cmd->add_option("--kernel", a.kernel, "Smoothing kernel")
      ->check(CLI::IsMember({"gaussian", "epanechnikov"}))
      ->capture_default_str();
  cmd->add_option("--restarts", a.options.restarts, "Optimizer restarts")->capture_default_str();
  cmd->add_option("--max-iters", a.options.max_iters, "Iterations per restart")
      ->capture_default_str();
  cmd->add_option("--mv-floor", a.options.mv_floor, "Stop extracting below this MV")
      ->capture_default_str();
}

int run_simulate(Args& a) {
  finish_options(a);
  const DatasetPtr data = acquire_dataset(a);
  if (a.out.empty() || a.out == "-") {
    std::cerr << "mmv: error [InvalidArgument]: simulate needs --out <file.csv>\n";
    return MMV_ERR_INVALID_ARGUMENT;
  }
  check(mmv_dataset_save_csv(data.get(), a.out.c_str(), a.label.c_str()));
  std::size_t rows = 0, cols = 0, classes = 0;
  check(mmv_dataset_shape(data.get(), &rows, &cols, &classes));
  std::cerr << "wrote " << a.out << ": n=" << rows << " p=" << cols << " classes=" << classes << '\n';
  return 0;
}

int run_fit(Args& a) {
  finish_options(a);
  const DatasetPtr data = acquire_dataset(a);
  char* raw = nullptr;
  check(mmv_fit_json(data.get(), &a.options, &raw));
  const StringPtr json(raw);
  emit(json.get(), a.out);
  return 0;
}

int run_screen(Args& a) {
  finish_options(a);
  const DatasetPtr data = acquire_dataset(a);
  std::size_t cols = 0;
  check(mmv_dataset_shape(data.get(), nullptr, &cols, nullptr));
  const std::size_t keep = a.options.keep == 0 ? cols : a.options.keep;
  std::vector<std::size_t> indices(keep);
  std::vector<double> values(keep);
  check(mmv_screen(data.get(), keep, indices.data(), values.data()));
  std::ostringstream text;
  text.precision(17);
  if (a.format == "json") {
    text << "{\"screened\": [";
    for (std::size_t k = 0; k < keep; ++k) {
      text << (k ? ", " : "") << "{\"index\": " << indices[k] << ", \"mv\": " << values[k] << '}';
    }
    text << "]}\n";
  } else {
    text << "rank,index,mv\n";
    for (std::size_t k = 0; k < keep; ++k) text << k + 1 << ',' << indices[k] << ',' << values[k] << '\n';
  }
  emit(text.str(), a.out);
  return 0;
}

int run_cv(Args& a) {
  finish_options(a);
  const mmv_format format = a.format == "json" ? MMV_FORMAT_JSON : MMV_FORMAT_CSV;
  DatasetPtr data;
  if (!a.input.empty()) data = acquire_dataset(a);

  if (a.dry_run) {
    char* raw = nullptr;
    if (data) {
      check(mmv_cv_plan_dataset(data.get(), a.methods.c_str(), &a.options, &raw));
    } else {
      check(mmv_cv_plan_simulation(a.model.c_str(), a.n, a.p, a.methods.c_str(), &a.options, &raw));
    }
    const StringPtr plan(raw);
    emit(plan.get(), a.out);
    return 0;
  }

  mmv_report* raw_report = nullptr;
  if (data) {
    check(mmv_cv_dataset(data.get(), a.methods.c_str(), &a.options, &raw_report));
  } else {
    check(mmv_cv_simulation(a.model.c_str(), a.n, a.p, a.methods.c_str(), &a.options, &raw_report));
  }
  const ReportPtr report(raw_report);
  char* raw_text = nullptr;
  check(mmv_report_format(report.get(), format, &raw_text));
  const StringPtr text(raw_text);
  emit(text.get(), a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum mean-variance dimension reduction for classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mmv_version()));

  Args a;
  mmv_options_init(&a.options);

  auto* simulate = app.add_subcommand("simulate", "Generate a simulation dataset as CSV");
  add_model_flags(simulate, a);
  simulate->add_option("--seed", a.options.seed, "Random seed")->capture_default_str();
  simulate->add_option("--label", a.label, "Label column name")->capture_default_str();
  simulate->add_option("--out", a.out, "Output CSV path")->required();

  auto* fit = app.add_subcommand("fit", "Screen (optional) and extract MMV directions as JSON");
  fit->add_option("--input", a.input, "Dataset CSV (otherwise simulate)");
  fit->add_option("--label", a.label, "Label column name")->capture_default_str();
  add_model_flags(fit, a);
  add_mv_flags(fit, a);
  fit->add_option("--seed", a.options.seed, "Random seed")->capture_default_str();
  fit->add_option("--out", a.out, "Output path (default stdout)");

  auto* cv = app.add_subcommand("cv", "Repeated k-fold cross-validation report");
  cv->add_option("--input", a.input, "Dataset CSV (otherwise simulate per repetition)");
  cv->add_option("--label", a.label, "Label column name")->capture_default_str();
  add_model_flags(cv, a);
  add_mv_flags(cv, a);
  cv->add_option("--methods", a.methods, "Comma separated methods, e.g. mmv+lda,lda")
      ->capture_default_str();
  cv->add_option("--folds", a.options.folds, "Folds")->capture_default_str();
  cv->add_flag("--unstratified", a.unstratified, "Plain instead of stratified folds");
  cv->add_option("--reps", a.options.repetitions, "Repetitions")->capture_default_str();
  cv->add_option("--knn-k", a.options.knn_k, "Neighbours for k-NN (odd)")->capture_default_str();
  cv->add_option("--threads", a.options.threads, "Workers (0 = MMV_THREADS or all cores)");
  cv->add_option("--seed", a.options.seed, "Random seed")->capture_default_str();
  cv->add_option("--format", a.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cv->add_option("--out", a.out, "Output path (default stdout)");
  cv->add_flag("--dry-run", a.dry_run, "Validate the configuration and print the plan");

  auto* screen = app.add_subcommand("screen", "Rank columns by marginal MV");
  screen->add_option("--input", a.input, "Dataset CSV (otherwise simulate)");
  screen->add_option("--label", a.label, "Label column name")->capture_default_str();
  add_model_flags(screen, a);
  screen->add_option("--keep", a.options.keep, "Columns to report (0 = all)")->capture_default_str();
  screen->add_option("--seed", a.options.seed, "Random seed")->capture_default_str();
  screen->add_option("--format", a.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  screen->add_option("--out", a.out, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(a);
    if (fit->parsed()) return run_fit(a);
    if (cv->parsed()) return run_cv(a);
    if (screen->parsed()) return run_screen(a);
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
