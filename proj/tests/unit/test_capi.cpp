#include "doctest.h"

#include "mmv/mmv.h"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

// Takes ownership of a string returned by the library.
std::string take(char* text) {
  REQUIRE(text != nullptr);
  std::string out(text);
  mmv_string_free(text);
  return out;
}

mmv_options quick_options() {
  mmv_options o;
  mmv_options_init(&o);
  o.restarts = 2;
  o.repetitions = 2;
  o.seed = 11;
  return o;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mmv_test_capi";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("options defaults and status names") {
  mmv_options o;
  mmv_options_init(&o);
  CHECK(o.d == 1);
  CHECK(o.keep == 0);
  CHECK(o.cdf == MMV_CDF_SMOOTHED);
  CHECK(o.kernel == MMV_KERNEL_GAUSSIAN);
  CHECK(o.restarts == 10);
  CHECK(o.max_iters == 200);
  CHECK(o.mv_floor == 1e-3);
  CHECK(o.folds == 10);
  CHECK(o.stratified == 1);
  CHECK(o.repetitions == 50);
  CHECK(o.knn_k % 2 == 1);

  CHECK(std::string(mmv_status_name(MMV_OK)) == "Ok");
  CHECK(std::string(mmv_status_name(MMV_ERR_ODD_N)) == "OddN");
  CHECK(std::string(mmv_status_name(MMV_ERR_TOO_MANY_FOLDS)) == "TooManyFolds");
  CHECK(std::string(mmv_status_name(MMV_ERR_INTERNAL)) == "Internal");
  CHECK(std::string(mmv_version()).size() > 0);
}

TEST_CASE("simulate, shape, save and load") {
  const mmv_options o = quick_options();
  mmv_dataset* data = nullptr;
  REQUIRE(mmv_dataset_simulate("I", 80, 50, &o, &data) == MMV_OK);
  size_t rows = 0, cols = 0, classes = 0;
  REQUIRE(mmv_dataset_shape(data, &rows, &cols, &classes) == MMV_OK);
  CHECK(rows == 80);
  CHECK(cols == 50);
  CHECK(classes == 2);

  const auto a = scratch("a.csv");
  const auto b = scratch("b.csv");
  REQUIRE(mmv_dataset_save_csv(data, a.string().c_str(), nullptr) == MMV_OK);
  mmv_dataset* again = nullptr;
  REQUIRE(mmv_dataset_simulate("I", 80, 50, &o, &again) == MMV_OK);
  REQUIRE(mmv_dataset_save_csv(again, b.string().c_str(), nullptr) == MMV_OK);
  CHECK(slurp(a) == slurp(b));

  mmv_dataset* loaded = nullptr;
  REQUIRE(mmv_dataset_load_csv(a.string().c_str(), nullptr, &loaded) == MMV_OK);
  REQUIRE(mmv_dataset_shape(loaded, &rows, &cols, &classes) == MMV_OK);
  CHECK(rows == 80);
  CHECK(cols == 50);
  const auto c = scratch("c.csv");
  REQUIRE(mmv_dataset_save_csv(loaded, c.string().c_str(), nullptr) == MMV_OK);
  CHECK(slurp(c) == slurp(a));

  mmv_dataset_free(data);
  mmv_dataset_free(again);
  mmv_dataset_free(loaded);
  mmv_dataset_free(nullptr);
}

TEST_CASE("errors come back as status codes with messages") {
  const mmv_options o = quick_options();
  mmv_dataset* data = reinterpret_cast<mmv_dataset*>(1);
  CHECK(mmv_dataset_simulate("I", 81, 50, &o, &data) == MMV_ERR_ODD_N);
  CHECK(data == nullptr);
  CHECK(std::string(mmv_last_error()).find("n=81") != std::string::npos);
  CHECK(mmv_dataset_simulate("V", 80, 50, &o, &data) == MMV_ERR_INVALID_ARGUMENT);
  CHECK(mmv_dataset_simulate(nullptr, 80, 50, &o, &data) == MMV_ERR_INVALID_ARGUMENT);
  CHECK(mmv_dataset_load_csv("/nonexistent/x.csv", "y", &data) == MMV_ERR_IO_ERROR);

  const auto bad = scratch("bad.csv");
  {
    std::ofstream out(bad);
    out << "x1,x2,y\n1,2,a\n3,zz,b\n";
  }
  CHECK(mmv_dataset_load_csv(bad.string().c_str(), "y", &data) == MMV_ERR_PARSE_ERROR);
  CHECK(std::string(mmv_last_error()).find("x2") != std::string::npos);
  CHECK(mmv_dataset_load_csv(bad.string().c_str(), "label", &data) == MMV_ERR_MISSING_LABEL_COLUMN);

  mmv_report* report = nullptr;
  CHECK(mmv_cv_simulation("I", 80, 50, "svm", &o, &report) == MMV_ERR_INVALID_ARGUMENT);
  mmv_options many = o;
  many.folds = 100;
  many.stratified = 0;
  CHECK(mmv_cv_simulation("I", 80, 50, "lda", &many, &report) == MMV_ERR_TOO_MANY_FOLDS);
  mmv_options keep = o;
  keep.keep = 60;
  CHECK(mmv_cv_simulation("I", 80, 50, "mmv+lda", &keep, &report) == MMV_ERR_KEEP_OUT_OF_RANGE);
  mmv_options even = o;
  even.knn_k = 4;
  CHECK(mmv_cv_simulation("II", 80, 10, "knn", &even, &report) == MMV_ERR_INVALID_ARGUMENT);
  CHECK(report == nullptr);

  // A successful call clears the message.
  REQUIRE(mmv_dataset_simulate("II", 40, 5, &o, &data) == MMV_OK);
  CHECK(std::string(mmv_last_error()).empty());
  mmv_dataset_free(data);
}

TEST_CASE("mv_of_direction and screen") {
  const mmv_options o = quick_options();
  mmv_dataset* data = nullptr;
  REQUIRE(mmv_dataset_simulate("II", 400, 8, &o, &data) == MMV_OK);
  std::vector<double> beta{0.5, 0.5, 0.5, 0.5, 0, 0, 0, 0};
  double value = -1.0;
  REQUIRE(mmv_mv_of_direction(data, beta.data(), beta.size(), &o, &value) == MMV_OK);
  CHECK(value > 0.05);
  CHECK(value <= 1.0);
  CHECK(mmv_mv_of_direction(data, beta.data(), 3, &o, &value) == MMV_ERR_DIMENSION_MISMATCH);

  std::vector<size_t> idx(3);
  std::vector<double> mv(3);
  REQUIRE(mmv_screen(data, 3, idx.data(), mv.data()) == MMV_OK);
  for (size_t k = 0; k < 3; ++k) CHECK(idx[k] < 4);
  CHECK(mv[0] >= mv[1]);
  CHECK(mv[1] >= mv[2]);
  CHECK(mmv_screen(data, 9, idx.data(), mv.data()) == MMV_ERR_KEEP_OUT_OF_RANGE);
  mmv_dataset_free(data);
}

TEST_CASE("fit_json") {
  mmv_options o = quick_options();
  mmv_dataset* data = nullptr;
  REQUIRE(mmv_dataset_simulate("II", 200, 10, &o, &data) == MMV_OK);
  char* text = nullptr;
  REQUIRE(mmv_fit_json(data, &o, &text) == MMV_OK);
  const auto doc = nlohmann::json::parse(take(text));
  REQUIRE(doc.at("effective_d") == 1);
  const auto dir = doc.at("directions")[0].get<std::vector<double>>();
  REQUIRE(dir.size() == 10);
  double norm = 0.0;
  for (double v : dir) norm += v * v;
  CHECK(std::abs(norm - 1.0) < 1e-10);
  CHECK(doc.at("mv_values")[0].get<double>() > 0.0);
  CHECK(doc.at("config").at("seed") == 11);
  CHECK(doc.at("config").at("n") == 200);

  REQUIRE(mmv_fit_json(data, &o, &text) == MMV_OK);
  CHECK(nlohmann::json::parse(take(text)) == doc);

  mmv_options kept = o;
  kept.keep = 4;
  REQUIRE(mmv_fit_json(data, &kept, &text) == MMV_OK);
  const auto screened = nlohmann::json::parse(take(text));
  CHECK(screened.at("screened_indices").size() == 4);
  int nonzero = 0;
  for (double v : screened.at("directions")[0].get<std::vector<double>>()) nonzero += v != 0.0 ? 1 : 0;
  CHECK(nonzero <= 4);

  mmv_options none = o;
  none.d = 0;
  REQUIRE(mmv_fit_json(data, &none, &text) == MMV_OK);
  const auto empty = nlohmann::json::parse(take(text));
  CHECK(empty.at("effective_d") == 0);
  CHECK(empty.at("directions").empty());

  mmv_options wide = o;
  wide.d = 11;
  CHECK(mmv_fit_json(data, &wide, &text) == MMV_ERR_INVALID_ARGUMENT);
  CHECK(text == nullptr);
  mmv_dataset_free(data);
}

TEST_CASE("cross-validation reports") {
  mmv_options o = quick_options();
  o.repetitions = 1;
  mmv_report* report = nullptr;
  REQUIRE(mmv_cv_simulation("I", 40, 6, "mmv+lda,lda", &o, &report) == MMV_OK);
  REQUIRE(mmv_report_rows(report) == 2);
  const char* method = nullptr;
  double mean = -1, sd = -1;
  size_t reps = 0;
  REQUIRE(mmv_report_row(report, 0, &method, &mean, &sd, &reps) == MMV_OK);
  CHECK(std::string(method) == "mmv+lda");
  CHECK(mean >= 0.0);
  CHECK(mean <= 1.0);
  CHECK(sd == 0.0);
  CHECK(reps == 1);
  CHECK(mmv_report_row(report, 2, &method, &mean, &sd, &reps) == MMV_ERR_INVALID_ARGUMENT);

  char* csv = nullptr;
  char* json = nullptr;
  REQUIRE(mmv_report_format(report, MMV_FORMAT_CSV, &csv) == MMV_OK);
  REQUIRE(mmv_report_format(report, MMV_FORMAT_JSON, &json) == MMV_OK);
  const std::string table = take(csv);
  const auto doc = nlohmann::json::parse(take(json));
  CHECK(table.find(",0.00,1,1\n") != std::string::npos);
  CHECK(doc.at("rows")[0].at("single_rep") == true);
  CHECK(doc.at("rows")[1].at("method") == "lda");
  mmv_report_free(report);

  mmv_options two = quick_options();
  mmv_report* a = nullptr;
  mmv_report* b = nullptr;
  REQUIRE(mmv_cv_simulation("III", 60, 6, "knn,logistic", &two, &a) == MMV_OK);
  two.threads = 2;
  REQUIRE(mmv_cv_simulation("III", 60, 6, "knn,logistic", &two, &b) == MMV_OK);
  for (size_t r = 0; r < 2; ++r) {
    double ma, mb, sa, sb;
    REQUIRE(mmv_report_row(a, r, nullptr, &ma, &sa, nullptr) == MMV_OK);
    REQUIRE(mmv_report_row(b, r, nullptr, &mb, &sb, nullptr) == MMV_OK);
    CHECK(ma == mb);
    CHECK(sa == sb);
  }
  mmv_report_free(a);
  mmv_report_free(b);

  mmv_dataset* data = nullptr;
  REQUIRE(mmv_dataset_simulate("II", 60, 5, &two, &data) == MMV_OK);
  REQUIRE(mmv_cv_dataset(data, "lda", &two, &report) == MMV_OK);
  CHECK(mmv_report_rows(report) == 1);
  mmv_report_free(report);
  mmv_dataset_free(data);
}

TEST_CASE("plans validate without running") {
  mmv_options o;
  mmv_options_init(&o);
  o.repetitions = 400;
  o.d = 2;
  char* text = nullptr;
  REQUIRE(mmv_cv_plan_simulation("III", 160, 200, "mmv+knn,knn", &o, &text) == MMV_OK);
  const auto plan = nlohmann::json::parse(take(text));
  CHECK(plan.at("n") == 160);
  CHECK(plan.at("p") == 200);
  CHECK(plan.at("model") == "III");
  CHECK(plan.at("methods").size() == 2);

  CHECK(mmv_cv_plan_simulation("I", 79, 200, "lda", &o, &text) == MMV_ERR_ODD_N);
  CHECK(text == nullptr);

  mmv_dataset* data = nullptr;
  mmv_options small = o;
  REQUIRE(mmv_dataset_simulate("II", 10, 5, &small, &data) == MMV_OK);
  CHECK(mmv_cv_plan_dataset(data, "lda", &o, &text) == MMV_ERR_TOO_MANY_FOLDS);
  o.folds = 2;
  o.d = 1;
  REQUIRE(mmv_cv_plan_dataset(data, "lda", &o, &text) == MMV_OK);
  mmv_string_free(text);
  mmv_dataset_free(data);
}
