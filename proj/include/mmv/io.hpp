#pragma once

// File formats: dataset CSV, direction-basis JSON and experiment tables.
//
// Dataset CSV: one header row, comma separated, the label column selected by
// name (default "y") and every other column parsed as a real feature in
// header order. Values are written with 17 significant digits so a write/read
// round trip is lossless.

#include "mmv/core_model.hpp"
#include "mmv/eval_harness.hpp"
#include "mmv/optimizer.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mmv {

inline constexpr const char* kDefaultLabelColumn = "y";

Dataset load_csv(const std::string& path, const std::string& label_column = kDefaultLabelColumn);
Dataset parse_csv(std::istream& in, const std::string& label_column = kDefaultLabelColumn,
                  const std::string& source = "<stream>");

void write_csv(const Dataset& data, std::ostream& out,
               const std::string& label_column = kDefaultLabelColumn);
void save_csv(const Dataset& data, const std::string& path,
              const std::string& label_column = kDefaultLabelColumn);

/// 17-significant-digit rendering used by the CSV writer.
std::string format_real(double value);

struct FitRecord {
  ExtractionResult extraction;
  /// Screened column indices (best first); empty when no screening ran.
  std::vector<std::size_t> screened;
  std::size_t p = 0;
  nlohmann::json config;
};

/// Directions are reported in original p-space (zeros on screened-out columns).
nlohmann::json fit_to_json(const FitRecord& record);

enum class TableFormat { Csv, Json };

/// Rows of (method, mean error %, sd %, repetitions, single_rep) with
/// percentages rounded to 2 decimals.
std::string format_report(const std::vector<ExperimentReport>& reports, TableFormat format);

struct ReportRow {
  std::string method;
  double mean_pct = 0.0;
  double sd_pct = 0.0;
  std::size_t repetitions = 0;
  bool single_rep = false;
};

/// Reads either table format back.
std::vector<ReportRow> parse_report(const std::string& text, TableFormat format);

}  // namespace mmv
