#include "mmv/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mmv {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_real(const std::string& text, double& value) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && begin != end;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

std::string fixed2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::string& label_column, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) {
    throw MmvError(ErrorCode::ParseError, source + ": missing header row");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::size_t label_index = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) {
      label_index = j;
      break;
    }
  }
  if (label_index == header.size()) {
    throw MmvError(ErrorCode::MissingLabelColumn,
                   source + ": no column named '" + label_column + "' in header");
  }
  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != label_index) feature_names.push_back(header[j]);
  }

  std::vector<double> values;
  std::vector<std::string> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw MmvError(ErrorCode::ParseError, source + ": line " + std::to_string(line_no) + " has " +
                                                std::to_string(fields.size()) + " fields, header has " +
                                                std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string cell = trim(fields[j]);
      if (j == label_index) {
        labels.push_back(cell);
        continue;
      }
      double v = 0.0;
      if (!parse_real(cell, v)) {
        throw MmvError(ErrorCode::ParseError, source + ": line " + std::to_string(line_no) +
                                                  " (data row " + std::to_string(labels.size()) +
                                                  "), column '" + header[j] + "': '" + cell +
                                                  "' is not a number");
      }
      values.push_back(v);
    }
  }
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto p = static_cast<Eigen::Index>(feature_names.size());
  Eigen::MatrixXd features(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) features(i, j) = values[static_cast<std::size_t>(i * p + j)];
  }
  return validate_dataset(std::move(features), labels, std::move(feature_names));
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw MmvError(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  return parse_csv(in, label_column, path);
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_csv(const Dataset& data, std::ostream& out, const std::string& label_column) {
  for (const auto& name : data.feature_names()) out << quote_if_needed(name) << ',';
  out << quote_if_needed(label_column) << '\n';
  const Eigen::MatrixXd& x = data.features();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out << format_real(x(i, j)) << ',';
    out << quote_if_needed(data.class_names()[static_cast<std::size_t>(data.labels()[static_cast<std::size_t>(i)])])
        << '\n';
  }
}

void save_csv(const Dataset& data, const std::string& path, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw MmvError(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  write_csv(data, out, label_column);
  if (!out) throw MmvError(ErrorCode::IoError, "write to '" + path + "' failed");
}

nlohmann::json fit_to_json(const FitRecord& record) {
  using nlohmann::json;
  json directions = json::array();
  for (const auto& dir : record.extraction.basis.directions) {
    std::vector<double> full(record.p, 0.0);
    for (Eigen::Index j = 0; j < dir.size(); ++j) {
      const auto original = record.screened.empty() ? static_cast<std::size_t>(j)
                                                      : record.screened[static_cast<std::size_t>(j)];
      full[original] = dir[j];
    }
    directions.push_back(full);
  }
  json diagnostics = json::array();
  for (const auto& d : record.extraction.diagnostics) {
    diagnostics.push_back({{"winner_restart", d.winner_restart},
                           {"iterations", d.iterations},
                           {"projected_gradient_norm", d.projected_gradient_norm},
                           {"bandwidth", d.bandwidth},
                           {"no_ascent", d.no_ascent}});
  }
  json out = {{"p", record.p},
              {"effective_d", record.extraction.effective_d()},
              {"directions", directions},
              {"mv_values", record.extraction.basis.mv_values},
              {"screened_indices", record.screened},
              {"diagnostics", diagnostics},
              {"config", record.config}};
  if (record.extraction.below_floor) {
    out["below_floor_mv"] = record.extraction.below_floor->mv_value;
  }
  return out;
}

std::string format_report(const std::vector<ExperimentReport>& reports, TableFormat format) {
  if (format == TableFormat::Csv) {
    std::ostringstream out;
    out << "method,mean_error_pct,sd_pct,repetitions,single_rep\n";
    for (const auto& r : reports) {
      out << quote_if_needed(r.method) << ',' << fixed2(100.0 * r.mean) << ','
          << fixed2(100.0 * r.sd) << ',' << r.repetitions << ',' << (r.single_repetition ? 1 : 0)
          << '\n';
    }
    return out.str();
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reports) {
    rows.push_back({{"method", r.method},
                    {"mean_error_pct", round2(100.0 * r.mean)},
                    {"sd_pct", round2(100.0 * r.sd)},
                    {"repetitions", r.repetitions},
                    {"single_rep", r.single_repetition},
                    {"errors", r.errors}});
  }
  return nlohmann::json{{"rows", rows}}.dump(2) + "\n";
}

std::vector<ReportRow> parse_report(const std::string& text, TableFormat format) {
  std::vector<ReportRow> out;
  if (format == TableFormat::Json) {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& row : doc.at("rows")) {
      out.push_back({row.at("method").get<std::string>(), row.at("mean_error_pct").get<double>(),
                     row.at("sd_pct").get<double>(), row.at("repetitions").get<std::size_t>(),
                     row.at("single_rep").get<bool>()});
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    ReportRow row;
    if (f.size() != 5 || !parse_real(trim(f[1]), row.mean_pct) || !parse_real(trim(f[2]), row.sd_pct)) {
      throw MmvError(ErrorCode::ParseError, "report line " + std::to_string(line_no) + " is malformed");
    }
    row.method = f[0];
    row.repetitions = static_cast<std::size_t>(std::stoul(f[3]));
    row.single_rep = trim(f[4]) == "1";
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace mmv
