#include "mmv/core_model.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

namespace mmv {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::NonPositiveBandwidth: return "NonPositiveBandwidth";
    case ErrorCode::DegenerateScores: return "DegenerateScores";
    case ErrorCode::StepModeGradient: return "StepModeGradient";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::KeepOutOfRange: return "KeepOutOfRange";
    case ErrorCode::RankDeficientPrev: return "RankDeficientPrev";
    case ErrorCode::InfeasibleSubspace: return "InfeasibleSubspace";
    case ErrorCode::NotBinary: return "NotBinary";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OddN: return "OddN";
    case ErrorCode::TooManyFolds: return "TooManyFolds";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingLabelColumn: return "MissingLabelColumn";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Dataset validate_dataset(Eigen::MatrixXd features, std::span<const std::string> labels,
                         std::vector<std::string> feature_names) {
  const auto n = static_cast<std::size_t>(features.rows());
  const auto p = static_cast<std::size_t>(features.cols());
  if (labels.size() != n) {
    throw MmvError(ErrorCode::InvalidArgument,
                   "feature rows (" + std::to_string(n) + ") and labels (" +
                       std::to_string(labels.size()) + ") differ in length");
  }
  if (n < 2 || p < 1) {
    throw MmvError(ErrorCode::EmptyInput, "dataset needs n >= 2 and p >= 1, got n=" +
                                              std::to_string(n) + ", p=" + std::to_string(p));
  }
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      if (!std::isfinite(features(i, j))) {
        throw MmvError(ErrorCode::NonFiniteValue, "non-finite feature value at row " +
                                                      std::to_string(i + 1) + ", column " +
                                                      std::to_string(j + 1));
      }
    }
  }
  if (!feature_names.empty() && feature_names.size() != p) {
    throw MmvError(ErrorCode::InvalidArgument, "feature name count does not match p");
  }

  Dataset out;
  std::unordered_map<std::string, int> ids;
  out.labels_.reserve(n);
  for (const auto& label : labels) {
    auto [it, inserted] = ids.try_emplace(label, static_cast<int>(out.class_names_.size()));
    if (inserted) {
      out.class_names_.push_back(label);
      out.class_counts_.push_back(0);
    }
    out.labels_.push_back(it->second);
    ++out.class_counts_[static_cast<std::size_t>(it->second)];
  }
  if (out.class_names_.size() < 2) {
    throw MmvError(ErrorCode::SingleClass, "labels contain a single class '" +
                                               out.class_names_.front() + "'; need R >= 2");
  }
  if (feature_names.empty()) {
    feature_names.reserve(p);
    for (std::size_t j = 0; j < p; ++j) feature_names.push_back("x" + std::to_string(j + 1));
  }
  out.features_ = std::move(features);
  out.feature_names_ = std::move(feature_names);
  return out;
}

Dataset validate_dataset(Eigen::MatrixXd features, std::span<const int> labels,
                         std::vector<std::string> feature_names) {
  std::vector<std::string> text;
  text.reserve(labels.size());
  for (int label : labels) text.push_back(std::to_string(label));
  return validate_dataset(std::move(features), text, std::move(feature_names));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.class_names_ = class_names_;
  out.feature_names_ = feature_names_;
  out.class_counts_.assign(class_names_.size(), 0);
  out.features_.resize(static_cast<Eigen::Index>(rows.size()), features_.cols());
  out.labels_.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= this->rows()) {
      throw MmvError(ErrorCode::InvalidArgument, "row index out of range in subset");
    }
    out.features_.row(static_cast<Eigen::Index>(k)) =
        features_.row(static_cast<Eigen::Index>(rows[k]));
    const int label = labels_[rows[k]];
    out.labels_.push_back(label);
    ++out.class_counts_[static_cast<std::size_t>(label)];
  }
  for (std::size_t r = 0; r < out.class_counts_.size(); ++r) {
    if (out.class_counts_[r] == 0) {
      throw MmvError(ErrorCode::EmptyClass,
                     "row subset has no member of class '" + class_names_[r] + "'");
    }
  }
  if (rows.size() < 2) throw MmvError(ErrorCode::EmptyInput, "row subset needs n >= 2");
  return out;
}

Dataset Dataset::select_columns(std::span<const std::size_t> cols) const {
  if (cols.empty()) throw MmvError(ErrorCode::EmptyInput, "column subset must be nonempty");
  Dataset out = *this;
  out.features_.resize(features_.rows(), static_cast<Eigen::Index>(cols.size()));
  out.feature_names_.clear();
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] >= this->cols()) {
      throw MmvError(ErrorCode::InvalidArgument, "column index out of range in select_columns");
    }
    out.features_.col(static_cast<Eigen::Index>(k)) =
        features_.col(static_cast<Eigen::Index>(cols[k]));
    out.feature_names_.push_back(feature_names_[cols[k]]);
  }
  return out;
}

Dataset Dataset::with_features(Eigen::MatrixXd features) const {
  if (features.rows() != features_.rows() || features.cols() < 1) {
    throw MmvError(ErrorCode::DimensionMismatch, "replacement features must keep the row count");
  }
  if (!features.allFinite()) {
    throw MmvError(ErrorCode::NonFiniteValue, "replacement features contain non-finite values");
  }
  Dataset out = *this;
  out.features_ = std::move(features);
  out.feature_names_.clear();
  for (Eigen::Index j = 0; j < out.features_.cols(); ++j) {
    out.feature_names_.push_back("z" + std::to_string(j + 1));
  }
  return out;
}

std::vector<double> class_proportions(const Dataset& data) {
  std::vector<double> out;
  out.reserve(data.num_classes());
  const auto n = static_cast<double>(data.rows());
  for (auto count : data.class_counts()) out.push_back(static_cast<double>(count) / n);
  return out;
}

Eigen::MatrixXd DirectionBasis::as_matrix() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(dimension()), static_cast<Eigen::Index>(size()));
  for (std::size_t k = 0; k < size(); ++k) out.col(static_cast<Eigen::Index>(k)) = directions[k];
  return out;
}

void check_basis_invariants(const DirectionBasis& basis) {
  if (basis.directions.size() != basis.mv_values.size()) {
    throw MmvError(ErrorCode::InvalidArgument, "direction and MV value counts differ");
  }
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (std::abs(basis.directions[k].norm() - 1.0) > 1e-8) {
      throw MmvError(ErrorCode::InvalidArgument,
                     "direction " + std::to_string(k) + " is not unit length");
    }
    if (!(basis.mv_values[k] >= 0.0 && basis.mv_values[k] <= 1.0)) {
      throw MmvError(ErrorCode::InvalidArgument,
                     "MV value " + std::to_string(k) + " outside [0, 1]");
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (std::abs(basis.directions[j].dot(basis.directions[k])) > 1e-6) {
        throw MmvError(ErrorCode::InvalidArgument, "directions " + std::to_string(j) + " and " +
                                                       std::to_string(k) + " are not orthogonal");
      }
    }
  }
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_tag(std::string_view tag) noexcept {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream), key_(mix64(mix64(seed + kGolden) ^ (stream * kGolden + 1))) {}

RngStream RngStream::derive(std::string_view tag, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c) const noexcept {
  std::uint64_t id = mix64(stream_ ^ hash_tag(tag));
  id = mix64(id ^ (a + kGolden));
  id = mix64(id ^ (b + 2 * kGolden));
  id = mix64(id ^ (c + 3 * kGolden));
  return RngStream(seed_, id);
}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() noexcept {
  // 53 random bits, shifted by half an ulp so 0 is excluded.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t RngStream::below(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = next_u64();
    const auto m = static_cast<unsigned __int128>(x) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

}  // namespace mmv
