#pragma once

// Shared domain types: validated datasets, direction bases, error codes and
// the keyed random stream used by every stochastic component.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmv {

enum class ErrorCode {
  InvalidArgument = 1,
  NonFiniteValue,
  SingleClass,
  EmptyInput,
  EmptyClass,
  EmptySample,
  NonPositiveBandwidth,
  DegenerateScores,
  StepModeGradient,
  QuadratureFailure,
  KeepOutOfRange,
  RankDeficientPrev,
  InfeasibleSubspace,
  NotBinary,
  DegenerateCovariance,
  KTooLarge,
  DimensionMismatch,
  OddN,
  TooManyFolds,
  ParseError,
  MissingLabelColumn,
  IoError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class MmvError : public std::runtime_error {
public:
  MmvError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// n x p predictor matrix with dense class ids 0..R-1.
///
/// Only obtainable through validate_dataset (or subset of a valid dataset), so
/// every instance satisfies: finite features, n >= 2, p >= 1, R >= 2 and every
/// class represented.
class Dataset {
public:
  const Eigen::MatrixXd& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  /// Original label text, indexed by class id.
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  const std::vector<std::size_t>& class_counts() const noexcept { return class_counts_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

  std::size_t rows() const noexcept { return static_cast<std::size_t>(features_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  std::size_t num_classes() const noexcept { return class_names_.size(); }

  /// Row subset keeping the parent's class ids and names. Throws EmptyClass
  /// when a class disappears from the subset.
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Column subset (screening); labels untouched.
  Dataset select_columns(std::span<const std::size_t> cols) const;

  /// Same labels, new feature matrix with identical row count (projections).
  Dataset with_features(Eigen::MatrixXd features) const;

private:
  friend Dataset validate_dataset(Eigen::MatrixXd, std::span<const std::string>,
                                  std::vector<std::string>);
  Dataset() = default;

  Eigen::MatrixXd features_;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  std::vector<std::size_t> class_counts_;
  std::vector<std::string> feature_names_;
};

/// Validates features/labels and densifies labels in first-appearance order.
/// Empty feature_names means x1..xp.
Dataset validate_dataset(Eigen::MatrixXd features, std::span<const std::string> labels,
                         std::vector<std::string> feature_names = {});
Dataset validate_dataset(Eigen::MatrixXd features, std::span<const int> labels,
                         std::vector<std::string> feature_names = {});

/// p_r = n_r / n.
std::vector<double> class_proportions(const Dataset& data);

/// Ordered orthonormal directions with the MV value each one achieved.
struct DirectionBasis {
  std::vector<Eigen::VectorXd> directions;
  std::vector<double> mv_values;

  std::size_t size() const noexcept { return directions.size(); }
  std::size_t dimension() const noexcept {
    return directions.empty() ? 0 : static_cast<std::size_t>(directions.front().size());
  }
  /// p x d matrix whose columns are the directions.
  Eigen::MatrixXd as_matrix() const;
};

/// Throws InvalidArgument when unit norm / orthogonality / MV range are violated.
void check_basis_invariants(const DirectionBasis& basis);

/// Keyed counter-based generator. A (seed, stream) pair always yields the same
/// draw sequence; child streams are derived by hashing purpose tags and
/// indices into the stream id, so parallel work never shares state.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  RngStream derive(std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0,
                   std::uint64_t c = 0) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;

  template <typename T>
  void shuffle(std::vector<T>& values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mmv
