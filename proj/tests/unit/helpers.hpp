#pragma once

// Shared fixtures and independent reference computations for the tests.

#include "mmv/core_model.hpp"
#include "mmv/simgen.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace mmv::testing {

// Runs fn and returns the ErrorCode it threw, if any.
inline std::optional<ErrorCode> error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const MmvError& e) {
    return e.code();
  }
  return std::nullopt;
}

inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return validate_dataset(std::move(x), labels);
}

inline Dataset column_dataset(const std::vector<double>& column, const std::vector<int>& labels) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(column.size()), 1);
  for (std::size_t i = 0; i < column.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = column[i];
  return validate_dataset(std::move(x), labels);
}

inline double phi(double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); }

// Definition-level MV: F and F_r evaluated by counting (step) or by summing
// Phi((z - Z_j) / h) (Gaussian smoothing), with no sorting or symmetry tricks.
inline double reference_mv(const std::vector<double>& z, const std::vector<int>& y, int classes,
                           double h = 0.0) {
  const std::size_t n = z.size();
  auto weight = [&](double at, double zj) {
    if (h <= 0.0) return zj <= at ? 1.0 : 0.0;
    return phi((at - zj) / h);
  };
  double total = 0.0;
  for (int r = 0; r < classes; ++r) {
    std::size_t nr = 0;
    for (int label : y) nr += label == r ? 1 : 0;
    const double pr = static_cast<double>(nr) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double f = 0.0;
      double fr = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double w = weight(z[i], z[j]);
        f += w;
        if (y[j] == r) fr += w;
      }
      f /= static_cast<double>(n);
      fr /= static_cast<double>(nr);
      total += pr * (f - fr) * (f - fr);
    }
  }
  return total / static_cast<double>(n);
}

inline double abs_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Two Gaussian classes X | Y=+-1 ~ N(+-mu, sigma) with n1 = round(p1 * n) class +1 rows first.
inline Dataset gaussian_two_class(std::size_t n, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                  RngStream rng, double p1 = 0.5) {
  const Eigen::MatrixXd factor = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
  const auto p = mu.size();
  const auto n1 = static_cast<std::size_t>(std::lround(p1 * static_cast<double>(n)));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), p);
  std::vector<int> labels(n);
  Eigen::VectorXd e(p);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = i < n1 ? 1 : -1;
    for (Eigen::Index j = 0; j < p; ++j) e[j] = rng.normal();
    x.row(static_cast<Eigen::Index>(i)) = (labels[i] * mu + factor * e).transpose();
  }
  return validate_dataset(std::move(x), labels);
}

inline Eigen::VectorXd unit(Eigen::Index p, Eigen::Index k) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
  e[k] = 1.0;
  return e;
}

// Column vector orthogonal (in the covariance inner product) to every given
// direction, so its projection is independent of theirs under N(0, cov).
inline Eigen::VectorXd cov_orthogonal(const Eigen::MatrixXd& cov, const std::vector<Eigen::VectorXd>& dirs,
                                      const Eigen::VectorXd& start) {
  Eigen::MatrixXd a(cov.rows(), static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t k = 0; k < dirs.size(); ++k) a.col(static_cast<Eigen::Index>(k)) = cov * dirs[k];
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                            Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::VectorXd v = start - q * (q.transpose() * start);
  return v / v.norm();
}

}  // namespace mmv::testing
