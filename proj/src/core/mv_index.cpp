#include "mmv/mv_index.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mmv {

namespace {

std::vector<std::size_t> count_classes(std::span<const int> labels, std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      throw MmvError(ErrorCode::InvalidArgument, "label outside 0..R-1");
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  for (std::size_t r = 0; r < num_classes; ++r) {
    if (counts[r] == 0) {
      throw MmvError(ErrorCode::EmptyClass, "class " + std::to_string(r) + " has no samples");
    }
  }
  return counts;
}

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw MmvError(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  }
  if (scores.empty()) throw MmvError(ErrorCode::EmptySample, "MV of an empty sample");
}

double mv_step(std::span<const double> scores, std::span<const int> labels,
               const std::vector<std::size_t>& counts) {
  const std::size_t n = scores.size();
  const std::size_t num_classes = counts.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b] || (scores[a] == scores[b] && a < b);
  });

  const auto dn = static_cast<double>(n);
  std::vector<std::size_t> below(num_classes, 0);
  std::size_t below_total = 0;
  double total = 0.0;
  for (std::size_t start = 0; start < n;) {
    std::size_t stop = start;
    // Ties share F(z) = P(Z <= z), so the whole group is counted before evaluating.
    while (stop < n && scores[order[stop]] == scores[order[start]]) {
      ++below[static_cast<std::size_t>(labels[order[stop]])];
      ++below_total;
      ++stop;
    }
    const double overall = static_cast<double>(below_total) / dn;
    double gap = 0.0;
    for (std::size_t r = 0; r < num_classes; ++r) {
      const auto nr = static_cast<double>(counts[r]);
      const double diff = overall - static_cast<double>(below[r]) / nr;
      gap += (nr / dn) * diff * diff;
    }
    total += static_cast<double>(stop - start) * gap;
    start = stop;
  }
  return total / dn;
}

// Accumulates A(i, r) = sum_{j in class r} G((z_i - z_j) / h); when `kernel_out`
// is given it also stores K(u_ij) for i < j in row-major packed order.
Eigen::MatrixXd smoothed_mass(std::span<const double> scores, std::span<const int> labels,
                              std::size_t num_classes, KernelFamily family, double h,
                              std::vector<double>* kernel_out) {
  const std::size_t n = scores.size();
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_classes),
                                               static_cast<Eigen::Index>(n));
  const double self = integrated_kernel(family, 0.0);
  if (kernel_out) kernel_out->resize(n * (n - 1) / 2);
  std::size_t packed = 0;
  const double inv_h = 1.0 / h;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ci = static_cast<Eigen::Index>(labels[i]);
    const auto ii = static_cast<Eigen::Index>(i);
    mass(ci, ii) += self;
    double* col_i = mass.col(ii).data();
    for (std::size_t j = i + 1; j < n; ++j) {
      const double u = (scores[i] - scores[j]) * inv_h;
      const double g = integrated_kernel(family, u);
      col_i[labels[j]] += g;
      mass(ci, static_cast<Eigen::Index>(j)) += 1.0 - g;
      if (kernel_out) (*kernel_out)[packed++] = kernel_density(family, u);
    }
  }
  return mass;
}

// D(r, i) = F(z_i) - F_r(z_i) and the resulting MV value.
double gaps_from_mass(const Eigen::MatrixXd& mass, const std::vector<std::size_t>& counts,
                      Eigen::MatrixXd& gaps) {
  const auto n = static_cast<double>(mass.cols());
  gaps.resize(mass.rows(), mass.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < mass.cols(); ++i) {
    const double overall = mass.col(i).sum() / n;
    for (Eigen::Index r = 0; r < mass.rows(); ++r) {
      const auto nr = static_cast<double>(counts[static_cast<std::size_t>(r)]);
      const double d = overall - mass(r, i) / nr;
      gaps(r, i) = d;
      total += (nr / n) * d * d;
    }
  }
  return total / n;
}

}  // namespace

void check_mv_config(const MvConfig& config) {
  if (const auto* fixed = std::get_if<FixedBandwidth>(&config.bandwidth)) {
    if (!is_step(config.cdf_mode)) check_kernel({KernelFamily::Gaussian, fixed->value});
  }
}

double resolve_bandwidth(std::span<const double> scores, const MvConfig& config) {
  if (is_step(config.cdf_mode)) return 0.0;
  if (const auto* fixed = std::get_if<FixedBandwidth>(&config.bandwidth)) {
    check_kernel({KernelFamily::Gaussian, fixed->value});
    return fixed->value;
  }
  return bandwidth_rule(scores);
}

MvConfig freeze_bandwidth(const MvConfig& config, double h) {
  MvConfig out = config;
  if (!is_step(config.cdf_mode)) out.bandwidth = FixedBandwidth{h};
  return out;
}

double mv_empirical(std::span<const double> scores, std::span<const int> labels,
                    std::size_t num_classes, const MvConfig& config) {
  check_inputs(scores, labels);
  const auto counts = count_classes(labels, num_classes);
  if (is_step(config.cdf_mode)) return mv_step(scores, labels, counts);

  const auto family = std::get<SmoothedMode>(config.cdf_mode).family;
  const double h = resolve_bandwidth(scores, config);
  const Eigen::MatrixXd mass = smoothed_mass(scores, labels, num_classes, family, h, nullptr);
  Eigen::MatrixXd gaps;
  return gaps_from_mass(mass, counts, gaps);
}

MvValueGradient mv_value_and_score_gradient(std::span<const double> scores,
                                            std::span<const int> labels,
                                            std::size_t num_classes, KernelFamily family,
                                            double bandwidth) {
  check_inputs(scores, labels);
  check_kernel({family, bandwidth});
  const auto counts = count_classes(labels, num_classes);
  const std::size_t n = scores.size();

  std::vector<double> kernel;
  const Eigen::MatrixXd mass = smoothed_mass(scores, labels, num_classes, family, bandwidth, &kernel);
  Eigen::MatrixXd gaps;
  MvValueGradient out;
  out.value = gaps_from_mass(mass, counts, gaps);

  // Because sum_r p_r D(r, i) = 0, the chain rule collapses to
  //   dMV/dz_k = -2/(n^2 h) sum_j [D(c_j, k) - D(c_k, j)] K(u_kj).
  out.score_gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::size_t packed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto ci = static_cast<Eigen::Index>(labels[i]);
    double acc = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double e = (gaps(labels[j], ii) - gaps(ci, jj)) * kernel[packed++];
      acc += e;
      out.score_gradient[jj] -= e;
    }
    out.score_gradient[ii] += acc;
  }
  const auto dn = static_cast<double>(n);
  out.score_gradient *= -2.0 / (dn * dn * bandwidth);
  return out;
}

std::vector<double> project(const Dataset& data, const Eigen::VectorXd& beta) {
  if (static_cast<std::size_t>(beta.size()) != data.cols()) {
    throw MmvError(ErrorCode::DimensionMismatch, "direction length " +
                                                     std::to_string(beta.size()) +
                                                     " does not match p=" +
                                                     std::to_string(data.cols()));
  }
  if (!(beta.norm() > 0.0)) throw MmvError(ErrorCode::InvalidArgument, "direction has zero norm");
  const Eigen::VectorXd z = data.features() * beta;
  return {z.data(), z.data() + z.size()};
}

double mv_of_direction(const Dataset& data, const Eigen::VectorXd& beta, const MvConfig& config) {
  const auto scores = project(data, beta);
  return mv_empirical(scores, data.labels(), data.num_classes(), config);
}

Eigen::VectorXd mv_gradient(const Dataset& data, const Eigen::VectorXd& beta,
                            const MvConfig& config) {
  if (is_step(config.cdf_mode)) {
    throw MmvError(ErrorCode::StepModeGradient, "step-mode MV is piecewise constant; "
                                                "use the smoothed CDF mode for gradients");
  }
  const auto scores = project(data, beta);
  const MvConfig frozen = freeze_bandwidth(config, resolve_bandwidth(scores, config));
  const double eps = std::cbrt(std::numeric_limits<double>::epsilon());

  Eigen::VectorXd grad(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double step = eps * std::max(1.0, std::abs(beta[j]));
    Eigen::VectorXd forward = beta;
    Eigen::VectorXd backward = beta;
    forward[j] += step;
    backward[j] -= step;
    const auto zf = project(data, forward);
    const auto zb = project(data, backward);
    grad[j] = (mv_empirical(zf, data.labels(), data.num_classes(), frozen) -
               mv_empirical(zb, data.labels(), data.num_classes(), frozen)) /
              (forward[j] - backward[j]);
  }
  return grad;
}

Eigen::VectorXd mv_gradient_analytic(const Dataset& data, const Eigen::VectorXd& beta,
                                     const MvConfig& config) {
  if (is_step(config.cdf_mode)) {
    throw MmvError(ErrorCode::StepModeGradient, "step-mode MV is piecewise constant; "
                                                "use the smoothed CDF mode for gradients");
  }
  const auto scores = project(data, beta);
  const double h = resolve_bandwidth(scores, config);
  const auto family = std::get<SmoothedMode>(config.cdf_mode).family;
  const auto eval = mv_value_and_score_gradient(scores, data.labels(), data.num_classes(), family, h);
  return data.features().transpose() * eval.score_gradient;
}

void check_gaussian_model(const GaussianTwoClassModel& model) {
  const auto p = model.mu.size();
  if (p < 1 || model.sigma.rows() != p || model.sigma.cols() != p) {
    throw MmvError(ErrorCode::DimensionMismatch, "mu and sigma dimensions disagree");
  }
  if (!(model.p1 > 0.0 && model.p1 < 1.0)) {
    throw MmvError(ErrorCode::InvalidArgument, "class probability p1 must lie in (0, 1)");
  }
  if ((model.sigma - model.sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw MmvError(ErrorCode::InvalidArgument, "sigma is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.sigma, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
    throw MmvError(ErrorCode::InvalidArgument, "sigma is not positive definite");
  }
}

double standardized_separation(const Eigen::VectorXd& beta, const GaussianTwoClassModel& model) {
  check_gaussian_model(model);
  if (beta.size() != model.mu.size()) {
    throw MmvError(ErrorCode::DimensionMismatch, "direction length does not match the model");
  }
  if (!(beta.norm() > 0.0)) throw MmvError(ErrorCode::InvalidArgument, "direction has zero norm");
  return beta.dot(model.mu) / std::sqrt(beta.dot(model.sigma * beta));
}

double mv_population_gaussian_delta(double delta, double p1) {
  if (!(p1 > 0.0 && p1 < 1.0)) {
    throw MmvError(ErrorCode::InvalidArgument, "class probability p1 must lie in (0, 1)");
  }
  const double p2 = 1.0 - p1;
  const auto expected_gap = [](double shift) {
    const auto integrand = [shift](double t) {
      const double d = integrated_kernel(KernelFamily::Gaussian, t) -
                       integrated_kernel(KernelFamily::Gaussian, t + shift);
      return d * d * kernel_density(KernelFamily::Gaussian, t);
    };
    double error = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, -inf, inf, 15, 1e-13, &error);
    if (!std::isfinite(value) || error > 1e-10) {
      throw MmvError(ErrorCode::QuadratureFailure,
                     "quadrature error estimate " + std::to_string(error) + " exceeds 1e-10");
    }
    return value;
  };
  return p1 * p2 * (p1 * expected_gap(2.0 * delta) + p2 * expected_gap(-2.0 * delta));
}

double mv_population_gaussian(const Eigen::VectorXd& beta, const GaussianTwoClassModel& model) {
  return mv_population_gaussian_delta(standardized_separation(beta, model), model.p1);
}

std::vector<double> marginal_mv(const Dataset& data) {
  std::vector<double> out(data.cols());
  const MvConfig step = MvConfig::step();
  for (std::size_t j = 0; j < data.cols(); ++j) {
    const auto column = data.features().col(static_cast<Eigen::Index>(j));
    const std::vector<double> scores(column.data(), column.data() + column.size());
    out[j] = mv_empirical(scores, data.labels(), data.num_classes(), step);
  }
  return out;
}

std::vector<std::size_t> screen_by_mv(const Dataset& data, std::size_t keep) {
  if (keep < 1 || keep > data.cols()) {
    throw MmvError(ErrorCode::KeepOutOfRange, "screening size " + std::to_string(keep) +
                                                  " outside 1.." + std::to_string(data.cols()));
  }
  const auto values = marginal_mv(data);
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  order.resize(keep);
  return order;
}

}  // namespace mmv
