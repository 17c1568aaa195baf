#include "mmv/simgen.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mmv {

std::optional<SimModel> parse_sim_model(std::string_view text) {
  if (text == "I" || text == "1") return SimModel::I;
  if (text == "II" || text == "2") return SimModel::II;
  if (text == "III" || text == "3") return SimModel::III;
  if (text == "IV" || text == "4") return SimModel::IV;
  return std::nullopt;
}

std::string_view sim_model_name(SimModel model) {
  switch (model) {
    case SimModel::I: return "I";
    case SimModel::II: return "II";
    case SimModel::III: return "III";
    case SimModel::IV: return "IV";
  }
  return "?";
}

Eigen::MatrixXd ar_covariance(std::size_t p, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw MmvError(ErrorCode::InvalidArgument, "AR coefficient must lie in (0, 1)");
  }
  const auto pi = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd out(pi, pi);
  for (Eigen::Index i = 0; i < pi; ++i) {
    for (Eigen::Index j = 0; j < pi; ++j) {
      out(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return out;
}

Eigen::VectorXd beta1(std::size_t p) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(4, b.size()); ++j) b[j] = 1.0;
  return b;
}

Eigen::VectorXd beta2(std::size_t p) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(4, b.size()); ++j) b[j] = j % 2 == 0 ? 1.0 : -1.0;
  return b;
}

namespace {

void require_p(std::size_t p, std::string_view model) {
  if (p < 4) {
    throw MmvError(ErrorCode::InvalidArgument,
                   "model " + std::string(model) + " needs p >= 4, got p=" + std::to_string(p));
  }
}

Eigen::MatrixXd noise_factor(std::size_t p, const SimOptions& options) {
  const auto pi = static_cast<Eigen::Index>(p);
  if (options.identity_covariance) return Eigen::MatrixXd::Identity(pi, pi);
  const Eigen::LLT<Eigen::MatrixXd> llt(ar_covariance(p, options.rho));
  return llt.matrixL();
}

// Rows of L z with z standard normal, drawn row by row.
Eigen::MatrixXd correlated_normals(std::size_t n, std::size_t p, const Eigen::MatrixXd& factor,
                                   RngStream& rng) {
  const auto pi = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), pi);
  Eigen::VectorXd z(pi);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < pi; ++j) z[j] = rng.normal();
    x.row(i) = (factor * z).transpose();
  }
  return x;
}

template <typename Rule>
Dataset index_model(std::size_t n, std::size_t p, RngStream& rng, const SimOptions& options,
                    Rule rule) {
  const Eigen::MatrixXd factor = noise_factor(p, options);
  Eigen::MatrixXd x = correlated_normals(n, p, factor, rng);
  if (options.zero_features) x.setZero();
  const Eigen::VectorXd b1 = beta1(p);
  const Eigen::VectorXd b2 = beta2(p);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = options.zero_noise ? 0.0 : rng.normal();
    const auto row = x.row(static_cast<Eigen::Index>(i));
    labels[i] = rule(row.dot(b1), row.dot(b2), eps) ? 1 : 0;
  }
  return validate_dataset(std::move(x), labels);
}

}  // namespace

// 1 / (1 + exp(b'x)) >= 0.5  <=>  b'x <= 0
bool model_ii_rule(double s1) { return s1 <= 0.0; }

bool model_iii_rule(double s1, double s2, double eps) {
  return s1 / (0.5 + (s2 + 1.5) * (s2 + 1.5)) + 0.2 * eps >= 0.0;
}

bool model_iv_rule(double s1, double s2, double eps) { return s1 * s1 + s2 * s2 + 0.2 * eps >= 1.0; }

Dataset gen_model_i(std::size_t n, std::size_t p, RngStream rng, const SimOptions& options) {
  if (n % 2 != 0) {
    throw MmvError(ErrorCode::OddN, "model I needs an even n (balanced +1/-1 labels), got n=" +
                                        std::to_string(n));
  }
  require_p(p, "I");
  const Eigen::MatrixXd factor = noise_factor(p, options);
  Eigen::MatrixXd x = correlated_normals(n, p, factor, rng);
  if (options.zero_noise) x.setZero();
  const Eigen::VectorXd b1 = beta1(p);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = i < n / 2 ? 1 : -1;
    x.row(static_cast<Eigen::Index>(i)) += labels[i] * b1.transpose();
  }
  return validate_dataset(std::move(x), labels);
}

Dataset gen_model_ii(std::size_t n, std::size_t p, RngStream rng, const SimOptions& options) {
  require_p(p, "II");
  return index_model(n, p, rng, options,
                     [](double s1, double, double) { return model_ii_rule(s1); });
}

Dataset gen_model_iii(std::size_t n, std::size_t p, RngStream rng, const SimOptions& options) {
  require_p(p, "III");
  return index_model(n, p, rng, options, model_iii_rule);
}

Dataset gen_model_iv(std::size_t n, std::size_t p, RngStream rng, const SimOptions& options) {
  require_p(p, "IV");
  return index_model(n, p, rng, options, model_iv_rule);
}

Dataset generate(SimModel model, std::size_t n, std::size_t p, RngStream rng,
                 const SimOptions& options) {
  switch (model) {
    case SimModel::I: return gen_model_i(n, p, rng, options);
    case SimModel::II: return gen_model_ii(n, p, rng, options);
    case SimModel::III: return gen_model_iii(n, p, rng, options);
    case SimModel::IV: return gen_model_iv(n, p, rng, options);
  }
  throw MmvError(ErrorCode::InvalidArgument, "unknown model");
}

Dataset generate(const ModelSpec& spec, const SimOptions& options) {
  return generate(spec.model, spec.n, spec.p, RngStream(spec.seed).derive("simulate"), options);
}

}  // namespace mmv
