#include "mmv/optimizer.hpp"

#include <cmath>
#include <string>

namespace mmv {

void check_optimizer_config(const OptimizerConfig& c) {
  const auto fail = [](const std::string& what) {
    throw MmvError(ErrorCode::InvalidArgument, "optimizer config: " + what);
  };
  if (c.restarts < 1) fail("restarts must be positive");
  if (c.max_iters < 1) fail("max_iters must be positive");
  if (!(c.step_init > 0.0)) fail("step_init must be positive");
  if (!(c.step_shrink > 0.0 && c.step_shrink < 1.0)) fail("step_shrink must lie in (0, 1)");
  if (!(c.grad_tol > 0.0)) fail("grad_tol must be positive");
  if (!(c.value_tol > 0.0)) fail("value_tol must be positive");
  if (!(c.mv_floor >= 0.0)) fail("mv_floor must be nonnegative");
}

Eigen::MatrixXd null_space_basis(const std::vector<Eigen::VectorXd>& prev, std::size_t p) {
  const auto k = prev.size();
  if (p < 1) throw MmvError(ErrorCode::InvalidArgument, "dimension must be positive");
  if (k >= p) {
    throw MmvError(ErrorCode::InfeasibleSubspace, std::to_string(k) +
                                                      " previous directions leave no room in p=" +
                                                      std::to_string(p));
  }
  const auto pi = static_cast<Eigen::Index>(p);
  if (k == 0) return Eigen::MatrixXd::Identity(pi, pi);

  Eigen::MatrixXd stacked(pi, static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    if (prev[j].size() != pi) {
      throw MmvError(ErrorCode::DimensionMismatch, "previous direction has wrong length");
    }
    stacked.col(static_cast<Eigen::Index>(j)) = prev[j];
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(static_cast<Eigen::Index>(k));
  const double scale = std::max(1.0, stacked.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
    if (!(std::abs(r(j, j)) > 1e-8 * scale)) {
      throw MmvError(ErrorCode::RankDeficientPrev, "previous directions are linearly dependent");
    }
  }
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(pi, pi);
  return q.rightCols(pi - static_cast<Eigen::Index>(k));
}

namespace {

Eigen::VectorXd moment_seed(const Dataset& data) {
  const Eigen::MatrixXd& x = data.features();
  const auto p = x.cols();
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);

  Eigen::MatrixXd class_means = Eigen::MatrixXd::Zero(p, static_cast<Eigen::Index>(data.num_classes()));
  for (std::size_t i = 0; i < data.rows(); ++i) {
    class_means.col(data.labels()[i]) += x.row(static_cast<Eigen::Index>(i)).transpose();
  }
  Eigen::Index best = 0;
  double best_dist = -1.0;
  for (Eigen::Index r = 0; r < class_means.cols(); ++r) {
    class_means.col(r) /= static_cast<double>(data.class_counts()[static_cast<std::size_t>(r)]);
    const double dist = (class_means.col(r) - mean).norm();
    if (dist > best_dist) {
      best_dist = dist;
      best = r;
    }
  }
  const double gamma = 1e-3 * cov.trace() / static_cast<double>(p);
  cov.diagonal().array() += gamma;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success) return Eigen::VectorXd::Zero(p);
  return ldlt.solve(class_means.col(best) - mean);
}

Eigen::VectorXd random_unit(const Eigen::MatrixXd& basis, RngStream& rng) {
  Eigen::VectorXd alpha(basis.cols());
  do {
    for (Eigen::Index j = 0; j < alpha.size(); ++j) alpha[j] = rng.normal();
  } while (!(alpha.norm() > 0.0));
  Eigen::VectorXd out = basis * alpha;
  return out / out.norm();
}

}  // namespace

std::vector<Eigen::VectorXd> initial_directions(const Dataset& data,
                                                const std::vector<Eigen::VectorXd>& prev,
                                                std::size_t count, RngStream rng) {
  const Eigen::MatrixXd basis = null_space_basis(prev, data.cols());
  std::vector<Eigen::VectorXd> out;
  if (count == 0) return out;
  out.reserve(count);

  const Eigen::VectorXd seed = moment_seed(data);
  const Eigen::VectorXd feasible = basis * (basis.transpose() * seed);
  const double norm = feasible.norm();
  if (seed.allFinite() && norm > 1e-12 * std::max(seed.norm(), 1e-300) && std::isfinite(norm)) {
    out.push_back(feasible / norm);
  } else {
    out.push_back(random_unit(basis, rng));
  }
  while (out.size() < count) out.push_back(random_unit(basis, rng));
  return out;
}

Eigen::VectorXd canonical_sign(Eigen::VectorXd v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
  return v;
}

namespace {

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;  // in feasible coordinates
};

class ReducedObjective {
public:
  ReducedObjective(const Dataset& data, const Eigen::MatrixXd& basis, KernelFamily family,
                   double bandwidth)
      : data_(data), reduced_(data.features() * basis), family_(family), bandwidth_(bandwidth),
        scores_(data.rows()) {}

  Evaluation operator()(const Eigen::VectorXd& alpha) {
    Eigen::Map<Eigen::VectorXd>(scores_.data(), static_cast<Eigen::Index>(scores_.size())) =
        reduced_ * alpha;
    auto eval = mv_value_and_score_gradient(scores_, data_.labels(), data_.num_classes(), family_,
                                            bandwidth_);
    return {eval.value, reduced_.transpose() * eval.score_gradient};
  }

private:
  const Dataset& data_;
  Eigen::MatrixXd reduced_;
  KernelFamily family_;
  double bandwidth_;
  std::vector<double> scores_;
};

Eigen::VectorXd tangent(const Eigen::VectorXd& gradient, const Eigen::VectorXd& alpha) {
  return gradient - gradient.dot(alpha) * alpha;
}

struct AscentOutcome {
  Eigen::VectorXd alpha;
  double value = 0.0;
  double start_value = 0.0;
  double projected_gradient_norm = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;
  std::vector<Eigen::VectorXd> path;
};

AscentOutcome ascend(ReducedObjective& objective, Eigen::VectorXd alpha,
                     const OptimizerConfig& opt) {
  AscentOutcome out;
  Evaluation current = objective(alpha);
  out.start_value = current.value;
  out.trace.push_back(current.value);
  if (opt.record_path) out.path.push_back(alpha);

  Eigen::VectorXd direction = tangent(current.gradient, alpha);
  for (std::size_t iter = 0; iter < opt.max_iters; ++iter) {
    const double gnorm = direction.norm();
    if (gnorm < opt.grad_tol) break;

    bool accepted = false;
    bool stalled = false;
    for (double step = opt.step_init; step * gnorm > 1e-14; step *= opt.step_shrink) {
      Eigen::VectorXd candidate = alpha + step * direction;
      candidate.normalize();
      Evaluation trial = objective(candidate);
      if (trial.value > current.value) {
        const double improvement = trial.value - current.value;
        alpha = std::move(candidate);
        current = std::move(trial);
        direction = tangent(current.gradient, alpha);
        out.trace.push_back(current.value);
        if (opt.record_path) out.path.push_back(alpha);
        ++out.iterations;
        accepted = true;
        stalled = improvement < opt.value_tol;
        break;
      }
    }
    if (!accepted || stalled) break;
  }
  out.alpha = std::move(alpha);
  out.value = current.value;
  out.projected_gradient_norm = direction.norm();
  return out;
}

}  // namespace

DirectionResult maximize_direction(const Dataset& data, const std::vector<Eigen::VectorXd>& prev,
                                   const MvConfig& mv_config, const OptimizerConfig& opt,
                                   RngStream rng) {
  check_optimizer_config(opt);
  check_mv_config(mv_config);
  if (is_step(mv_config.cdf_mode)) {
    throw MmvError(ErrorCode::StepModeGradient,
                   "direction search needs the smoothed CDF mode (step-mode MV has no gradient)");
  }
  const auto family = std::get<SmoothedMode>(mv_config.cdf_mode).family;
  const Eigen::MatrixXd basis = null_space_basis(prev, data.cols());
  const auto starts = initial_directions(data, prev, opt.restarts, rng.derive("init"));

  double bandwidth = 0.0;
  if (const auto* fixed = std::get_if<FixedBandwidth>(&mv_config.bandwidth)) {
    bandwidth = fixed->value;
  } else {
    // Frozen from the first start whose scores are not constant.
    for (const auto& start : starts) {
      const auto scores = project(data, start);
      try {
        bandwidth = bandwidth_rule(scores);
        break;
      } catch (const MmvError& e) {
        if (e.code() != ErrorCode::DegenerateScores) throw;
      }
    }
    if (!(bandwidth > 0.0)) {
      throw MmvError(ErrorCode::DegenerateScores,
                     "projected scores are constant at every starting direction");
    }
  }

  ReducedObjective objective(data, basis, family, bandwidth);
  DirectionResult result;
  result.diagnostics.bandwidth = bandwidth;
  bool any_ascent = false;
  std::optional<AscentOutcome> best;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    Eigen::VectorXd alpha = basis.transpose() * starts[s];
    alpha.normalize();
    AscentOutcome outcome = ascend(objective, std::move(alpha), opt);
    RestartTrace trace{outcome.start_value, outcome.value, outcome.iterations, {}};
    for (const auto& a : outcome.path) trace.path.push_back(basis * a);
    result.diagnostics.restarts.push_back(std::move(trace));
    if (outcome.value > outcome.start_value) any_ascent = true;
    if (!best || outcome.value > best->value) {
      result.diagnostics.winner_restart = s;
      best = std::move(outcome);
    }
  }

  Eigen::VectorXd beta = basis * best->alpha;
  beta.normalize();
  result.direction = canonical_sign(std::move(beta));
  result.mv_value = best->value;
  result.diagnostics.iterations = best->iterations;
  result.diagnostics.projected_gradient_norm = best->projected_gradient_norm;
  result.diagnostics.value_trace = std::move(best->trace);
  result.diagnostics.no_ascent = !any_ascent;
  return result;
}

ExtractionResult fit_mmv(const Dataset& data, const MvConfig& mv_config,
                         const OptimizerConfig& opt, RngStream rng) {
  check_optimizer_config(opt);
  if (opt.d > data.cols()) {
    throw MmvError(ErrorCode::InvalidArgument, "requested d=" + std::to_string(opt.d) +
                                                   " exceeds p=" + std::to_string(data.cols()));
  }
  ExtractionResult out;
  for (std::size_t k = 0; k < opt.d; ++k) {
    DirectionResult found =
        maximize_direction(data, out.basis.directions, mv_config, opt, rng.derive("direction", k));
    if (found.mv_value < opt.mv_floor) {
      out.below_floor = std::move(found);
      break;
    }
    out.basis.directions.push_back(std::move(found.direction));
    out.basis.mv_values.push_back(found.mv_value);
    out.diagnostics.push_back(std::move(found.diagnostics));
  }
  return out;
}

}  // namespace mmv
