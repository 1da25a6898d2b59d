#include "panocalib/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <string>

#include "panocalib/errors.hpp"

namespace panocalib {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDivergenceFactor = 1e6;

struct PointTerm {
  double loss = 0.0;
  Vec3 d_loss_d_camera = Vec3::Zero();
};

// Forward pass through h-form reconstruction for one point that already passed
// the branch guard, and the gradient of the point loss with respect to the
// camera-frame coordinates.
PointTerm point_term(const Vec3& pc, const PanoPixelRatio& target,
                     HVariant variant) {
  const double x = pc.x();
  const double y = pc.y();
  const double z = pc.z();
  const HForm h = h_form(pc, variant);
  const PanoPixelRatio uv = reconstruct_uv(h);
  const double ru = uv.u - target.u;
  const double rv = uv.v - target.v;

  const double rho2 = x * x + y * y;
  const double rho = std::sqrt(rho2);

  // u = (pi - atan(h1)) / 2pi, h1 = y / x
  const double du_dh1 = -1.0 / (kTwoPi * (1.0 + h.h1 * h.h1));
  const Vec3 dh1(-y / (x * x), 1.0 / x, 0.0);

  Vec3 dv = Vec3::Zero();
  if (variant == HVariant::Signed) {
    // v = (pi/2 - atan(s)) / pi, s = z / rho
    const double dv_ds = -1.0 / (kPi * (1.0 + h.h2 * h.h2));
    const double rho3 = rho2 * rho;
    dv = dv_ds * Vec3(-z * x / rho3, -z * y / rho3, 1.0 / rho);
  } else {
    // v = (pi/2 - atan(sqrt(h2))) / pi, h2 = z^2 / rho^2; the guard keeps
    // z > 0 so sqrt(h2) > 0.
    const double sqrt_h2 = std::sqrt(h.h2);
    const double dv_dh2 = -1.0 / (kPi * (1.0 + h.h2)) / (2.0 * sqrt_h2);
    const double rho4 = rho2 * rho2;
    dv = dv_dh2 *
         Vec3(-2.0 * z * z * x / rho4, -2.0 * z * z * y / rho4, 2.0 * z / rho2);
  }

  PointTerm term;
  term.loss = 0.5 * (ru * ru + rv * rv);
  term.d_loss_d_camera = ru * du_dh1 * dh1 + rv * dv;
  return term;
}

void require_points(std::span<const Correspondence> cs) {
  if (cs.empty()) throw InvalidArgument("no correspondences given");
}

double aggregate(double sum, int accepted, LossAggregation aggregation) {
  return aggregation == LossAggregation::Mean ? sum / accepted : sum;
}

[[noreturn]] void throw_all_rejected(std::size_t count, HVariant variant) {
  throw AllPointsRejected("all " + std::to_string(count) +
                          " correspondences fail the " +
                          std::string(to_string(variant)) + " branch guard");
}

// More accepted points wins; ties go to the lower loss.
bool better(int accepted, double loss, int best_accepted, double best_loss) {
  if (accepted != best_accepted) return accepted > best_accepted;
  return loss < best_loss;
}

double inf_norm(const PoseParams& g) {
  double m = 0.0;
  for (double v : g) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::string_view to_string(LossAggregation aggregation) {
  return aggregation == LossAggregation::Mean ? "mean" : "sum";
}

LossAggregation parse_aggregation(std::string_view text) {
  if (text == "mean") return LossAggregation::Mean;
  if (text == "sum") return LossAggregation::Sum;
  throw InvalidArgument("unknown loss aggregation '" + std::string(text) +
                        "' (expected mean or sum)");
}

std::string_view to_string(TrainingStatus status) {
  switch (status) {
    case TrainingStatus::Converged:
      return "converged";
    case TrainingStatus::IterationLimit:
      return "iteration-limit";
    case TrainingStatus::Diverged:
      return "diverged";
  }
  return "iteration-limit";
}

void TrainingConfig::validate() const {
  if (max_iterations < 0) {
    throw InvalidArgument("max_iterations must be >= 0");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be finite and > 0");
  }
  if (!std::isfinite(rotation_rate_scale) || rotation_rate_scale < 0.0) {
    throw InvalidArgument("rotation_rate_scale must be finite and >= 0");
  }
  if (!std::isfinite(convergence_epsilon) || convergence_epsilon < 0.0) {
    throw InvalidArgument("convergence_epsilon must be finite and >= 0");
  }
  if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
  if (!init_box.lower.allFinite() || !init_box.upper.allFinite() ||
      (init_box.upper.array() < init_box.lower.array()).any()) {
    throw InvalidArgument("initial translation box must be finite and ordered");
  }
}

double point_loss(const Correspondence& c, const ExtrinsicPose& pose,
                  HVariant variant) {
  const Vec3 pc = transform(c.lidar_point, pose);
  if (!passes_branch_guard(pc, variant)) {
    throw BranchDomain("point_loss: camera-frame point outside the " +
                       std::string(to_string(variant)) + " branch domain");
  }
  const PanoPixelRatio uv = reconstruct_uv(h_form(pc, variant));
  const double du = uv.u - c.target.u;
  const double dv = uv.v - c.target.v;
  return 0.5 * (du * du + dv * dv);
}

BatchLoss batch_loss(std::span<const Correspondence> cs,
                     const ExtrinsicPose& pose, const TrainingConfig& config) {
  require_points(cs);
  const Mat3 r = rotation_matrix(pose.rotation);
  BatchLoss out;
  double sum = 0.0;
  for (const Correspondence& c : cs) {
    const Vec3 pc = r * c.lidar_point + pose.translation;
    if (!passes_branch_guard(pc, config.variant)) {
      ++out.skipped;
      continue;
    }
    const PanoPixelRatio uv = reconstruct_uv(h_form(pc, config.variant));
    const double du = uv.u - c.target.u;
    const double dv = uv.v - c.target.v;
    sum += 0.5 * (du * du + dv * dv);
    ++out.accepted;
  }
  if (out.accepted == 0) throw_all_rejected(cs.size(), config.variant);
  out.value = aggregate(sum, out.accepted, config.aggregation);
  return out;
}

LossAndGradient loss_and_gradient(std::span<const Correspondence> cs,
                                  const ExtrinsicPose& pose,
                                  const TrainingConfig& config) {
  require_points(cs);
  const Mat3 r = rotation_matrix(pose.rotation);
  const std::array<Mat3, 3> dr = rotation_matrix_derivatives(pose.rotation);

  LossAndGradient out;
  double sum = 0.0;
  PoseParams grad{};
  for (const Correspondence& c : cs) {
    const Vec3 pc = r * c.lidar_point + pose.translation;
    if (!passes_branch_guard(pc, config.variant)) {
      ++out.skipped;
      continue;
    }
    const PointTerm term = point_term(pc, c.target, config.variant);
    sum += term.loss;
    for (int i = 0; i < 3; ++i) {
      grad[i] += term.d_loss_d_camera.dot(dr[i] * c.lidar_point);
      grad[3 + i] += term.d_loss_d_camera[i];
    }
    ++out.accepted;
  }
  if (out.accepted == 0) throw_all_rejected(cs.size(), config.variant);

  out.loss = aggregate(sum, out.accepted, config.aggregation);
  const double scale = config.aggregation == LossAggregation::Mean
                           ? 1.0 / out.accepted
                           : 1.0;
  for (int i = 0; i < 6; ++i) out.gradient[i] = grad[i] * scale;
  return out;
}

PoseParams loss_gradient(std::span<const Correspondence> cs,
                         const ExtrinsicPose& pose,
                         const TrainingConfig& config) {
  return loss_and_gradient(cs, pose, config).gradient;
}

PoseParams finite_difference_gradient(std::span<const Correspondence> cs,
                                      const ExtrinsicPose& pose,
                                      const TrainingConfig& config,
                                      double angle_step,
                                      double translation_step) {
  const PoseParams base = pose.params();
  PoseParams grad{};
  for (int i = 0; i < 6; ++i) {
    const double h = i < 3 ? angle_step : translation_step;
    PoseParams plus = base;
    PoseParams minus = base;
    plus[i] += h;
    minus[i] -= h;
    const double fp = batch_loss(cs, ExtrinsicPose::from_params(plus), config).value;
    const double fm = batch_loss(cs, ExtrinsicPose::from_params(minus), config).value;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

CalibrationResult train(std::span<const Correspondence> cs,
                        const ExtrinsicPose& init,
                        const TrainingConfig& config) {
  config.validate();
  require_points(cs);
  if (!init.is_finite()) throw InvalidArgument("train: non-finite initial pose");

  CalibrationResult result;
  TrainingTrace& trace = result.trace;
  trace.records.reserve(static_cast<std::size_t>(config.max_iterations) + 1);

  PoseParams params = init.params();
  PoseParams best_params = params;
  double best_loss = 0.0;
  int best_accepted = -1;
  int best_skipped = 0;
  double initial_loss = 0.0;

  for (int k = 0;; ++k) {
    LossAndGradient lg;
    try {
      lg = loss_and_gradient(cs, ExtrinsicPose::from_params(params), config);
    } catch (const AllPointsRejected& e) {
      throw AllPointsRejected("training aborted at iteration " +
                              std::to_string(k) + ": " + e.what());
    }

    if (!std::isfinite(lg.loss)) {
      trace.status = TrainingStatus::Diverged;
      break;
    }
    trace.records.push_back(
        {k, lg.loss, params, inf_norm(lg.gradient), lg.accepted});
    if (better(lg.accepted, lg.loss, best_accepted, best_loss)) {
      best_params = params;
      best_loss = lg.loss;
      best_accepted = lg.accepted;
      best_skipped = lg.skipped;
    }

    if (k == 0) {
      initial_loss = lg.loss;
    } else if (initial_loss > 0.0 && lg.loss > kDivergenceFactor * initial_loss) {
      trace.status = TrainingStatus::Diverged;
      break;
    }
    if (k >= kConvergenceWindow) {
      const double previous =
          trace.records[trace.records.size() - 1 - kConvergenceWindow].loss;
      if (std::abs(lg.loss - previous) < config.convergence_epsilon) {
        trace.status = TrainingStatus::Converged;
        break;
      }
    }
    if (k >= config.max_iterations) {
      trace.status = TrainingStatus::IterationLimit;
      break;
    }

    for (int i = 0; i < 6; ++i) {
      const double rate = i < 3 ? config.learning_rate * config.rotation_rate_scale
                                : config.learning_rate;
      params[i] -= rate * lg.gradient[i];
    }
  }

  result.pose = ExtrinsicPose::from_params(best_params);
  result.final_loss = best_loss;
  result.accepted_points = best_accepted;
  result.skipped_points = best_skipped;
  return result;
}

std::vector<ExtrinsicPose> draw_initial_poses(const TrainingConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> full_turn(0.0, kTwoPi);
  std::uniform_real_distribution<double> half_turn(0.0, kPi);
  std::vector<ExtrinsicPose> poses;
  poses.reserve(static_cast<std::size_t>(config.restarts));
  for (int r = 0; r < config.restarts; ++r) {
    ExtrinsicPose pose;
    pose.rotation.alpha = full_turn(rng);
    pose.rotation.beta = half_turn(rng);
    pose.rotation.gamma = full_turn(rng);
    for (int i = 0; i < 3; ++i) {
      std::uniform_real_distribution<double> axis(config.init_box.lower[i],
                                                  config.init_box.upper[i]);
      pose.translation[i] = axis(rng);
    }
    poses.push_back(pose);
  }
  return poses;
}

CalibrationResult train_multistart(std::span<const Correspondence> cs,
                                   const TrainingConfig& config) {
  const std::vector<ExtrinsicPose> inits = draw_initial_poses(config);
  require_points(cs);

  CalibrationResult best;
  bool have_best = false;
  int failed = 0;
  std::exception_ptr last_error;
  for (std::size_t r = 0; r < inits.size(); ++r) {
    try {
      CalibrationResult candidate = train(cs, inits[r], config);
      candidate.restart = static_cast<int>(r);
      if (!have_best || better(candidate.accepted_points, candidate.final_loss,
                               best.accepted_points, best.final_loss)) {
        best = std::move(candidate);
        have_best = true;
      }
    } catch (const Error&) {
      ++failed;
      last_error = std::current_exception();
    }
  }
  if (!have_best) std::rethrow_exception(last_error);
  best.failed_restarts = failed;
  return best;
}

GradientCheckReport gradient_check(int samples, std::uint64_t seed,
                                   HVariant variant, double relative_tolerance,
                                   double absolute_floor) {
  if (samples < 1) throw InvalidArgument("gradient_check: samples must be >= 1");
  GradientCheckReport report;
  report.samples = samples;
  report.relative_tolerance = relative_tolerance;
  report.absolute_floor = absolute_floor;

  TrainingConfig config;
  config.variant = variant;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> full_turn(0.0, kTwoPi);
  std::uniform_real_distribution<double> half_turn(0.0, kPi);
  std::uniform_real_distribution<double> offset(-5.0, 5.0);
  std::uniform_real_distribution<double> forward(1.0, 10.0);
  std::uniform_real_distribution<double> lateral(-10.0, 10.0);
  std::uniform_real_distribution<double> upward(0.5, 10.0);
  std::uniform_real_distribution<double> target_u(0.3, 0.7);
  std::uniform_real_distribution<double> target_v(0.1, 0.9);

  for (int s = 0; s < samples; ++s) {
    ExtrinsicPose pose;
    pose.rotation = {full_turn(rng), half_turn(rng), full_turn(rng)};
    pose.translation = Vec3(offset(rng), offset(rng), offset(rng));

    // Sample in the camera frame so the point sits inside the branch domain
    // with margin for the finite-difference steps.
    const double x = forward(rng);
    const double y = lateral(rng);
    const double z = variant == HVariant::Squared ? upward(rng) : lateral(rng);
    Correspondence c;
    c.lidar_point = inverse_transform(Vec3(x, y, z), pose);
    c.target = {target_u(rng), target_v(rng)};

    const std::span<const Correspondence> one(&c, 1);
    const PoseParams analytic = loss_gradient(one, pose, config);
    const PoseParams numeric = finite_difference_gradient(one, pose, config);
    bool ok = true;
    for (int i = 0; i < 6; ++i) {
      const double diff = std::abs(analytic[i] - numeric[i]);
      const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
      report.max_absolute_error = std::max(report.max_absolute_error, diff);
      if (scale > absolute_floor) {
        report.max_relative_error = std::max(report.max_relative_error, diff / scale);
      }
      if (diff > relative_tolerance * scale && diff > absolute_floor) ok = false;
    }
    if (!ok) ++report.failures;
  }
  return report;
}

}  // namespace panocalib
