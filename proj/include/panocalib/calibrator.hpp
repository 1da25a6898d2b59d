#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "panocalib/geometry.hpp"

namespace panocalib {

/// One training sample: a LiDAR-frame point and the pixel ratio it was
/// observed at in the panorama.
struct Correspondence {
  Vec3 lidar_point = Vec3::Zero();
  PanoPixelRatio target;
};

enum class LossAggregation { Mean, Sum };

std::string_view to_string(LossAggregation aggregation);
LossAggregation parse_aggregation(std::string_view text);

/// Axis-aligned box the multistart translations are drawn from.
struct TranslationBox {
  Vec3 lower = Vec3::Constant(-5.0);
  Vec3 upper = Vec3::Constant(5.0);
};

struct TrainingConfig {
  int max_iterations = 20000;
  // Step size for the mean-aggregated loss on the synthetic 48-point scenes.
  // The loss is measured in squared pixel ratios, so its curvature is small
  // (largest Hessian eigenvalue ~0.03 there) and the stable step is large.
  double learning_rate = 20.0;
  // Multiplies the three angle components of the gradient before the step.
  double rotation_rate_scale = 1.0;
  // Stop once |loss(k) - loss(k - 10)| drops below this.
  double convergence_epsilon = 1e-18;
  LossAggregation aggregation = LossAggregation::Mean;
  HVariant variant = HVariant::Signed;
  int restarts = 16;
  std::uint64_t rng_seed = 0;
  TranslationBox init_box;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

inline constexpr int kConvergenceWindow = 10;

enum class TrainingStatus { Converged, IterationLimit, Diverged };

std::string_view to_string(TrainingStatus status);

struct TraceRecord {
  int iteration = 0;
  double loss = 0.0;
  PoseParams params{};
  double gradient_inf_norm = 0.0;
  int accepted = 0;
};

struct TrainingTrace {
  std::vector<TraceRecord> records;
  TrainingStatus status = TrainingStatus::IterationLimit;
};

struct CalibrationResult {
  ExtrinsicPose pose;
  double final_loss = 0.0;
  TrainingTrace trace;
  int accepted_points = 0;
  // Correspondences excluded by the branch guards at the returned pose.
  int skipped_points = 0;
  // Index of the winning restart (0 for a single run) and how many restarts
  // aborted with an error.
  int restart = 0;
  int failed_restarts = 0;
};

struct BatchLoss {
  double value = 0.0;
  int accepted = 0;
  int skipped = 0;
};

struct LossAndGradient {
  double loss = 0.0;
  PoseParams gradient{};
  int accepted = 0;
  int skipped = 0;
};

/// Half squared pixel-ratio residual of one correspondence, evaluated through
/// the h-form of the transformed point. Throws BranchDomain when the point
/// fails the variant's branch guard.
double point_loss(const Correspondence& c, const ExtrinsicPose& pose,
                  HVariant variant);

/// Mean or sum of point losses over the correspondences that pass the branch
/// guard at this pose. Throws AllPointsRejected when none do.
BatchLoss batch_loss(std::span<const Correspondence> cs,
                     const ExtrinsicPose& pose, const TrainingConfig& config);

/// Loss and its analytic gradient with respect to the six pose parameters,
/// back-propagated through h-form reconstruction and the rigid transform.
LossAndGradient loss_and_gradient(std::span<const Correspondence> cs,
                                  const ExtrinsicPose& pose,
                                  const TrainingConfig& config);

PoseParams loss_gradient(std::span<const Correspondence> cs,
                         const ExtrinsicPose& pose,
                         const TrainingConfig& config);

/// Central-difference gradient of batch_loss. Used as the reference the
/// analytic gradient is checked against.
PoseParams finite_difference_gradient(std::span<const Correspondence> cs,
                                      const ExtrinsicPose& pose,
                                      const TrainingConfig& config,
                                      double angle_step = 1e-6,
                                      double translation_step = 1e-6);

/// Fixed-step full-batch gradient descent from `init`.
///
/// Each iteration records the loss, parameters and gradient norm at the
/// current iterate, then steps against the gradient (angle components scaled
/// by rotation_rate_scale). Stops at max_iterations, when the loss changes by
/// less than convergence_epsilon over kConvergenceWindow iterations, or when
/// it becomes non-finite or exceeds 1e6 times the initial loss. The returned
/// pose is the best iterate seen: most accepted points first, then lowest
/// loss. Throws AllPointsRejected naming the iteration if every
/// correspondence fails the branch guard.
CalibrationResult train(std::span<const Correspondence> cs,
                        const ExtrinsicPose& init,
                        const TrainingConfig& config);

/// The `restarts` initial poses train_multistart uses for this config.
std::vector<ExtrinsicPose> draw_initial_poses(const TrainingConfig& config);

/// Trains from every pose of draw_initial_poses and keeps the best result
/// (same ordering as train). Restarts that throw are counted and skipped; the
/// last error is rethrown only if all of them fail.
CalibrationResult train_multistart(std::span<const Correspondence> cs,
                                   const TrainingConfig& config);

struct GradientCheckReport {
  int samples = 0;
  int failures = 0;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  double relative_tolerance = 1e-5;
  double absolute_floor = 1e-8;

  bool passed() const { return failures == 0; }
};

/// Draws `samples` random (pose, correspondence) pairs whose camera-frame
/// point lies well inside the branch domain and compares loss_gradient with
/// finite_difference_gradient component by component. A component passes if
/// |analytic - fd| <= relative_tolerance * max(|analytic|, |fd|) or
/// |analytic - fd| <= absolute_floor.
GradientCheckReport gradient_check(int samples, std::uint64_t seed,
                                   HVariant variant,
                                   double relative_tolerance = 1e-5,
                                   double absolute_floor = 1e-8);

}  // namespace panocalib
