#pragma once

#include <array>
#include <string_view>

#include <Eigen/Core>

namespace panocalib {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Points closer than this (in x^2 + y^2, m^2) to the camera's vertical axis
/// have no defined azimuth.
inline constexpr double kPoleEpsilon = 1e-12;

/// Minimum |x| (m) for the h1 = y/x form to be evaluated.
inline constexpr double kBranchEpsilon = 1e-9;

/// zxz Euler angles in radians. R = Rz(alpha) * Rx(beta) * Rz(gamma).
struct EulerZXZ {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  bool is_finite() const;

  /// Equivalent angles with alpha, gamma in [0, 2pi) and beta in [0, pi].
  EulerZXZ normalized() const;
};

/// The six pose parameters in optimizer order: alpha, beta, gamma, b1, b2, b3.
using PoseParams = std::array<double, 6>;

/// LiDAR-to-camera rigid transform: X_c = R(alpha, beta, gamma) X_l + T.
struct ExtrinsicPose {
  EulerZXZ rotation;
  Vec3 translation = Vec3::Zero();

  static ExtrinsicPose from_params(const PoseParams& params);
  PoseParams params() const;

  bool is_finite() const;
  ExtrinsicPose normalized() const;
};

/// Equirectangular image coordinates divided by width and height.
struct PanoPixelRatio {
  double u = 0.0;
  double v = 0.0;

  /// 0 <= u < 1 and 0 < v < 1.
  bool is_valid() const;
};

enum class HVariant {
  /// h2 = z^2 / (x^2 + y^2); loses the sign of z.
  Squared,
  /// h2 = z / sqrt(x^2 + y^2); valid in both hemispheres.
  Signed,
};

std::string_view to_string(HVariant variant);
HVariant parse_variant(std::string_view text);

struct HForm {
  double h1 = 0.0;
  double h2 = 0.0;
  HVariant variant = HVariant::Signed;
};

Mat3 rotation_matrix(const EulerZXZ& e);

/// Partial derivatives of rotation_matrix with respect to alpha, beta, gamma.
std::array<Mat3, 3> rotation_matrix_derivatives(const EulerZXZ& e);

Vec3 transform(const Vec3& lidar_point, const ExtrinsicPose& pose);

/// Camera frame back to LiDAR frame: R^T (p - T).
Vec3 inverse_transform(const Vec3& camera_point, const ExtrinsicPose& pose);

/// Camera-frame point to pixel ratio. Throws PoleSingularity on the
/// vertical axis.
PanoPixelRatio project(const Vec3& camera_point);

/// Unit viewing direction for a pixel ratio; project(unproject(px)) == px.
Vec3 unproject(const PanoPixelRatio& px);

HForm h_form(const Vec3& camera_point, HVariant variant);

PanoPixelRatio reconstruct_uv(const HForm& h);

/// True when the point can be used for training under the given variant:
/// x > kBranchEpsilon, off the pole, and z > kBranchEpsilon for Squared.
bool passes_branch_guard(const Vec3& camera_point, HVariant variant);

/// Default ground-truth extrinsics for synthetic scenes:
/// angles (4.7112, 0.8932, 1.8420) rad, translation (2.8673, 0.6389, -1.7732) m.
ExtrinsicPose reference_pose();

}  // namespace panocalib
