#include "panocalib/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "panocalib/errors.hpp"

namespace panocalib {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Mat3 rot_z(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Mat3 m;
  m << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return m;
}

Mat3 rot_x(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Mat3 m;
  m << 1.0, 0.0, 0.0,
       0.0, c, -s,
       0.0, s, c;
  return m;
}

Mat3 rot_z_derivative(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Mat3 m;
  m << -s, -c, 0.0,
       c, -s, 0.0,
       0.0, 0.0, 0.0;
  return m;
}

Mat3 rot_x_derivative(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Mat3 m;
  m << 0.0, 0.0, 0.0,
       0.0, -s, -c,
       0.0, c, -s;
  return m;
}

// Wraps into [0, 2pi). fmod can return exactly 2pi after adding 2pi to a tiny
// negative remainder, so that case folds back to 0.
double wrap_two_pi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

bool finite3(const Vec3& p) { return p.allFinite(); }

void require_finite(const Vec3& p, const char* what) {
  if (!finite3(p)) {
    throw InvalidArgument(std::string(what) + ": non-finite coordinate");
  }
}

}  // namespace

bool EulerZXZ::is_finite() const {
  return std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma);
}

EulerZXZ EulerZXZ::normalized() const {
  if (!is_finite()) throw InvalidArgument("normalize: non-finite Euler angle");
  double a = alpha;
  double b = wrap_two_pi(beta);
  double g = gamma;
  // Rz(a) Rx(-b) Rz(g) == Rz(a + pi) Rx(b) Rz(g + pi)
  if (b > kPi) {
    b = kTwoPi - b;
    a += kPi;
    g += kPi;
  }
  return {wrap_two_pi(a), b, wrap_two_pi(g)};
}

ExtrinsicPose ExtrinsicPose::from_params(const PoseParams& p) {
  return {{p[0], p[1], p[2]}, Vec3(p[3], p[4], p[5])};
}

PoseParams ExtrinsicPose::params() const {
  return {rotation.alpha, rotation.beta, rotation.gamma,
          translation.x(), translation.y(), translation.z()};
}

bool ExtrinsicPose::is_finite() const {
  return rotation.is_finite() && translation.allFinite();
}

ExtrinsicPose ExtrinsicPose::normalized() const {
  return {rotation.normalized(), translation};
}

bool PanoPixelRatio::is_valid() const {
  return u >= 0.0 && u < 1.0 && v > 0.0 && v < 1.0;
}

std::string_view to_string(HVariant variant) {
  switch (variant) {
    case HVariant::Squared:
      return "squared";
    case HVariant::Signed:
      return "signed";
  }
  return "signed";
}

HVariant parse_variant(std::string_view text) {
  if (text == "signed") return HVariant::Signed;
  if (text == "squared") return HVariant::Squared;
  throw InvalidArgument("unknown h-form variant '" + std::string(text) +
                        "' (expected signed or squared)");
}

Mat3 rotation_matrix(const EulerZXZ& e) {
  if (!e.is_finite()) throw InvalidArgument("rotation_matrix: non-finite angle");
  return rot_z(e.alpha) * rot_x(e.beta) * rot_z(e.gamma);
}

std::array<Mat3, 3> rotation_matrix_derivatives(const EulerZXZ& e) {
  if (!e.is_finite()) throw InvalidArgument("rotation_matrix: non-finite angle");
  const Mat3 za = rot_z(e.alpha);
  const Mat3 xb = rot_x(e.beta);
  const Mat3 zg = rot_z(e.gamma);
  return {rot_z_derivative(e.alpha) * xb * zg,
          za * rot_x_derivative(e.beta) * zg,
          za * xb * rot_z_derivative(e.gamma)};
}

Vec3 transform(const Vec3& lidar_point, const ExtrinsicPose& pose) {
  require_finite(lidar_point, "transform");
  if (!pose.translation.allFinite()) {
    throw InvalidArgument("transform: non-finite translation");
  }
  return rotation_matrix(pose.rotation) * lidar_point + pose.translation;
}

Vec3 inverse_transform(const Vec3& camera_point, const ExtrinsicPose& pose) {
  require_finite(camera_point, "inverse_transform");
  return rotation_matrix(pose.rotation).transpose() *
         (camera_point - pose.translation);
}

PanoPixelRatio project(const Vec3& p) {
  require_finite(p, "project");
  const double rho2 = p.x() * p.x() + p.y() * p.y();
  if (rho2 <= kPoleEpsilon) {
    throw PoleSingularity("project: point on the camera's vertical axis");
  }
  const double u = (kPi - std::atan2(p.y(), p.x())) / kTwoPi;
  const double v = (kPi - 2.0 * std::atan(p.z() / std::sqrt(rho2))) / kTwoPi;
  // atan2 returns +pi for y == +0, x < 0, which gives u == 0; -0 gives
  // -pi and u == 1, which belongs to the same column.
  return {u >= 1.0 ? 0.0 : u, v};
}

Vec3 unproject(const PanoPixelRatio& px) {
  if (!px.is_valid()) {
    throw InvalidArgument("unproject: pixel ratio (" + std::to_string(px.u) +
                          ", " + std::to_string(px.v) + ") out of range");
  }
  const double azimuth = kPi - kTwoPi * px.u;
  const double elevation = 0.5 * kPi - kPi * px.v;
  const double ce = std::cos(elevation);
  return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

HForm h_form(const Vec3& p, HVariant variant) {
  require_finite(p, "h_form");
  if (std::abs(p.x()) <= kBranchEpsilon) {
    throw BranchDomain("h_form: x = " + std::to_string(p.x()) +
                       " too close to zero for h1 = y/x");
  }
  const double rho2 = p.x() * p.x() + p.y() * p.y();
  if (rho2 <= kPoleEpsilon) {
    throw PoleSingularity("h_form: point on the camera's vertical axis");
  }
  const double h1 = p.y() / p.x();
  if (variant == HVariant::Squared) {
    return {h1, p.z() * p.z() / rho2, variant};
  }
  return {h1, p.z() / std::sqrt(rho2), variant};
}

PanoPixelRatio reconstruct_uv(const HForm& h) {
  if (!std::isfinite(h.h1) || !std::isfinite(h.h2)) {
    throw InvalidArgument("reconstruct_uv: non-finite h-form");
  }
  const double u = (kPi - std::atan(h.h1)) / kTwoPi;
  if (h.variant == HVariant::Squared) {
    if (h.h2 < 0.0) {
      throw InvalidArgument("reconstruct_uv: squared h2 must be >= 0");
    }
    return {u, (0.5 * kPi - std::atan(std::sqrt(h.h2))) / kPi};
  }
  return {u, (0.5 * kPi - std::atan(h.h2)) / kPi};
}

bool passes_branch_guard(const Vec3& p, HVariant variant) {
  if (!finite3(p)) return false;
  if (p.x() <= kBranchEpsilon) return false;
  if (p.x() * p.x() + p.y() * p.y() <= kPoleEpsilon) return false;
  if (variant == HVariant::Squared && p.z() <= kBranchEpsilon) return false;
  return true;
}

ExtrinsicPose reference_pose() {
  return {{4.7112, 0.8932, 1.8420}, Vec3(2.8673, 0.6389, -1.7732)};
}

}  // namespace panocalib
