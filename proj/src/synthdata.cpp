#include "panocalib/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "panocalib/errors.hpp"

namespace panocalib {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinChordLength = 1e-6;

double wrap_unit(double u) {
  double w = u - std::floor(u);
  if (w >= 1.0) w = 0.0;
  return w;
}

// Signed difference a - b on the periodic u axis, in (-0.5, 0.5].
double wrapped_difference(double a, double b) {
  double d = a - b;
  d -= std::round(d);
  return d;
}

}  // namespace

Eigen::Vector2d TargetRig::plane_coordinates(const Vec3& p) const {
  const Vec3 d = p - center;
  return {d.dot(right()), d.dot(up)};
}

void TargetRig::validate() const {
  if (!center.allFinite() || !normal.allFinite() || !up.allFinite() ||
      !std::isfinite(radius)) {
    throw InvalidArgument("target rig: non-finite field");
  }
  if (!(radius > 0.0)) throw InvalidArgument("target rig: radius must be > 0");
  if (std::abs(normal.norm() - 1.0) > 1e-10 || std::abs(up.norm() - 1.0) > 1e-10) {
    throw InvalidArgument("target rig: normal and up must be unit vectors");
  }
  if (std::abs(normal.dot(up)) > 1e-10) {
    throw InvalidArgument("target rig: up must be orthogonal to the normal");
  }
}

TargetRig TargetRig::facing(const Vec3& center, double radius,
                            const Vec3& viewer, const Vec3& up_hint) {
  Vec3 normal = viewer - center;
  if (normal.norm() < 1e-12) {
    throw InvalidArgument("target rig: viewer coincides with the disc center");
  }
  normal.normalize();
  Vec3 up = up_hint - up_hint.dot(normal) * normal;
  if (up.norm() < 1e-9) {
    throw InvalidArgument("target rig: up hint parallel to the viewing direction");
  }
  up.normalize();
  TargetRig rig{center, normal, up, radius};
  rig.validate();
  return rig;
}

void ScanLayout::validate() const {
  if (elevation_angles.empty()) {
    throw InvalidArgument("scan layout: at least one channel required");
  }
  for (std::size_t i = 0; i < elevation_angles.size(); ++i) {
    const double e = elevation_angles[i];
    if (!std::isfinite(e) || std::abs(e) >= 0.5 * kPi) {
      throw InvalidArgument("scan layout: elevation out of (-pi/2, pi/2)");
    }
    if (i > 0 && !(e > elevation_angles[i - 1])) {
      throw InvalidArgument("scan layout: elevations must be strictly increasing");
    }
  }
  if (!(azimuth_step > 0.0) || !std::isfinite(azimuth_step)) {
    throw InvalidArgument("scan layout: azimuth_step must be > 0");
  }
}

ScanLayout ScanLayout::uniform(int channels, double min_elevation,
                               double max_elevation, double azimuth_step) {
  if (channels < 1) throw InvalidArgument("scan layout: channels must be >= 1");
  ScanLayout layout;
  layout.azimuth_step = azimuth_step;
  if (channels == 1) {
    layout.elevation_angles = {0.5 * (min_elevation + max_elevation)};
  } else {
    const double step = (max_elevation - min_elevation) / (channels - 1);
    for (int i = 0; i < channels; ++i) {
      layout.elevation_angles.push_back(min_elevation + step * i);
    }
  }
  layout.validate();
  return layout;
}

ScanLayout ScanLayout::sixteen_channel() {
  const double deg = kPi / 180.0;
  return uniform(16, -15.0 * deg, 15.0 * deg, 0.2 * deg);
}

int ChordSegment::quadrant() const {
  const Eigen::Vector2d mid = offset * perpendicular;
  if (mid.x() >= 0.0) return mid.y() >= 0.0 ? 1 : 4;
  return mid.y() >= 0.0 ? 2 : 3;
}

void NoiseSpec::validate() const {
  if (!(point_sigma >= 0.0) || !(pixel_sigma_u >= 0.0) || !(pixel_sigma_v >= 0.0) ||
      !std::isfinite(point_sigma) || !std::isfinite(pixel_sigma_u) ||
      !std::isfinite(pixel_sigma_v)) {
    throw InvalidArgument("noise: sigmas must be finite and >= 0");
  }
}

Vec3 channel_plane_normal(double elevation, double azimuth) {
  const double ce = std::cos(elevation);
  const Vec3 beam(std::cos(azimuth) * ce, std::sin(azimuth) * ce,
                  std::sin(elevation));
  const Vec3 tangent(-std::sin(azimuth), std::cos(azimuth), 0.0);
  return beam.cross(tangent).normalized();
}

std::optional<ChordSegment> intersect_plane_with_disc(const Vec3& plane_normal,
                                                      double plane_distance,
                                                      const TargetRig& rig) {
  const Vec3 right = rig.right();
  const double a = plane_normal.dot(right);
  const double b = plane_normal.dot(rig.up);
  const double norm = std::hypot(a, b);
  if (norm < 1e-12) return std::nullopt;

  ChordSegment seg;
  seg.perpendicular = Eigen::Vector2d(a, b) / norm;
  seg.offset = (plane_distance - plane_normal.dot(rig.center)) / norm;
  if (std::abs(seg.offset) > rig.radius) return std::nullopt;
  seg.half_length =
      std::sqrt(std::max(0.0, rig.radius * rig.radius - seg.offset * seg.offset));

  // Chord direction with a non-negative "right" component, so endpoint 0 is
  // the left end as seen from the front.
  Eigen::Vector2d along(-seg.perpendicular.y(), seg.perpendicular.x());
  if (along.x() < 0.0 || (along.x() == 0.0 && along.y() < 0.0)) along = -along;

  const Eigen::Vector2d mid = seg.offset * seg.perpendicular;
  seg.plane_endpoints = {mid - seg.half_length * along,
                         mid + seg.half_length * along};
  for (int i = 0; i < 2; ++i) {
    seg.endpoints[i] = rig.center + seg.plane_endpoints[i].x() * right +
                       seg.plane_endpoints[i].y() * rig.up;
  }
  return seg;
}

std::vector<ChordSegment> scan_target(const TargetRig& rig,
                                      const ScanLayout& layout) {
  rig.validate();
  layout.validate();
  const double origin_height = -rig.normal.dot(rig.center);
  if (std::abs(origin_height) <= 1e-9 &&
      rig.plane_coordinates(Vec3::Zero()).norm() <= rig.radius) {
    throw InvalidArgument("scan_target: sensor origin lies on the disc");
  }

  const double azimuth = std::atan2(rig.center.y(), rig.center.x());
  std::vector<ChordSegment> chords;
  for (int ch = 0; ch < layout.channels(); ++ch) {
    const Vec3 n = channel_plane_normal(layout.elevation_angles[ch], azimuth);
    std::optional<ChordSegment> seg = intersect_plane_with_disc(n, 0.0, rig);
    if (!seg || 2.0 * seg->half_length <= kMinChordLength) continue;
    seg->channel = ch;
    chords.push_back(*seg);
  }
  return chords;
}

std::vector<Vec3> sample_chord(const ChordSegment& seg, const ScanLayout& layout) {
  const Vec3& a = seg.endpoints[0];
  const Vec3& b = seg.endpoints[1];
  const double range = (0.5 * (a + b)).norm();
  const double spacing = range * layout.azimuth_step;
  const double length = (b - a).norm();
  const int intervals =
      spacing > 0.0 ? std::max(1, static_cast<int>(std::ceil(length / spacing))) : 1;
  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) {
    const double t = static_cast<double>(i) / intervals;
    points.push_back(a + t * (b - a));
  }
  return points;
}

GeneratedData generate_correspondences(std::span<const TargetRig> rigs,
                                       const ScanLayout& layout,
                                       const ExtrinsicPose& truth,
                                       const NoiseSpec& noise) {
  noise.validate();
  std::mt19937_64 rng(noise.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  GeneratedData out;
  for (const TargetRig& rig : rigs) {
    for (const ChordSegment& seg : scan_target(rig, layout)) {
      for (const Vec3& endpoint : seg.endpoints) {
        // Five draws per endpoint regardless of outcome keep the noise stream
        // aligned across configurations.
        const Vec3 point_noise(gauss(rng), gauss(rng), gauss(rng));
        const double nu = gauss(rng);
        const double nv = gauss(rng);

        PanoPixelRatio exact;
        try {
          exact = project(transform(endpoint, truth));
        } catch (const PoleSingularity&) {
          ++out.skipped_endpoints;
          continue;
        }
        Correspondence c;
        c.lidar_point = endpoint + noise.point_sigma * point_noise;
        c.target.u = wrap_unit(exact.u + noise.pixel_sigma_u * nu);
        c.target.v = exact.v + noise.pixel_sigma_v * nv;
        if (!c.target.is_valid()) {
          ++out.skipped_endpoints;
          continue;
        }
        out.correspondences.push_back(c);
      }
    }
  }
  return out;
}

GeneratedData generate_correspondences(const TargetRig& rig,
                                       const ScanLayout& layout,
                                       const ExtrinsicPose& truth,
                                       const NoiseSpec& noise) {
  return generate_correspondences(std::span<const TargetRig>(&rig, 1), layout,
                                  truth, noise);
}

DetectedCircle observe_circle(const TargetRig& rig, const ExtrinsicPose& truth) {
  rig.validate();
  const PanoPixelRatio c = project(transform(rig.center, truth));
  const PanoPixelRatio r =
      project(transform(rig.center + rig.radius * rig.right(), truth));
  const PanoPixelRatio t = project(transform(rig.center + rig.radius * rig.up, truth));
  return {c, {std::abs(wrapped_difference(r.u, c.u)), std::abs(t.v - c.v)}};
}

std::array<PanoPixelRatio, 2> chord_pixel_endpoints(
    const ChordSegment& seg, const PanoPixelRatio& circle_center,
    const CircleRadius& circle_radius, const TargetRig& rig) {
  if (!(circle_radius.horizontal > 0.0) || !(circle_radius.vertical > 0.0)) {
    throw InvalidArgument("chord_pixel_endpoints: pixel radius must be > 0");
  }
  if (!(rig.radius > 0.0)) {
    throw InvalidArgument("chord_pixel_endpoints: disc radius must be > 0");
  }
  const double sx = circle_radius.horizontal / rig.radius;
  const double sy = circle_radius.vertical / rig.radius;
  std::array<PanoPixelRatio, 2> out;
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector2d& q = seg.plane_endpoints[i];
    out[i] = {wrap_unit(circle_center.u + sx * q.x()), circle_center.v - sy * q.y()};
  }
  return out;
}

void SceneParams::validate() const {
  if (frames < 1) throw InvalidArgument("scene: frames must be >= 1");
  if (chords_per_frame < 1) throw InvalidArgument("scene: chords_per_frame must be >= 1");
  if (!(target_radius > 0.0)) throw InvalidArgument("scene: target_radius must be > 0");
  if (!(min_distance > 0.0) || !(max_distance >= min_distance)) {
    throw InvalidArgument("scene: need 0 < min_distance <= max_distance");
  }
  if (!(distance_step > 0.0)) throw InvalidArgument("scene: distance_step must be > 0");
  if (!(azimuth_span >= 0.0) || azimuth_span >= 2.0 * kPi) {
    throw InvalidArgument("scene: azimuth_span must be in [0, 2pi)");
  }
}

Scene build_scene(const ExtrinsicPose& truth, const ScanLayout& layout,
                  const SceneParams& params) {
  params.validate();
  layout.validate();

  const Mat3 r = rotation_matrix(truth.rotation);
  const Vec3 camera_origin = -r.transpose() * truth.translation;
  const Vec3 camera_forward = r.transpose() * Vec3::UnitX();
  const Vec3 camera_up = r.transpose() * Vec3::UnitZ();
  const double forward_azimuth = std::atan2(camera_forward.y(), camera_forward.x());

  // Channel offsets from the middle of the layout, cycled per frame so the
  // targets sit at a spread of heights.
  static constexpr int kChannelPattern[] = {-2, 0, -3, 1, -1, 2, -4, -2};
  const int middle = layout.channels() / 2;

  Scene scene;
  scene.layout = layout;
  for (int f = 0; f < params.frames; ++f) {
    const double t = params.frames == 1
                         ? 0.0
                         : static_cast<double>(f) / (params.frames - 1) - 0.5;
    const double azimuth = forward_azimuth + params.azimuth_span * t;
    const int channel = std::clamp(middle + kChannelPattern[f % 8], 0,
                                   layout.channels() - 1);
    const double elevation = layout.elevation_angles[channel];
    const Vec3 direction(std::cos(azimuth) * std::cos(elevation),
                         std::sin(azimuth) * std::cos(elevation),
                         std::sin(elevation));

    bool placed = false;
    const int steps = static_cast<int>(
        std::floor((params.max_distance - params.min_distance) / params.distance_step + 1e-9));
    for (int s = 0; s <= steps && !placed; ++s) {
      const double distance = params.min_distance + s * params.distance_step;
      const TargetRig rig = TargetRig::facing(distance * direction, params.target_radius,
                                              camera_origin, camera_up);
      const std::vector<ChordSegment> chords = scan_target(rig, layout);
      if (static_cast<int>(chords.size()) != params.chords_per_frame) continue;
      const bool usable = std::all_of(chords.begin(), chords.end(), [&](const ChordSegment& c) {
        return std::all_of(c.endpoints.begin(), c.endpoints.end(), [&](const Vec3& p) {
          return transform(p, truth).x() >= params.min_forward;
        });
      });
      if (!usable) continue;
      scene.rigs.push_back(rig);
      placed = true;
    }
    if (!placed) {
      throw InvalidArgument("build_scene: no distance in [" +
                            std::to_string(params.min_distance) + ", " +
                            std::to_string(params.max_distance) + "] m gives frame " +
                            std::to_string(f) + " exactly " +
                            std::to_string(params.chords_per_frame) + " chords");
    }
  }
  return scene;
}

}  // namespace panocalib
