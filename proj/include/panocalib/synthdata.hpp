#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "panocalib/calibrator.hpp"
#include "panocalib/geometry.hpp"

namespace panocalib {

/// Circular calibration target in the LiDAR frame.
struct TargetRig {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
  Vec3 up = Vec3::UnitZ();
  double radius = 0.4;

  /// In-plane axis completing (right, up, normal); points to the viewer's
  /// right when looking at the face the normal points out of.
  Vec3 right() const { return up.cross(normal); }

  /// Metric in-plane coordinates (right, up) of a point relative to center.
  Eigen::Vector2d plane_coordinates(const Vec3& p) const;

  void validate() const;

  /// Rig whose normal points at `viewer` and whose up axis is the projection
  /// of `up_hint` onto the disc plane.
  static TargetRig facing(const Vec3& center, double radius, const Vec3& viewer,
                          const Vec3& up_hint);
};

/// Ideal spinning LiDAR at the frame origin.
struct ScanLayout {
  std::vector<double> elevation_angles;  // radians, strictly increasing
  double azimuth_step = 0.2 * 3.14159265358979323846 / 180.0;

  int channels() const { return static_cast<int>(elevation_angles.size()); }

  void validate() const;

  /// `channels` equally spaced elevations from min to max (radians).
  static ScanLayout uniform(int channels, double min_elevation,
                            double max_elevation, double azimuth_step);

  /// 16 channels from -15 to +15 degrees, 0.2 degree azimuth step.
  static ScanLayout sixteen_channel();
};

/// Straight line of returns where one scan channel crosses the disc.
struct ChordSegment {
  std::array<Vec3, 2> endpoints;
  // In-plane (right, up) coordinates of the endpoints relative to the center.
  std::array<Eigen::Vector2d, 2> plane_endpoints;
  // Unit in-plane direction perpendicular to the chord; the chord's midpoint
  // sits at offset * perpendicular.
  Eigen::Vector2d perpendicular = Eigen::Vector2d::UnitY();
  double offset = 0.0;
  double half_length = 0.0;
  int channel = -1;

  /// Quadrant (1..4) of the chord midpoint in the disc's (right, up) frame.
  int quadrant() const;
};

struct NoiseSpec {
  double point_sigma = 0.0;    // meters, isotropic on LiDAR points
  double pixel_sigma_u = 0.0;  // pixel ratio
  double pixel_sigma_v = 0.0;  // pixel ratio
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Unit normal of the scan plane of a channel at `elevation`, linearized
/// around `azimuth`: the plane through the origin containing the beam at
/// that azimuth and the horizontal tangent to the sweep.
Vec3 channel_plane_normal(double elevation, double azimuth);

/// Intersection of the plane {x : normal . x = distance} with the disc.
/// Returns nullopt when the plane misses the disc or is parallel to it. A
/// tangent plane yields a zero-length chord.
std::optional<ChordSegment> intersect_plane_with_disc(const Vec3& plane_normal,
                                                      double plane_distance,
                                                      const TargetRig& rig);

/// Chords left on the disc by every channel of the layout; channels that miss
/// the disc or graze it (length <= 1e-6 m) produce nothing. Throws
/// InvalidArgument if the sensor origin lies on the disc.
std::vector<ChordSegment> scan_target(const TargetRig& rig,
                                      const ScanLayout& layout);

/// Returns along a chord spaced by the layout's azimuth step as seen from the
/// sensor, endpoints included.
std::vector<Vec3> sample_chord(const ChordSegment& seg, const ScanLayout& layout);

struct GeneratedData {
  std::vector<Correspondence> correspondences;
  // Endpoints dropped because they project onto the pole or the noisy target
  // left the valid v range.
  int skipped_endpoints = 0;
};

/// One correspondence per chord endpoint, in rig order, chord order, endpoint
/// order. The target is the exact projection of the noise-free endpoint under
/// `truth` plus pixel noise (u wrapped into [0, 1)); point noise perturbs the
/// stored LiDAR coordinates. Deterministic for a given noise seed.
GeneratedData generate_correspondences(std::span<const TargetRig> rigs,
                                       const ScanLayout& layout,
                                       const ExtrinsicPose& truth,
                                       const NoiseSpec& noise);

GeneratedData generate_correspondences(const TargetRig& rig,
                                       const ScanLayout& layout,
                                       const ExtrinsicPose& truth,
                                       const NoiseSpec& noise);

/// Horizontal and vertical circle radius in pixel ratios.
struct CircleRadius {
  double horizontal = 0.0;
  double vertical = 0.0;
};

/// What a circle detector would report for the disc in the panorama: the
/// projected center and the projected offsets of the right and top rim points.
struct DetectedCircle {
  PanoPixelRatio center;
  CircleRadius radius;
};

DetectedCircle observe_circle(const TargetRig& rig, const ExtrinsicPose& truth);

/// Pixel ratios of a chord's endpoints from the circle seen in the image,
/// scaling the chord's in-plane metric coordinates by radius_px / disc radius
/// about the circle center (right -> +u, up -> -v). Valid while the disc is
/// small in the image and faces the camera upright.
std::array<PanoPixelRatio, 2> chord_pixel_endpoints(
    const ChordSegment& seg, const PanoPixelRatio& circle_center,
    const CircleRadius& circle_radius, const TargetRig& rig);

/// Layout of the multi-frame synthetic scene.
struct SceneParams {
  int frames = 8;
  int chords_per_frame = 3;
  double target_radius = 0.4;
  double min_distance = 5.0;   // meters from the LiDAR
  double max_distance = 10.0;
  double distance_step = 0.05;
  double azimuth_span = 140.0 * 3.14159265358979323846 / 180.0;
  // Minimum camera-frame x of any chord endpoint.
  double min_forward = 1.0;

  void validate() const;
};

struct Scene {
  std::vector<TargetRig> rigs;
  ScanLayout layout;
};

/// Deterministic scene of `frames` targets spread over `azimuth_span` around
/// the camera's forward direction, each upright and facing the camera under
/// `truth`. Every target is pushed out from min_distance until the layout
/// leaves exactly chords_per_frame chords on it. Throws InvalidArgument when a
/// frame cannot be placed.
Scene build_scene(const ExtrinsicPose& truth, const ScanLayout& layout,
                  const SceneParams& params);

}  // namespace panocalib
