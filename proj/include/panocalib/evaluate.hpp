#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panocalib/calibrator.hpp"
#include "panocalib/dataset.hpp"
#include "panocalib/geometry.hpp"

namespace panocalib {

struct PointError {
  // Wrap-aware u difference in (-0.5, 0.5] and plain v difference, as ratios.
  double du = 0.0;
  double dv = 0.0;
  // Absolute errors in pixels: |du| * width and |dv| * height.
  double horizontal_px = 0.0;
  double vertical_px = 0.0;
  bool skipped = false;
  // False when the point would be rejected by the training branch guard.
  bool in_branch = true;
};

struct ReprojectionReport {
  int width = 0;
  int height = 0;
  std::vector<PointError> points;
  double mean_horizontal_px = 0.0;
  double mean_vertical_px = 0.0;
  double max_horizontal_px = 0.0;
  double max_vertical_px = 0.0;
  int accepted = 0;
  int skipped = 0;
  int outside_branch = 0;

  std::string to_text() const;
  /// `key = value` lines for scripts.
  std::string to_key_values() const;
};

/// Projects every correspondence through `pose` and the full atan2 imaging
/// model and compares against the targets. Pole-singular points are skipped.
ReprojectionReport reprojection_report(std::span<const Correspondence> cs,
                                       const ExtrinsicPose& pose, int width,
                                       int height, HVariant variant);

struct PixelIndex {
  int col = 0;
  int row = 0;

  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

/// Nearest pixel of a ratio: round(u * width) wrapping to column 0 at the
/// seam, round(v * height) clamped to the last row.
PixelIndex nearest_pixel(const PanoPixelRatio& px, int width, int height);

/// Pixel of a LiDAR point, or nullopt when it projects onto the pole.
std::optional<PixelIndex> pixel_of(const Vec3& lidar_point, const ExtrinsicPose& pose,
                                   int width, int height);

struct OverlayResult {
  ImageRaster image;
  int drawn = 0;
  int skipped = 0;
};

inline constexpr Rgb kMarkerColor{255, 0, 255};

/// Copy of the panorama with every projectable point drawn as a one-pixel dot.
OverlayResult project_overlay(const PointCloud& cloud, const ImageRaster& image,
                              const ExtrinsicPose& pose, Rgb marker = kMarkerColor);

struct ColorizeResult {
  PointCloud cloud;
  int colored = 0;
  int uncolored = 0;
};

/// Colors each point with the panorama pixel it projects to. Points on the
/// pole are dropped, or kept as black when keep_uncolored is set.
ColorizeResult colorize_cloud(const PointCloud& cloud, const ImageRaster& image,
                              const ExtrinsicPose& pose, bool keep_uncolored = false);

}  // namespace panocalib
