#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panocalib/calibrator.hpp"
#include "panocalib/geometry.hpp"
#include "panocalib/synthdata.hpp"

namespace panocalib {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// ASCII XYZ cloud, optionally with one RGB triple per point.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Rgb> colors;  // empty, or one per point

  bool has_colors() const { return !colors.empty(); }
};

/// Row-major 8-bit RGB raster.
struct ImageRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  ImageRaster() = default;
  ImageRaster(int width, int height, Rgb fill = {});

  Rgb at(int col, int row) const;
  void set(int col, int row, Rgb color);

  /// Equirectangular panoramas are twice as wide as they are tall.
  bool is_equirectangular() const { return width == 2 * height; }
};

// ---------------------------------------------------------------------------
// Correspondence CSV: x_l, y_l, z_l, u', v' per row. Comma or whitespace
// separated on read, optional header line, '#' comments. Written with a header
// and 17 significant digits.

std::vector<Correspondence> parse_correspondences(std::string_view text,
                                                  const std::string& source);
std::vector<Correspondence> read_correspondences(const std::filesystem::path& path);
std::string format_correspondences(std::span<const Correspondence> cs);
void write_correspondences(std::span<const Correspondence> cs,
                           const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Point clouds: 3 (x y z) or 6 (x y z r g b) columns, consistent per file.

PointCloud parse_pointcloud(std::string_view text, const std::string& source);
PointCloud read_pointcloud(const std::filesystem::path& path);
std::string format_pointcloud(const PointCloud& cloud);
void write_pointcloud(const PointCloud& cloud, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Binary P6 pixmaps with maxval 255.

/// Decodes a P6 image. Appends a warning when the raster is not 2:1.
ImageRaster decode_ppm(std::string_view bytes, const std::string& source,
                       std::vector<std::string>* warnings = nullptr);
ImageRaster read_image(const std::filesystem::path& path,
                       std::vector<std::string>* warnings = nullptr);
std::string encode_ppm(const ImageRaster& image);
void write_image(const ImageRaster& image, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Run configuration: flat `key = value` text, '#' comments, unknown keys
// rejected. Every key has a default; keys not given are listed in
// defaulted_keys and marked in the echo.

struct RunConfig {
  TrainingConfig training;
  NoiseSpec noise;
  // azimuth_span is taken from azimuth_span_deg by scene_params().
  SceneParams scene;
  double azimuth_span_deg = 140.0;
  int channels = 16;
  double elevation_min_deg = -15.0;
  double elevation_max_deg = 15.0;
  double azimuth_step_deg = 0.2;
  ExtrinsicPose truth = reference_pose();
  int width = 4096;
  int height = 2048;
  int samples = 1000;

  std::vector<std::string> defaulted_keys;

  ScanLayout layout() const;
  SceneParams scene_params() const;
  void validate() const;
};

/// All recognised keys in echo order.
const std::vector<std::string>& config_keys();

RunConfig default_config();
RunConfig parse_config(std::string_view text, const std::string& source);
RunConfig read_config(const std::filesystem::path& path);

/// Sets one key from its text value; removes it from defaulted_keys.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& config, std::string_view key);

/// The effective configuration as parseable text; defaulted keys are
/// annotated with a trailing comment.
std::string format_config(const RunConfig& config);

// ---------------------------------------------------------------------------
// Calibration result / pose files: `key = value` lines. Readers need only
// alpha, beta, gamma, b1, b2, b3; everything else is informational.

std::string format_calibration_result(const CalibrationResult& result);
void write_calibration_result(const CalibrationResult& result,
                              const std::filesystem::path& path);
ExtrinsicPose parse_pose(std::string_view text, const std::string& source);
ExtrinsicPose read_pose(const std::filesystem::path& path);
std::string format_pose(const ExtrinsicPose& pose);

/// Trace as CSV: iteration, loss, alpha, beta, gamma, b1, b2, b3,
/// gradient_inf_norm, accepted.
std::string format_trace(const TrainingTrace& trace);

/// Sidecar metadata for a synthetic dataset: seed, noise, layout, truth pose
/// and every rig.
std::string format_scene_metadata(const Scene& scene, const ExtrinsicPose& truth,
                                  const NoiseSpec& noise, int skipped_endpoints);

// ---------------------------------------------------------------------------

/// Shortest text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict finite decimal parse; nullopt on trailing garbage, NaN or Inf.
std::optional<double> parse_double(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace panocalib
