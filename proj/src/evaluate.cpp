#include "panocalib/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "panocalib/errors.hpp"

namespace panocalib {

namespace {

void require_dimensions(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("image width and height must be > 0");
  }
}

}  // namespace

ReprojectionReport reprojection_report(std::span<const Correspondence> cs,
                                       const ExtrinsicPose& pose, int width,
                                       int height, HVariant variant) {
  require_dimensions(width, height);
  ReprojectionReport report;
  report.width = width;
  report.height = height;
  report.points.reserve(cs.size());

  const Mat3 r = rotation_matrix(pose.rotation);
  double sum_h = 0.0;
  double sum_v = 0.0;
  for (const Correspondence& c : cs) {
    PointError e;
    const Vec3 pc = r * c.lidar_point + pose.translation;
    PanoPixelRatio px;
    try {
      px = project(pc);
    } catch (const PoleSingularity&) {
      e.skipped = true;
      ++report.skipped;
      report.points.push_back(e);
      continue;
    }
    // u is periodic: the shorter way round the seam is the error.
    e.du = px.u - c.target.u;
    e.du -= std::round(e.du);
    e.dv = px.v - c.target.v;
    e.horizontal_px = std::abs(e.du) * width;
    e.vertical_px = std::abs(e.dv) * height;
    e.in_branch = passes_branch_guard(pc, variant);
    if (!e.in_branch) ++report.outside_branch;

    sum_h += e.horizontal_px;
    sum_v += e.vertical_px;
    report.max_horizontal_px = std::max(report.max_horizontal_px, e.horizontal_px);
    report.max_vertical_px = std::max(report.max_vertical_px, e.vertical_px);
    ++report.accepted;
    report.points.push_back(e);
  }
  if (report.accepted > 0) {
    report.mean_horizontal_px = sum_h / report.accepted;
    report.mean_vertical_px = sum_v / report.accepted;
  }
  return report;
}

std::string ReprojectionReport::to_text() const {
  std::ostringstream out;
  out << "Reprojection error at " << width << "x" << height << " px\n";
  out << "  points evaluated: " << accepted << " (skipped " << skipped
      << ", outside training branch " << outside_branch << ")\n";
  out << "  horizontal: mean " << format_double(mean_horizontal_px) << " px, max "
      << format_double(max_horizontal_px) << " px\n";
  out << "  vertical:   mean " << format_double(mean_vertical_px) << " px, max "
      << format_double(max_vertical_px) << " px\n";
  return out.str();
}

std::string ReprojectionReport::to_key_values() const {
  std::ostringstream out;
  out << "width = " << width << '\n'
      << "height = " << height << '\n'
      << "accepted = " << accepted << '\n'
      << "skipped = " << skipped << '\n'
      << "outside_branch = " << outside_branch << '\n'
      << "mean_horizontal_px = " << format_double(mean_horizontal_px) << '\n'
      << "mean_vertical_px = " << format_double(mean_vertical_px) << '\n'
      << "max_horizontal_px = " << format_double(max_horizontal_px) << '\n'
      << "max_vertical_px = " << format_double(max_vertical_px) << '\n';
  return out.str();
}

PixelIndex nearest_pixel(const PanoPixelRatio& px, int width, int height) {
  require_dimensions(width, height);
  int col = static_cast<int>(std::lround(px.u * width));
  int row = static_cast<int>(std::lround(px.v * height));
  col %= width;
  if (col < 0) col += width;
  row = std::clamp(row, 0, height - 1);
  return {col, row};
}

std::optional<PixelIndex> pixel_of(const Vec3& lidar_point, const ExtrinsicPose& pose,
                                   int width, int height) {
  try {
    return nearest_pixel(project(transform(lidar_point, pose)), width, height);
  } catch (const PoleSingularity&) {
    return std::nullopt;
  }
}

OverlayResult project_overlay(const PointCloud& cloud, const ImageRaster& image,
                              const ExtrinsicPose& pose, Rgb marker) {
  require_dimensions(image.width, image.height);
  OverlayResult out;
  out.image = image;
  for (const Vec3& p : cloud.points) {
    const std::optional<PixelIndex> px = pixel_of(p, pose, image.width, image.height);
    if (!px) {
      ++out.skipped;
      continue;
    }
    out.image.set(px->col, px->row, marker);
    ++out.drawn;
  }
  return out;
}

ColorizeResult colorize_cloud(const PointCloud& cloud, const ImageRaster& image,
                              const ExtrinsicPose& pose, bool keep_uncolored) {
  require_dimensions(image.width, image.height);
  ColorizeResult out;
  out.cloud.points.reserve(cloud.points.size());
  out.cloud.colors.reserve(cloud.points.size());
  for (const Vec3& p : cloud.points) {
    const std::optional<PixelIndex> px = pixel_of(p, pose, image.width, image.height);
    if (!px) {
      ++out.uncolored;
      if (keep_uncolored) {
        out.cloud.points.push_back(p);
        out.cloud.colors.push_back({});
      }
      continue;
    }
    out.cloud.points.push_back(p);
    out.cloud.colors.push_back(image.at(px->col, px->row));
    ++out.colored;
  }
  return out;
}

}  // namespace panocalib
