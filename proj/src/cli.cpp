#include "panocalib/cli.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "panocalib/calibrator.hpp"
#include "panocalib/dataset.hpp"
#include "panocalib/errors.hpp"
#include "panocalib/evaluate.hpp"
#include "panocalib/synthdata.hpp"

namespace panocalib::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failure that is not an exception (gradcheck tolerance exceeded).
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options every subcommand shares: a config file plus one flag per config key.
struct CommonOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration file (key = value)");
    for (const std::string& key : config_keys()) {
      sub->add_option_function<std::string>(
             "--" + key, [this, key](const std::string& v) { overrides[key] = v; },
             "Override config key '" + key + "'")
          ->group("Config overrides");
    }
  }

  RunConfig resolve() const {
    RunConfig config = config_path.empty() ? default_config() : read_config(config_path);
    try {
      for (const auto& [key, value] : overrides) set_config_value(config, key, value);
      config.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return config;
  }
};

void echo(std::ostream& out, const std::string& command,
          const std::vector<std::pair<std::string, std::string>>& paths,
          const RunConfig& config) {
  out << "# panocalib " << command << " effective configuration\n";
  for (const auto& [flag, value] : paths) {
    if (!value.empty()) out << "# --" << flag << " " << value << '\n';
  }
  out << format_config(config);
}

int exit_code_for(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::DataError:
    case ErrorClass::IoError:
    case ErrorClass::InvalidArgument:
      return kExitData;
    case ErrorClass::PoleSingularity:
    case ErrorClass::BranchDomain:
    case ErrorClass::AllPointsRejected:
    case ErrorClass::NumericalFailure:
      return kExitNumerical;
  }
  return kExitData;
}

void run_synth(const RunConfig& config, const std::string& out_path, std::string meta_path,
               const std::string& cloud_path, std::ostream& out) {
  const ScanLayout layout = config.layout();
  const Scene scene = build_scene(config.truth, layout, config.scene_params());
  const GeneratedData data =
      generate_correspondences(scene.rigs, scene.layout, config.truth, config.noise);
  write_correspondences(data.correspondences, out_path);
  if (meta_path.empty()) meta_path = out_path + ".meta";
  write_text_file(meta_path, format_scene_metadata(scene, config.truth, config.noise,
                                                   data.skipped_endpoints));
  if (!cloud_path.empty()) {
    PointCloud cloud;
    for (const TargetRig& rig : scene.rigs) {
      for (const ChordSegment& seg : scan_target(rig, scene.layout)) {
        for (const Vec3& p : sample_chord(seg, scene.layout)) cloud.points.push_back(p);
      }
    }
    write_pointcloud(cloud, cloud_path);
    out << "scan points: " << cloud.points.size() << '\n';
  }
  out << "correspondences: " << data.correspondences.size() << '\n'
      << "skipped endpoints: " << data.skipped_endpoints << '\n';
}

void run_calibrate(const RunConfig& config, const std::string& in_path,
                   const std::string& out_path, const std::string& trace_path,
                   const std::string& init_path, std::ostream& out) {
  const std::vector<Correspondence> cs = read_correspondences(in_path);
  if (cs.empty()) throw DataError(in_path + ": no correspondences");
  const CalibrationResult result =
      init_path.empty() ? train_multistart(cs, config.training)
                        : train(cs, read_pose(init_path), config.training);
  if (!std::isfinite(result.final_loss)) {
    throw NumericalFailure("training produced a non-finite loss");
  }
  write_calibration_result(result, out_path);
  if (!trace_path.empty()) write_text_file(trace_path, format_trace(result.trace));
  out << format_calibration_result(result);
}

void run_gradcheck(const RunConfig& config, std::ostream& out) {
  const GradientCheckReport report =
      gradient_check(config.samples, config.training.rng_seed, config.training.variant);
  out << "samples = " << report.samples << '\n'
      << "failures = " << report.failures << '\n'
      << "max_relative_error = " << format_double(report.max_relative_error) << '\n'
      << "max_absolute_error = " << format_double(report.max_absolute_error) << '\n'
      << "relative_tolerance = " << format_double(report.relative_tolerance) << '\n'
      << "absolute_floor = " << format_double(report.absolute_floor) << '\n';
  if (!report.passed()) {
    throw CheckFailed(std::to_string(report.failures) + " of " +
                      std::to_string(report.samples) +
                      " samples exceed the gradient tolerance");
  }
}

void run_project(const std::string& cloud_path, const std::string& image_path,
                 const std::string& pose_path, const std::string& out_path,
                 std::ostream& out, std::ostream& err) {
  const PointCloud cloud = read_pointcloud(cloud_path);
  std::vector<std::string> warnings;
  const ImageRaster image = read_image(image_path, &warnings);
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  const OverlayResult overlay = project_overlay(cloud, image, read_pose(pose_path));
  write_image(overlay.image, out_path);
  out << "drawn = " << overlay.drawn << '\n' << "skipped = " << overlay.skipped << '\n';
}

void run_colorize(const std::string& cloud_path, const std::string& image_path,
                  const std::string& pose_path, const std::string& out_path,
                  bool keep_uncolored, std::ostream& out, std::ostream& err) {
  const PointCloud cloud = read_pointcloud(cloud_path);
  std::vector<std::string> warnings;
  const ImageRaster image = read_image(image_path, &warnings);
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  const ColorizeResult result =
      colorize_cloud(cloud, image, read_pose(pose_path), keep_uncolored);
  write_pointcloud(result.cloud, out_path);
  out << "colored = " << result.colored << '\n' << "uncolored = " << result.uncolored << '\n';
}

void run_evaluate(const RunConfig& config, const std::string& in_path,
                  const std::string& pose_path, const std::string& report_path,
                  std::ostream& out) {
  const std::vector<Correspondence> cs = read_correspondences(in_path);
  const ReprojectionReport report = reprojection_report(
      cs, read_pose(pose_path), config.width, config.height, config.training.variant);
  out << report.to_text() << "\n" << report.to_key_values();
  if (!report_path.empty()) write_text_file(report_path, report.to_key_values());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LiDAR to panoramic camera extrinsic calibration toolkit", "panocalib"};
  app.require_subcommand(1);

  CommonOptions synth_common, calibrate_common, gradcheck_common, project_common,
      colorize_common, evaluate_common;
  std::string in_path, out_path, meta_path, cloud_path, trace_path, init_path, image_path,
      pose_path, report_path;
  bool keep_uncolored = false;

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic correspondence dataset");
  synth_common.attach(synth);
  synth->add_option("--out", out_path, "Correspondence CSV to write")->required();
  synth->add_option("--meta", meta_path, "Metadata sidecar (default <out>.meta)");
  synth->add_option("--cloud-out", cloud_path, "Also write the simulated scan returns");

  CLI::App* calibrate = app.add_subcommand("calibrate", "Recover the extrinsic pose");
  calibrate_common.attach(calibrate);
  calibrate->add_option("--in", in_path, "Correspondence CSV")->required();
  calibrate->add_option("--out", out_path, "Calibration result file")->required();
  calibrate->add_option("--trace", trace_path, "Per-iteration trace CSV");
  calibrate->add_option("--init", init_path, "Single run from this pose instead of multistart");

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
  gradcheck_common.attach(gradcheck);

  CLI::App* project = app.add_subcommand("project", "Draw a point cloud onto a panorama");
  project_common.attach(project);
  project->add_option("--cloud", cloud_path, "ASCII point cloud (LiDAR frame)")->required();
  project->add_option("--image", image_path, "Panorama (P6 pixmap)")->required();
  project->add_option("--pose", pose_path, "Pose or calibration result file")->required();
  project->add_option("--out", out_path, "Overlay pixmap to write")->required();

  CLI::App* colorize = app.add_subcommand("colorize", "Color a point cloud from a panorama");
  colorize_common.attach(colorize);
  colorize->add_option("--cloud", cloud_path, "ASCII point cloud (LiDAR frame)")->required();
  colorize->add_option("--image", image_path, "Panorama (P6 pixmap)")->required();
  colorize->add_option("--pose", pose_path, "Pose or calibration result file")->required();
  colorize->add_option("--out", out_path, "Colored point cloud to write")->required();
  colorize->add_flag("--keep-uncolored", keep_uncolored,
                     "Keep unprojectable points as black instead of dropping them");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Reprojection error report");
  evaluate_common.attach(evaluate);
  evaluate->add_option("--in", in_path, "Correspondence CSV")->required();
  evaluate->add_option("--pose", pose_path, "Pose or calibration result file")->required();
  evaluate->add_option("--report", report_path, "Also write the key-value block here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: UsageError: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      const RunConfig config = synth_common.resolve();
      echo(out, "synth", {{"out", out_path}, {"meta", meta_path}, {"cloud-out", cloud_path}},
           config);
      run_synth(config, out_path, meta_path, cloud_path, out);
    } else if (calibrate->parsed()) {
      const RunConfig config = calibrate_common.resolve();
      echo(out, "calibrate",
           {{"in", in_path}, {"out", out_path}, {"trace", trace_path}, {"init", init_path}},
           config);
      run_calibrate(config, in_path, out_path, trace_path, init_path, out);
    } else if (gradcheck->parsed()) {
      const RunConfig config = gradcheck_common.resolve();
      echo(out, "gradcheck", {}, config);
      run_gradcheck(config, out);
    } else if (project->parsed()) {
      const RunConfig config = project_common.resolve();
      echo(out, "project",
           {{"cloud", cloud_path}, {"image", image_path}, {"pose", pose_path}, {"out", out_path}},
           config);
      run_project(cloud_path, image_path, pose_path, out_path, out, err);
    } else if (colorize->parsed()) {
      const RunConfig config = colorize_common.resolve();
      echo(out, "colorize",
           {{"cloud", cloud_path}, {"image", image_path}, {"pose", pose_path}, {"out", out_path}},
           config);
      run_colorize(cloud_path, image_path, pose_path, out_path, keep_uncolored, out, err);
    } else if (evaluate->parsed()) {
      const RunConfig config = evaluate_common.resolve();
      echo(out, "evaluate", {{"in", in_path}, {"pose", pose_path}, {"report", report_path}},
           config);
      run_evaluate(config, in_path, pose_path, report_path, out);
    }
  } catch (const UsageError& e) {
    err << "error: UsageError: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CheckFailed& e) {
    err << "error: GradientCheckFailed: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << to_string(e.error_class()) << ": " << e.what() << '\n';
    return exit_code_for(e.error_class());
  }
  return kExitOk;
}

}  // namespace panocalib::cli
