#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "panocalib/calibrator.hpp"
#include "panocalib/cli.hpp"
#include "panocalib/dataset.hpp"
#include "panocalib/errors.hpp"
#include "panocalib/evaluate.hpp"
#include "panocalib/geometry.hpp"
#include "panocalib/synthdata.hpp"

namespace py = pybind11;
using namespace panocalib;

PYBIND11_MODULE(_core, m) {
  m.doc() = "LiDAR to panoramic camera extrinsic calibration core";
  m.attr("__version__") = "0.1.0";

  // Python exception hierarchy mirroring ErrorClass.
  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<InvalidArgument> invalid(m, "InvalidArgument", base.ptr());
  static py::exception<PoleSingularity> pole(m, "PoleSingularity", base.ptr());
  static py::exception<BranchDomain> branch(m, "BranchDomain", base.ptr());
  static py::exception<AllPointsRejected> rejected(m, "AllPointsRejected", base.ptr());
  static py::exception<DataError> data(m, "DataError", base.ptr());
  static py::exception<IoError> io(m, "IoError", base.ptr());
  static py::exception<NumericalFailure> numerical(m, "NumericalFailure", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.error_class()) {
        case ErrorClass::InvalidArgument: py::set_error(invalid, e.what()); return;
        case ErrorClass::PoleSingularity: py::set_error(pole, e.what()); return;
        case ErrorClass::BranchDomain: py::set_error(branch, e.what()); return;
        case ErrorClass::AllPointsRejected: py::set_error(rejected, e.what()); return;
        case ErrorClass::DataError: py::set_error(data, e.what()); return;
        case ErrorClass::IoError: py::set_error(io, e.what()); return;
        case ErrorClass::NumericalFailure: py::set_error(numerical, e.what()); return;
      }
      py::set_error(base, e.what());
    }
  });

  py::enum_<HVariant>(m, "HVariant")
      .value("Squared", HVariant::Squared)
      .value("Signed", HVariant::Signed);
  py::enum_<LossAggregation>(m, "LossAggregation")
      .value("Mean", LossAggregation::Mean)
      .value("Sum", LossAggregation::Sum);
  py::enum_<TrainingStatus>(m, "TrainingStatus")
      .value("Converged", TrainingStatus::Converged)
      .value("IterationLimit", TrainingStatus::IterationLimit)
      .value("Diverged", TrainingStatus::Diverged);

  py::class_<EulerZXZ>(m, "EulerZXZ")
      .def(py::init<>())
      .def(py::init([](double a, double b, double g) { return EulerZXZ{a, b, g}; }),
           py::arg("alpha"), py::arg("beta"), py::arg("gamma"))
      .def_readwrite("alpha", &EulerZXZ::alpha)
      .def_readwrite("beta", &EulerZXZ::beta)
      .def_readwrite("gamma", &EulerZXZ::gamma)
      .def("normalized", &EulerZXZ::normalized);

  py::class_<ExtrinsicPose>(m, "ExtrinsicPose")
      .def(py::init<>())
      .def(py::init([](const EulerZXZ& r, const Vec3& t) { return ExtrinsicPose{r, t}; }),
           py::arg("rotation"), py::arg("translation"))
      .def_static("from_params", &ExtrinsicPose::from_params, py::arg("params"))
      .def_readwrite("rotation", &ExtrinsicPose::rotation)
      .def_readwrite("translation", &ExtrinsicPose::translation)
      .def("params", &ExtrinsicPose::params)
      .def("normalized", &ExtrinsicPose::normalized)
      .def("__repr__", [](const ExtrinsicPose& p) {
        std::ostringstream s;
        s << "ExtrinsicPose(" << format_pose(p) << ")";
        return s.str();
      });

  py::class_<PanoPixelRatio>(m, "PanoPixelRatio")
      .def(py::init<>())
      .def(py::init([](double u, double v) { return PanoPixelRatio{u, v}; }), py::arg("u"),
           py::arg("v"))
      .def_readwrite("u", &PanoPixelRatio::u)
      .def_readwrite("v", &PanoPixelRatio::v)
      .def("is_valid", &PanoPixelRatio::is_valid);

  py::class_<HForm>(m, "HForm")
      .def_readwrite("h1", &HForm::h1)
      .def_readwrite("h2", &HForm::h2)
      .def_readwrite("variant", &HForm::variant);

  py::class_<Correspondence>(m, "Correspondence")
      .def(py::init<>())
      .def(py::init([](const Vec3& p, const PanoPixelRatio& t) { return Correspondence{p, t}; }),
           py::arg("lidar_point"), py::arg("target"))
      .def_readwrite("lidar_point", &Correspondence::lidar_point)
      .def_readwrite("target", &Correspondence::target);

  py::class_<TranslationBox>(m, "TranslationBox")
      .def(py::init<>())
      .def_readwrite("lower", &TranslationBox::lower)
      .def_readwrite("upper", &TranslationBox::upper);

  py::class_<TrainingConfig>(m, "TrainingConfig")
      .def(py::init<>())
      .def_readwrite("max_iterations", &TrainingConfig::max_iterations)
      .def_readwrite("learning_rate", &TrainingConfig::learning_rate)
      .def_readwrite("rotation_rate_scale", &TrainingConfig::rotation_rate_scale)
      .def_readwrite("convergence_epsilon", &TrainingConfig::convergence_epsilon)
      .def_readwrite("aggregation", &TrainingConfig::aggregation)
      .def_readwrite("variant", &TrainingConfig::variant)
      .def_readwrite("restarts", &TrainingConfig::restarts)
      .def_readwrite("rng_seed", &TrainingConfig::rng_seed)
      .def_readwrite("init_box", &TrainingConfig::init_box)
      .def("validate", &TrainingConfig::validate);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("iteration", &TraceRecord::iteration)
      .def_readonly("loss", &TraceRecord::loss)
      .def_readonly("params", &TraceRecord::params)
      .def_readonly("gradient_inf_norm", &TraceRecord::gradient_inf_norm)
      .def_readonly("accepted", &TraceRecord::accepted);

  py::class_<TrainingTrace>(m, "TrainingTrace")
      .def_readonly("records", &TrainingTrace::records)
      .def_readonly("status", &TrainingTrace::status)
      .def_property_readonly("losses", [](const TrainingTrace& t) {
        std::vector<double> out;
        out.reserve(t.records.size());
        for (const TraceRecord& r : t.records) out.push_back(r.loss);
        return out;
      });

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("pose", &CalibrationResult::pose)
      .def_readonly("final_loss", &CalibrationResult::final_loss)
      .def_readonly("trace", &CalibrationResult::trace)
      .def_readonly("accepted_points", &CalibrationResult::accepted_points)
      .def_readonly("skipped_points", &CalibrationResult::skipped_points)
      .def_readonly("restart", &CalibrationResult::restart)
      .def_readonly("failed_restarts", &CalibrationResult::failed_restarts);

  py::class_<BatchLoss>(m, "BatchLoss")
      .def_readonly("value", &BatchLoss::value)
      .def_readonly("accepted", &BatchLoss::accepted)
      .def_readonly("skipped", &BatchLoss::skipped);

  py::class_<GradientCheckReport>(m, "GradientCheckReport")
      .def_readonly("samples", &GradientCheckReport::samples)
      .def_readonly("failures", &GradientCheckReport::failures)
      .def_readonly("max_relative_error", &GradientCheckReport::max_relative_error)
      .def_readonly("max_absolute_error", &GradientCheckReport::max_absolute_error)
      .def("passed", &GradientCheckReport::passed);

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init<>())
      .def_readwrite("point_sigma", &NoiseSpec::point_sigma)
      .def_readwrite("pixel_sigma_u", &NoiseSpec::pixel_sigma_u)
      .def_readwrite("pixel_sigma_v", &NoiseSpec::pixel_sigma_v)
      .def_readwrite("rng_seed", &NoiseSpec::rng_seed);

  py::class_<ReprojectionReport>(m, "ReprojectionReport")
      .def_readonly("width", &ReprojectionReport::width)
      .def_readonly("height", &ReprojectionReport::height)
      .def_readonly("mean_horizontal_px", &ReprojectionReport::mean_horizontal_px)
      .def_readonly("mean_vertical_px", &ReprojectionReport::mean_vertical_px)
      .def_readonly("max_horizontal_px", &ReprojectionReport::max_horizontal_px)
      .def_readonly("max_vertical_px", &ReprojectionReport::max_vertical_px)
      .def_readonly("accepted", &ReprojectionReport::accepted)
      .def_readonly("skipped", &ReprojectionReport::skipped)
      .def_readonly("outside_branch", &ReprojectionReport::outside_branch)
      .def("to_text", &ReprojectionReport::to_text);

  // geometry
  m.def("rotation_matrix", &rotation_matrix, py::arg("euler"));
  m.def("transform", &transform, py::arg("lidar_point"), py::arg("pose"));
  m.def("inverse_transform", &inverse_transform, py::arg("camera_point"), py::arg("pose"));
  m.def("project", &project, py::arg("camera_point"));
  m.def("unproject", &unproject, py::arg("pixel"));
  m.def("h_form", &h_form, py::arg("camera_point"), py::arg("variant") = HVariant::Signed);
  m.def("reconstruct_uv", &reconstruct_uv, py::arg("h"));
  m.def("passes_branch_guard", &passes_branch_guard, py::arg("camera_point"),
        py::arg("variant") = HVariant::Signed);
  m.def("reference_pose", &reference_pose);

  // calibrator
  m.def("point_loss", &point_loss, py::arg("correspondence"), py::arg("pose"),
        py::arg("variant") = HVariant::Signed);
  m.def(
      "batch_loss",
      [](const std::vector<Correspondence>& cs, const ExtrinsicPose& pose,
         const TrainingConfig& config) { return batch_loss(cs, pose, config); },
      py::arg("correspondences"), py::arg("pose"), py::arg("config") = TrainingConfig{});
  m.def(
      "loss_gradient",
      [](const std::vector<Correspondence>& cs, const ExtrinsicPose& pose,
         const TrainingConfig& config) { return loss_gradient(cs, pose, config); },
      py::arg("correspondences"), py::arg("pose"), py::arg("config") = TrainingConfig{});
  m.def(
      "train",
      [](const std::vector<Correspondence>& cs, const ExtrinsicPose& init,
         const TrainingConfig& config) {
        py::gil_scoped_release release;
        return train(cs, init, config);
      },
      py::arg("correspondences"), py::arg("init"), py::arg("config") = TrainingConfig{});
  m.def(
      "train_multistart",
      [](const std::vector<Correspondence>& cs, const TrainingConfig& config) {
        py::gil_scoped_release release;
        return train_multistart(cs, config);
      },
      py::arg("correspondences"), py::arg("config") = TrainingConfig{});
  m.def("gradient_check", &gradient_check, py::arg("samples"), py::arg("seed") = 0,
        py::arg("variant") = HVariant::Signed, py::arg("relative_tolerance") = 1e-5,
        py::arg("absolute_floor") = 1e-8);

  // synthdata: the default scene in one call.
  m.def(
      "synthesize",
      [](const ExtrinsicPose& truth, const NoiseSpec& noise) {
        const Scene scene = build_scene(truth, ScanLayout::sixteen_channel(), SceneParams{});
        return generate_correspondences(scene.rigs, scene.layout, truth, noise).correspondences;
      },
      py::arg("truth") = reference_pose(), py::arg("noise") = NoiseSpec{});

  // dataset / evaluate
  m.def("read_correspondences",
        [](const std::string& path) { return read_correspondences(path); }, py::arg("path"));
  m.def(
      "write_correspondences",
      [](const std::vector<Correspondence>& cs, const std::string& path) {
        write_correspondences(cs, path);
      },
      py::arg("correspondences"), py::arg("path"));
  m.def("read_pose", [](const std::string& path) { return read_pose(path); }, py::arg("path"));
  m.def("format_pose", &format_pose, py::arg("pose"));
  m.def(
      "reprojection_report",
      [](const std::vector<Correspondence>& cs, const ExtrinsicPose& pose, int width, int height,
         HVariant variant) { return reprojection_report(cs, pose, width, height, variant); },
      py::arg("correspondences"), py::arg("pose"), py::arg("width") = 4096,
      py::arg("height") = 2048, py::arg("variant") = HVariant::Signed);

  // Command line entry point; returns (exit_code, stdout, stderr).
  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "panocalib");
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
