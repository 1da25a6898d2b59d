#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "panocalib/dataset.hpp"
#include "panocalib/errors.hpp"

using namespace panocalib;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "panocalib_test_dataset";
  fs::create_directories(dir);
  return dir;
}

template <typename Fn>
std::string error_text(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("format_double / parse_double") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double x = d(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(parse_double(format_double(x)).value() == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double(" 2.5 ").value() == 2.5);
  CHECK(parse_double("+4").value() == 4.0);
  CHECK(parse_double("-1e-3").value() == -1e-3);
  CHECK_FALSE(parse_double(""));
  CHECK_FALSE(parse_double("1.0x"));
  CHECK_FALSE(parse_double("nan"));
  CHECK_FALSE(parse_double("inf"));
  CHECK_FALSE(parse_double("1e999"));
  CHECK_FALSE(parse_double("+-3"));
  CHECK_FALSE(parse_double("abc"));
}

TEST_CASE("correspondence CSV round trip is exact") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coord(-50, 50);
  std::uniform_real_distribution<double> ratio(1e-6, 1 - 1e-6);
  std::vector<Correspondence> cs;
  for (int i = 0; i < 200; ++i) {
    cs.push_back({Vec3(coord(rng), coord(rng), coord(rng)), {ratio(rng), ratio(rng)}});
  }
  const std::string text = format_correspondences(cs);
  CHECK(text.rfind("x_l,y_l,z_l,u,v\n", 0) == 0);
  const auto back = parse_correspondences(text, "mem");
  REQUIRE(back.size() == cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    CHECK(back[i].lidar_point == cs[i].lidar_point);
    CHECK(back[i].target.u == cs[i].target.u);
    CHECK(back[i].target.v == cs[i].target.v);
  }
  CHECK(format_correspondences(back) == text);

  const fs::path path = scratch_dir() / "pairs.csv";
  write_correspondences(cs, path);
  CHECK(read_correspondences(path).size() == cs.size());
}

TEST_CASE("correspondence parsing: separators, comments, headers") {
  const auto cs = parse_correspondences(
      "# comment line\n"
      "x y z u v\n"
      "1 2 3 0.25 0.5   # trailing\n"
      "\n"
      "4,5,6,0,0.75\n",
      "mem");
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].lidar_point == Vec3(1, 2, 3));
  CHECK(cs[1].target.u == 0.0);
  CHECK(cs[1].target.v == 0.75);
  CHECK(parse_correspondences("", "mem").empty());

  CHECK(contains(error_text([] { parse_correspondences("1,2,3,0.5\n", "f.csv"); }),
                 "f.csv:1: expected 5 columns"));
  CHECK(contains(error_text([] { parse_correspondences("h\n1,2,3,0.5,abc\n", "f.csv"); }),
                 "f.csv:2: invalid number 'abc'"));
  CHECK(contains(error_text([] { parse_correspondences("1,2,3,1.0,0.5\n", "f.csv"); }),
                 "u' = 1"));
  CHECK(contains(error_text([] { parse_correspondences("1,2,3,0.5,0\n", "f.csv"); }),
                 "v' = 0"));
  CHECK_THROWS_AS(parse_correspondences("h\n1,2,,0.5,0.5\n", "f"), DataError);
  CHECK_THROWS_AS(parse_correspondences("a,b,c,d,e\nx,y,z,u,v\n", "f"), DataError);
  CHECK_THROWS_AS(read_correspondences(scratch_dir() / "missing.csv"), IoError);
}

TEST_CASE("point cloud read/write") {
  PointCloud plain;
  plain.points = {Vec3(1, 2, 3), Vec3(-0.5, 0.25, 1e-9)};
  const PointCloud back = parse_pointcloud(format_pointcloud(plain), "mem");
  CHECK(back.points == plain.points);
  CHECK_FALSE(back.has_colors());

  PointCloud colored = plain;
  colored.colors = {{1, 2, 3}, {255, 0, 128}};
  const PointCloud cback = parse_pointcloud(format_pointcloud(colored), "mem");
  CHECK(cback.points == colored.points);
  CHECK(cback.colors == colored.colors);

  const fs::path path = scratch_dir() / "cloud.xyz";
  write_pointcloud(colored, path);
  CHECK(read_pointcloud(path).colors == colored.colors);

  CHECK(contains(error_text([] { parse_pointcloud("1 2 3\n1 2 3 4 5 6\n", "c"); }), "c:2"));
  CHECK_THROWS_AS(parse_pointcloud("1 2\n", "c"), DataError);
  CHECK_THROWS_AS(parse_pointcloud("1 2 3 256 0 0\n", "c"), DataError);
  CHECK_THROWS_AS(parse_pointcloud("1 2 3 1.5 0 0\n", "c"), DataError);
  CHECK_THROWS_AS(parse_pointcloud("1 2 3 -1 0 0\n", "c"), DataError);
  PointCloud mismatched = plain;
  mismatched.colors = {{1, 1, 1}};
  CHECK_THROWS_AS(format_pointcloud(mismatched), InvalidArgument);
}

TEST_CASE("P6 images") {
  ImageRaster img(4, 2, {10, 20, 30});
  img.set(3, 1, {1, 2, 3});
  CHECK(img.at(3, 1) == Rgb{1, 2, 3});
  CHECK(img.at(0, 0) == Rgb{10, 20, 30});
  CHECK(img.is_equirectangular());
  CHECK_THROWS_AS(img.at(4, 0), InvalidArgument);
  CHECK_THROWS_AS(ImageRaster(0, 2), InvalidArgument);

  const std::string bytes = encode_ppm(img);
  CHECK(bytes.rfind("P6\n4 2\n255\n", 0) == 0);
  CHECK(bytes.size() == 11 + 24);
  std::vector<std::string> warnings;
  const ImageRaster back = decode_ppm(bytes, "mem", &warnings);
  CHECK(back.rgb == img.rgb);
  CHECK(warnings.empty());

  // Header comments and other whitespace are allowed.
  const std::string commented = "P6 # made by hand\n4\t2\n# max\n255\n" + bytes.substr(11);
  CHECK(decode_ppm(commented, "mem").rgb == img.rgb);

  const ImageRaster square(3, 3);
  decode_ppm(encode_ppm(square), "sq.ppm", &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(contains(warnings[0], "sq.ppm"));

  CHECK(contains(error_text([] { decode_ppm("P3\n1 1\n255\n000", "x"); }), "P6"));
  CHECK(contains(error_text([] { decode_ppm("P6\n1 1\n65535\n000000", "x"); }), "maxval"));
  CHECK(contains(error_text([&] { decode_ppm(bytes.substr(0, bytes.size() - 1), "x"); }),
                 "payload bytes"));
  CHECK_THROWS_AS(decode_ppm("P6\n1 x\n255\n", "x"), DataError);
  CHECK_THROWS_AS(decode_ppm("P6\n1 1\n255", "x"), DataError);

  const fs::path path = scratch_dir() / "img.ppm";
  write_image(img, path);
  CHECK(read_image(path).rgb == img.rgb);
}

TEST_CASE("config: defaults, parsing and echo") {
  const RunConfig d = default_config();
  CHECK(d.defaulted_keys.size() == config_keys().size());
  CHECK(get_config_value(d, "learning_rate") == "20");
  CHECK(get_config_value(d, "variant") == "signed");
  CHECK(get_config_value(d, "loss_aggregation") == "mean");

  const RunConfig c = parse_config(
      "# run\n"
      "learning_rate = 5\n"
      "variant = squared\n"
      "seed = 42   # both streams\n"
      "pixel_sigma_u = 0.001\n"
      "init_translation_min = -2\n"
      "init_translation_max = +2\n",
      "run.cfg");
  CHECK(c.training.learning_rate == 5.0);
  CHECK(c.training.variant == HVariant::Squared);
  CHECK(c.training.rng_seed == 42);
  CHECK(c.noise.rng_seed == 42);
  CHECK(c.noise.pixel_sigma_u == 0.001);
  CHECK(c.training.init_box.lower == Vec3::Constant(-2));
  CHECK(c.training.init_box.upper == Vec3::Constant(2));

  const std::string echo = format_config(c);
  CHECK(contains(echo, "learning_rate = 5\n"));
  CHECK(contains(echo, "restarts = 16  # default\n"));
  // The echo parses back to the same effective values.
  const RunConfig again = parse_config(echo, "echo");
  for (const std::string& k : config_keys()) {
    CAPTURE(k);
    CHECK(get_config_value(again, k) == get_config_value(c, k));
  }
}

TEST_CASE("config: errors") {
  CHECK(contains(error_text([] { parse_config("nope = 1\n", "a.cfg"); }),
                 "a.cfg:1: unknown config key 'nope'"));
  CHECK(contains(error_text([] { parse_config("restarts = 2\nrestarts = 3\n", "a.cfg"); }),
                 "a.cfg:2: duplicate"));
  CHECK(contains(error_text([] { parse_config("restarts = two\n", "a.cfg"); }), "a.cfg:1"));
  CHECK_THROWS_AS(parse_config("learning_rate\n", "a"), DataError);
  CHECK_THROWS_AS(parse_config("learning_rate = -1\n", "a"), DataError);
  CHECK_THROWS_AS(parse_config("variant = fancy\n", "a"), DataError);
  CHECK_THROWS_AS(parse_config("restarts = 2.5\n", "a"), DataError);
  CHECK_THROWS_AS(parse_config("width = 0\n", "a"), DataError);
  RunConfig r = default_config();
  CHECK_THROWS_AS(set_config_value(r, "bogus", "1"), DataError);
  set_config_value(r, "frames", "4");
  CHECK(r.scene.frames == 4);
  CHECK(std::find(r.defaulted_keys.begin(), r.defaulted_keys.end(), "frames") ==
        r.defaulted_keys.end());
}

TEST_CASE("pose and result files") {
  const ExtrinsicPose pose = reference_pose();
  const ExtrinsicPose back = parse_pose(format_pose(pose), "mem");
  CHECK(back.params() == pose.params());

  CalibrationResult r;
  r.pose = pose;
  r.pose.rotation.beta = -pose.rotation.beta;  // written normalized
  r.final_loss = 1.5e-12;
  r.accepted_points = 48;
  r.trace.status = TrainingStatus::Converged;
  r.trace.records = {{0, 0.5, pose.params(), 1.0, 48}, {7, 1.5e-12, pose.params(), 0.0, 48}};
  const std::string text = format_calibration_result(r);
  CHECK(contains(text, "status = converged\n"));
  CHECK(contains(text, "iterations = 7\n"));
  CHECK(contains(text, "initial_loss = 0.5\n"));
  const ExtrinsicPose read = parse_pose(text, "mem");
  CHECK(read.rotation.beta >= 0.0);
  CHECK((rotation_matrix(read.rotation) - rotation_matrix(r.pose.rotation)).norm() < 1e-14);

  CHECK(contains(error_text([] { parse_pose("alpha = 1\nbeta = 2\n", "p.txt"); }),
                 "'gamma' missing"));
  CHECK_THROWS_AS(parse_pose("alpha = 1\nbeta = 2\ngamma = 3\nb1 = x\nb2 = 0\nb3 = 0\n", "p"),
                  DataError);

  const std::string trace = format_trace(r.trace);
  CHECK(trace.rfind("iteration,loss,alpha,beta,gamma,b1,b2,b3,gradient_inf_norm,accepted\n", 0) ==
        0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 3);
}

TEST_CASE("text file helpers") {
  const fs::path path = scratch_dir() / "bytes.bin";
  const std::string content("a\0b\r\nc", 6);
  write_text_file(path, content);
  CHECK(read_text_file(path) == content);
  CHECK(contains(error_text([] { read_text_file("/nonexistent/dir/file"); }),
                 "/nonexistent/dir/file"));
  CHECK_THROWS_AS(write_text_file("/nonexistent/dir/file", "x"), IoError);
}
