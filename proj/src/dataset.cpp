#include "panocalib/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <sstream>

#include "panocalib/errors.hpp"

namespace panocalib {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Calls fn(line_number, line) for every line with comments stripped and
// surrounding whitespace trimmed; blank lines are skipped.
void for_each_line(std::string_view text,
                   const std::function<void(int, std::string_view)>& fn) {
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view line = text.substr(pos, end - pos);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (!line.empty()) fn(number, line);
    if (end == text.size()) break;
    pos = end + 1;
  }
}

// Comma-separated if the line has a comma (empty fields are kept so they can
// be rejected), whitespace-separated otherwise.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  if (line.find(',') != std::string_view::npos) {
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(trim(line.substr(pos, comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return fields;
  }
  std::size_t pos = 0;
  while (pos < line.size()) {
    const std::size_t start = line.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    std::size_t end = line.find_first_of(" \t", start);
    if (end == std::string_view::npos) end = line.size();
    fields.push_back(line.substr(start, end - start));
    pos = end;
  }
  return fields;
}

std::string at_line(const std::string& source, int line) {
  return source + ":" + std::to_string(line) + ": ";
}

std::vector<double> parse_numeric_row(const std::vector<std::string_view>& fields,
                                      const std::string& source, int line) {
  std::vector<double> values;
  values.reserve(fields.size());
  for (std::string_view f : fields) {
    const std::optional<double> v = parse_double(f);
    if (!v) {
      throw DataError(at_line(source, line) + "invalid number '" + std::string(f) + "'");
    }
    values.push_back(*v);
  }
  return values;
}

bool all_numeric(const std::vector<std::string_view>& fields) {
  return std::all_of(fields.begin(), fields.end(),
                     [](std::string_view f) { return parse_double(f).has_value(); });
}

std::string format_double17(double value) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

template <typename Int>
Int parse_int(std::string_view text, std::string_view key) {
  Int value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError("config key '" + std::string(key) + "': expected an integer, got '" +
                    std::string(text) + "'");
  }
  return value;
}

double parse_config_double(std::string_view text, std::string_view key) {
  const std::optional<double> v = parse_double(text);
  if (!v) {
    throw DataError("config key '" + std::string(key) + "': expected a finite number, got '" +
                    std::string(text) + "'");
  }
  return *v;
}

struct ConfigKey {
  std::string name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

ConfigKey double_key(std::string name, double RunConfig::*field) {
  std::string n = name;
  return {std::move(name),
          [field, n](RunConfig& c, std::string_view v) { c.*field = parse_config_double(v, n); },
          [field](const RunConfig& c) { return format_double(c.*field); }};
}

template <typename Getter>
ConfigKey ref_double_key(std::string name, Getter ref) {
  std::string n = name;
  return {std::move(name),
          [ref, n](RunConfig& c, std::string_view v) { ref(c) = parse_config_double(v, n); },
          [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); }};
}

template <typename Getter>
ConfigKey ref_int_key(std::string name, Getter ref) {
  std::string n = name;
  return {std::move(name),
          [ref, n](RunConfig& c, std::string_view v) { ref(c) = parse_int<int>(v, n); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

const std::vector<ConfigKey>& key_table() {
  static const std::vector<ConfigKey> table = [] {
    std::vector<ConfigKey> t;
    t.push_back(ref_int_key("max_iterations",
                            [](RunConfig& c) -> int& { return c.training.max_iterations; }));
    t.push_back(ref_double_key("learning_rate",
                               [](RunConfig& c) -> double& { return c.training.learning_rate; }));
    t.push_back(ref_double_key(
        "rotation_rate_scale", [](RunConfig& c) -> double& { return c.training.rotation_rate_scale; }));
    t.push_back(ref_double_key(
        "convergence_epsilon", [](RunConfig& c) -> double& { return c.training.convergence_epsilon; }));
    t.push_back({"loss_aggregation",
                 [](RunConfig& c, std::string_view v) {
                   try {
                     c.training.aggregation = parse_aggregation(v);
                   } catch (const InvalidArgument& e) {
                     throw DataError(std::string("config key 'loss_aggregation': ") + e.what());
                   }
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.training.aggregation)); }});
    t.push_back({"variant",
                 [](RunConfig& c, std::string_view v) {
                   try {
                     c.training.variant = parse_variant(v);
                   } catch (const InvalidArgument& e) {
                     throw DataError(std::string("config key 'variant': ") + e.what());
                   }
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.training.variant)); }});
    t.push_back(ref_int_key("restarts", [](RunConfig& c) -> int& { return c.training.restarts; }));
    t.push_back({"seed",
                 [](RunConfig& c, std::string_view v) {
                   const auto seed = parse_int<std::uint64_t>(v, "seed");
                   c.training.rng_seed = seed;
                   c.noise.rng_seed = seed;
                 },
                 [](const RunConfig& c) { return std::to_string(c.training.rng_seed); }});
    t.push_back({"init_translation_min",
                 [](RunConfig& c, std::string_view v) {
                   c.training.init_box.lower =
                       Vec3::Constant(parse_config_double(v, "init_translation_min"));
                 },
                 [](const RunConfig& c) { return format_double(c.training.init_box.lower.x()); }});
    t.push_back({"init_translation_max",
                 [](RunConfig& c, std::string_view v) {
                   c.training.init_box.upper =
                       Vec3::Constant(parse_config_double(v, "init_translation_max"));
                 },
                 [](const RunConfig& c) { return format_double(c.training.init_box.upper.x()); }});
    t.push_back(ref_double_key("point_sigma", [](RunConfig& c) -> double& { return c.noise.point_sigma; }));
    t.push_back(
        ref_double_key("pixel_sigma_u", [](RunConfig& c) -> double& { return c.noise.pixel_sigma_u; }));
    t.push_back(
        ref_double_key("pixel_sigma_v", [](RunConfig& c) -> double& { return c.noise.pixel_sigma_v; }));
    t.push_back(ref_int_key("frames", [](RunConfig& c) -> int& { return c.scene.frames; }));
    t.push_back(
        ref_int_key("chords_per_frame", [](RunConfig& c) -> int& { return c.scene.chords_per_frame; }));
    t.push_back(
        ref_double_key("target_radius", [](RunConfig& c) -> double& { return c.scene.target_radius; }));
    t.push_back(ref_double_key("target_min_distance",
                               [](RunConfig& c) -> double& { return c.scene.min_distance; }));
    t.push_back(ref_double_key("target_max_distance",
                               [](RunConfig& c) -> double& { return c.scene.max_distance; }));
    t.push_back(ref_double_key("target_distance_step",
                               [](RunConfig& c) -> double& { return c.scene.distance_step; }));
    t.push_back(double_key("azimuth_span_deg", &RunConfig::azimuth_span_deg));
    t.push_back(ref_double_key("min_forward", [](RunConfig& c) -> double& { return c.scene.min_forward; }));
    t.push_back(ref_int_key("channels", [](RunConfig& c) -> int& { return c.channels; }));
    t.push_back(double_key("elevation_min_deg", &RunConfig::elevation_min_deg));
    t.push_back(double_key("elevation_max_deg", &RunConfig::elevation_max_deg));
    t.push_back(double_key("azimuth_step_deg", &RunConfig::azimuth_step_deg));
    t.push_back(
        ref_double_key("truth_alpha", [](RunConfig& c) -> double& { return c.truth.rotation.alpha; }));
    t.push_back(ref_double_key("truth_beta", [](RunConfig& c) -> double& { return c.truth.rotation.beta; }));
    t.push_back(
        ref_double_key("truth_gamma", [](RunConfig& c) -> double& { return c.truth.rotation.gamma; }));
    t.push_back(ref_double_key("truth_b1", [](RunConfig& c) -> double& { return c.truth.translation.x(); }));
    t.push_back(ref_double_key("truth_b2", [](RunConfig& c) -> double& { return c.truth.translation.y(); }));
    t.push_back(ref_double_key("truth_b3", [](RunConfig& c) -> double& { return c.truth.translation.z(); }));
    t.push_back(ref_int_key("width", [](RunConfig& c) -> int& { return c.width; }));
    t.push_back(ref_int_key("height", [](RunConfig& c) -> int& { return c.height; }));
    t.push_back(ref_int_key("samples", [](RunConfig& c) -> int& { return c.samples; }));
    return t;
  }();
  return table;
}

const ConfigKey* find_key(std::string_view name) {
  for (const ConfigKey& k : key_table()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::map<std::string, std::string> parse_key_values(std::string_view text,
                                                    const std::string& source) {
  std::map<std::string, std::string> out;
  for_each_line(text, [&](int line, std::string_view content) {
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) {
      throw DataError(at_line(source, line) + "expected 'key = value'");
    }
    const std::string key(trim(content.substr(0, eq)));
    const std::string value(trim(content.substr(eq + 1)));
    if (key.empty()) throw DataError(at_line(source, line) + "empty key");
    if (!out.emplace(key, value).second) {
      throw DataError(at_line(source, line) + "duplicate key '" + key + "'");
    }
  });
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  // from_chars rejects a leading '+', which hand-written files do use.
  if (text.front() == '+') {
    text.remove_prefix(1);
    if (text.empty() || text.front() == '-' || text.front() == '+') return std::nullopt;
  }
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return content;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------

std::vector<Correspondence> parse_correspondences(std::string_view text,
                                                  const std::string& source) {
  std::vector<Correspondence> out;
  bool first = true;
  for_each_line(text, [&](int line, std::string_view content) {
    const std::vector<std::string_view> fields = split_fields(content);
    if (first) {
      first = false;
      if (!all_numeric(fields)) return;  // header
    }
    if (fields.size() != 5) {
      throw DataError(at_line(source, line) + "expected 5 columns, found " +
                      std::to_string(fields.size()));
    }
    const std::vector<double> v = parse_numeric_row(fields, source, line);
    Correspondence c;
    c.lidar_point = Vec3(v[0], v[1], v[2]);
    c.target = {v[3], v[4]};
    if (!(c.target.u >= 0.0 && c.target.u < 1.0)) {
      throw DataError(at_line(source, line) + "u' = " + format_double(c.target.u) +
                      " outside [0, 1)");
    }
    if (!(c.target.v > 0.0 && c.target.v < 1.0)) {
      throw DataError(at_line(source, line) + "v' = " + format_double(c.target.v) +
                      " outside (0, 1)");
    }
    out.push_back(c);
  });
  return out;
}

std::vector<Correspondence> read_correspondences(const std::filesystem::path& path) {
  return parse_correspondences(read_text_file(path), path.string());
}

std::string format_correspondences(std::span<const Correspondence> cs) {
  std::string out = "x_l,y_l,z_l,u,v\n";
  for (const Correspondence& c : cs) {
    out += format_double17(c.lidar_point.x()) + ',' + format_double17(c.lidar_point.y()) +
           ',' + format_double17(c.lidar_point.z()) + ',' + format_double17(c.target.u) +
           ',' + format_double17(c.target.v) + '\n';
  }
  return out;
}

void write_correspondences(std::span<const Correspondence> cs,
                           const std::filesystem::path& path) {
  write_text_file(path, format_correspondences(cs));
}

// ---------------------------------------------------------------------------

PointCloud parse_pointcloud(std::string_view text, const std::string& source) {
  PointCloud cloud;
  std::size_t columns = 0;
  for_each_line(text, [&](int line, std::string_view content) {
    const std::vector<std::string_view> fields = split_fields(content);
    if (fields.size() != 3 && fields.size() != 6) {
      throw DataError(at_line(source, line) + "expected 3 or 6 columns, found " +
                      std::to_string(fields.size()));
    }
    if (columns == 0) columns = fields.size();
    if (fields.size() != columns) {
      throw DataError(at_line(source, line) + "expected " + std::to_string(columns) +
                      " columns like the first row, found " + std::to_string(fields.size()));
    }
    const std::vector<double> v = parse_numeric_row(
        std::vector<std::string_view>(fields.begin(), fields.begin() + 3), source, line);
    cloud.points.emplace_back(v[0], v[1], v[2]);
    if (columns == 6) {
      std::uint8_t rgb[3];
      for (int i = 0; i < 3; ++i) {
        const std::string_view f = fields[3 + i];
        int value = -1;
        const auto res = std::from_chars(f.data(), f.data() + f.size(), value);
        if (res.ec != std::errc() || res.ptr != f.data() + f.size() || value < 0 ||
            value > 255) {
          throw DataError(at_line(source, line) + "color component '" + std::string(f) +
                          "' is not an integer in [0, 255]");
        }
        rgb[i] = static_cast<std::uint8_t>(value);
      }
      cloud.colors.push_back({rgb[0], rgb[1], rgb[2]});
    }
  });
  return cloud;
}

PointCloud read_pointcloud(const std::filesystem::path& path) {
  return parse_pointcloud(read_text_file(path), path.string());
}

std::string format_pointcloud(const PointCloud& cloud) {
  if (cloud.has_colors() && cloud.colors.size() != cloud.points.size()) {
    throw InvalidArgument("point cloud: color count does not match point count");
  }
  std::string out;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out += format_double17(p.x()) + ' ' + format_double17(p.y()) + ' ' +
           format_double17(p.z());
    if (cloud.has_colors()) {
      const Rgb& c = cloud.colors[i];
      out += ' ' + std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b);
    }
    out += '\n';
  }
  return out;
}

void write_pointcloud(const PointCloud& cloud, const std::filesystem::path& path) {
  write_text_file(path, format_pointcloud(cloud));
}

// ---------------------------------------------------------------------------

ImageRaster::ImageRaster(int w, int h, Rgb fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw InvalidArgument("image: dimensions must be positive");
  rgb.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill.r;
    rgb[i + 1] = fill.g;
    rgb[i + 2] = fill.b;
  }
}

Rgb ImageRaster::at(int col, int row) const {
  if (col < 0 || col >= width || row < 0 || row >= height) {
    throw InvalidArgument("image: pixel (" + std::to_string(col) + ", " + std::to_string(row) +
                          ") outside the raster");
  }
  const std::size_t i = (static_cast<std::size_t>(row) * width + col) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void ImageRaster::set(int col, int row, Rgb color) {
  if (col < 0 || col >= width || row < 0 || row >= height) {
    throw InvalidArgument("image: pixel (" + std::to_string(col) + ", " + std::to_string(row) +
                          ") outside the raster");
  }
  const std::size_t i = (static_cast<std::size_t>(row) * width + col) * 3;
  rgb[i] = color.r;
  rgb[i + 1] = color.g;
  rgb[i + 2] = color.b;
}

ImageRaster decode_ppm(std::string_view bytes, const std::string& source,
                       std::vector<std::string>* warnings) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> DataError {
    return DataError(source + ": byte " + std::to_string(pos) + ": " + what);
  };
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      const char ch = bytes[pos];
      if (ch == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos;
    long long value = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000'000) throw fail(std::string(what) + " too large");
      ++pos;
    }
    if (pos == start) throw fail(std::string("expected ") + what);
    return static_cast<int>(value);
  };

  if (bytes.size() < 2 || bytes.substr(0, 2) != "P6") throw fail("missing P6 magic number");
  pos = 2;
  const int width = read_uint("width");
  const int height = read_uint("height");
  const int maxval = read_uint("maxval");
  if (width <= 0 || height <= 0) throw fail("image dimensions must be positive");
  if (maxval != 255) throw fail("only maxval 255 is supported, found " + std::to_string(maxval));
  if (pos >= bytes.size() ||
      !(bytes[pos] == ' ' || bytes[pos] == '\n' || bytes[pos] == '\r' || bytes[pos] == '\t')) {
    throw fail("expected a single whitespace byte before the pixel data");
  }
  ++pos;
  const std::size_t expected = static_cast<std::size_t>(width) * height * 3;
  const std::size_t available = bytes.size() - pos;
  if (available != expected) {
    throw fail("expected " + std::to_string(expected) + " payload bytes for " +
               std::to_string(width) + "x" + std::to_string(height) + ", found " +
               std::to_string(available));
  }
  ImageRaster image;
  image.width = width;
  image.height = height;
  image.rgb.assign(reinterpret_cast<const std::uint8_t*>(bytes.data() + pos),
                   reinterpret_cast<const std::uint8_t*>(bytes.data() + bytes.size()));
  if (warnings && !image.is_equirectangular()) {
    warnings->push_back(source + ": " + std::to_string(width) + "x" + std::to_string(height) +
                        " is not a 2:1 equirectangular panorama");
  }
  return image;
}

ImageRaster read_image(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return decode_ppm(read_text_file(path), path.string(), warnings);
}

std::string encode_ppm(const ImageRaster& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw InvalidArgument("image: raster size does not match its dimensions");
  }
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  return out;
}

void write_image(const ImageRaster& image, const std::filesystem::path& path) {
  write_text_file(path, encode_ppm(image));
}

// ---------------------------------------------------------------------------

ScanLayout RunConfig::layout() const {
  return ScanLayout::uniform(channels, elevation_min_deg * kDegree, elevation_max_deg * kDegree,
                             azimuth_step_deg * kDegree);
}

SceneParams RunConfig::scene_params() const {
  SceneParams p = scene;
  p.azimuth_span = azimuth_span_deg * kDegree;
  return p;
}

void RunConfig::validate() const {
  training.validate();
  noise.validate();
  scene_params().validate();
  layout().validate();
  if (!truth.is_finite()) throw InvalidArgument("truth pose must be finite");
  if (width <= 0 || height <= 0) throw InvalidArgument("width and height must be > 0");
  if (samples < 1) throw InvalidArgument("samples must be >= 1");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const ConfigKey& k : key_table()) n.push_back(k.name);
    return n;
  }();
  return names;
}

RunConfig default_config() {
  RunConfig config;
  config.defaulted_keys = config_keys();
  return config;
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  const ConfigKey* k = find_key(key);
  if (!k) throw DataError("unknown config key '" + std::string(key) + "'");
  k->set(config, trim(value));
  std::erase(config.defaulted_keys, std::string(key));
}

std::string get_config_value(const RunConfig& config, std::string_view key) {
  const ConfigKey* k = find_key(key);
  if (!k) throw DataError("unknown config key '" + std::string(key) + "'");
  return k->get(config);
}

RunConfig parse_config(std::string_view text, const std::string& source) {
  RunConfig config = default_config();
  for_each_line(text, [&](int line, std::string_view content) {
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) {
      throw DataError(at_line(source, line) + "expected 'key = value'");
    }
    const std::string_view key = trim(content.substr(0, eq));
    if (!find_key(key)) {
      throw DataError(at_line(source, line) + "unknown config key '" + std::string(key) + "'");
    }
    if (std::find(config.defaulted_keys.begin(), config.defaulted_keys.end(), key) ==
        config.defaulted_keys.end()) {
      throw DataError(at_line(source, line) + "duplicate config key '" + std::string(key) + "'");
    }
    try {
      set_config_value(config, key, content.substr(eq + 1));
    } catch (const DataError& e) {
      throw DataError(at_line(source, line) + e.what());
    }
  });
  try {
    config.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(source + ": " + e.what());
  }
  return config;
}

RunConfig read_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.string());
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const ConfigKey& k : key_table()) {
    out += k.name + " = " + k.get(config);
    if (std::find(config.defaulted_keys.begin(), config.defaulted_keys.end(), k.name) !=
        config.defaulted_keys.end()) {
      out += "  # default";
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string format_pose(const ExtrinsicPose& pose) {
  const PoseParams p = pose.params();
  static constexpr const char* kNames[] = {"alpha", "beta", "gamma", "b1", "b2", "b3"};
  std::string out;
  for (int i = 0; i < 6; ++i) out += std::string(kNames[i]) + " = " + format_double17(p[i]) + '\n';
  return out;
}

std::string format_calibration_result(const CalibrationResult& result) {
  std::string out = "# extrinsic calibration result (angles rad, translation m)\n";
  out += format_pose(result.pose.normalized());
  out += "final_loss = " + format_double17(result.final_loss) + '\n';
  out += "status = " + std::string(to_string(result.trace.status)) + '\n';
  const int iterations =
      result.trace.records.empty() ? 0 : result.trace.records.back().iteration;
  out += "iterations = " + std::to_string(iterations) + '\n';
  out += "accepted_points = " + std::to_string(result.accepted_points) + '\n';
  out += "skipped_points = " + std::to_string(result.skipped_points) + '\n';
  out += "restart = " + std::to_string(result.restart) + '\n';
  out += "failed_restarts = " + std::to_string(result.failed_restarts) + '\n';
  if (!result.trace.records.empty()) {
    out += "initial_loss = " + format_double17(result.trace.records.front().loss) + '\n';
  }
  return out;
}

void write_calibration_result(const CalibrationResult& result,
                              const std::filesystem::path& path) {
  write_text_file(path, format_calibration_result(result));
}

ExtrinsicPose parse_pose(std::string_view text, const std::string& source) {
  const std::map<std::string, std::string> kv = parse_key_values(text, source);
  static constexpr const char* kNames[] = {"alpha", "beta", "gamma", "b1", "b2", "b3"};
  PoseParams p{};
  for (int i = 0; i < 6; ++i) {
    const auto it = kv.find(kNames[i]);
    if (it == kv.end()) {
      throw DataError(source + ": pose key '" + kNames[i] + "' missing");
    }
    const std::optional<double> v = parse_double(it->second);
    if (!v) {
      throw DataError(source + ": pose key '" + kNames[i] + "' has invalid value '" +
                      it->second + "'");
    }
    p[i] = *v;
  }
  return ExtrinsicPose::from_params(p);
}

ExtrinsicPose read_pose(const std::filesystem::path& path) {
  return parse_pose(read_text_file(path), path.string());
}

std::string format_trace(const TrainingTrace& trace) {
  std::string out = "iteration,loss,alpha,beta,gamma,b1,b2,b3,gradient_inf_norm,accepted\n";
  for (const TraceRecord& r : trace.records) {
    out += std::to_string(r.iteration) + ',' + format_double17(r.loss);
    for (double v : r.params) out += ',' + format_double17(v);
    out += ',' + format_double17(r.gradient_inf_norm) + ',' + std::to_string(r.accepted) + '\n';
  }
  return out;
}

std::string format_scene_metadata(const Scene& scene, const ExtrinsicPose& truth,
                                  const NoiseSpec& noise, int skipped_endpoints) {
  auto vec = [](const Vec3& v) {
    return format_double17(v.x()) + ' ' + format_double17(v.y()) + ' ' + format_double17(v.z());
  };
  std::ostringstream out;
  out << "# synthetic correspondence dataset metadata\n";
  out << "seed = " << noise.rng_seed << '\n';
  out << "point_sigma = " << format_double17(noise.point_sigma) << '\n';
  out << "pixel_sigma_u = " << format_double17(noise.pixel_sigma_u) << '\n';
  out << "pixel_sigma_v = " << format_double17(noise.pixel_sigma_v) << '\n';
  out << "skipped_endpoints = " << skipped_endpoints << '\n';
  out << "truth_alpha = " << format_double17(truth.rotation.alpha) << '\n';
  out << "truth_beta = " << format_double17(truth.rotation.beta) << '\n';
  out << "truth_gamma = " << format_double17(truth.rotation.gamma) << '\n';
  out << "truth_b1 = " << format_double17(truth.translation.x()) << '\n';
  out << "truth_b2 = " << format_double17(truth.translation.y()) << '\n';
  out << "truth_b3 = " << format_double17(truth.translation.z()) << '\n';
  out << "channels = " << scene.layout.channels() << '\n';
  out << "elevations_rad =";
  for (double e : scene.layout.elevation_angles) out << ' ' << format_double17(e);
  out << '\n';
  out << "azimuth_step_rad = " << format_double17(scene.layout.azimuth_step) << '\n';
  out << "rigs = " << scene.rigs.size() << '\n';
  for (std::size_t i = 0; i < scene.rigs.size(); ++i) {
    const TargetRig& r = scene.rigs[i];
    out << "rig" << i << "_center = " << vec(r.center) << '\n';
    out << "rig" << i << "_normal = " << vec(r.normal) << '\n';
    out << "rig" << i << "_up = " << vec(r.up) << '\n';
    out << "rig" << i << "_radius = " << format_double17(r.radius) << '\n';
  }
  return out.str();
}

}  // namespace panocalib
