#include "tnet/haze.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "json.hpp"
#include "tnet/rng.hpp"

namespace tnet {

namespace fs = std::filesystem;
using nlohmann::json;

ScalarField::ScalarField(int h, int w, double fill)
    : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {
  if (h < 1 || w < 1) throw ShapeError("field dimensions must be >= 1");
}

std::string to_string(DepthKind kind) {
  switch (kind) {
    case DepthKind::Ramp: return "ramp";
    case DepthKind::Radial: return "radial";
    case DepthKind::SmoothNoise: return "smooth-noise";
  }
  return "unknown";
}

DepthKind parse_depth_kind(const std::string& name) {
  if (name == "ramp") return DepthKind::Ramp;
  if (name == "radial") return DepthKind::Radial;
  if (name == "smooth-noise") return DepthKind::SmoothNoise;
  throw ConfigError("unknown depth kind '" + name + "' (expected ramp, radial or smooth-noise)");
}

ScalarField transmission_from_depth(const ScalarField& depth, double beta_s) {
  if (!(beta_s > 0.0)) throw DomainError("scattering coefficient must be > 0");
  ScalarField t = depth;
  for (double& v : t.values) {
    if (v < 0.0) throw DomainError("depth must be non-negative");
    v = std::exp(-beta_s * v);
  }
  return t;
}

namespace {

void check_airlight(double a) {
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("airlight must lie in (0, 1]");
}

void check_field(const ImageBuffer& img, const ScalarField& f) {
  if (img.height != f.height || img.width != f.width) {
    throw ShapeError("depth map size does not match image");
  }
}

}  // namespace

HazeSample apply_haze(const ImageBuffer& clean, const ScalarField& depth, double beta_s,
                      double airlight) {
  check_airlight(airlight);
  check_field(clean, depth);
  if (clean.domain != ValueDomain::Unit) throw DomainError("clean image must be in [0, 1]");
  for (float v : clean.pixels) {
    if (!(v >= 0.f && v <= 1.f)) throw DomainError("clean image values must lie in [0, 1]");
  }
  const ScalarField t = transmission_from_depth(depth, beta_s);
  HazeSample s{clean, ImageBuffer(clean.height, clean.width), depth, beta_s, airlight};
  for (int y = 0; y < clean.height; ++y) {
    for (int x = 0; x < clean.width; ++x) {
      const double tv = t.at(y, x);
      for (int c = 0; c < 3; ++c) {
        s.hazy.at(y, x, c) =
            static_cast<float>(clean.at(y, x, c) * tv + airlight * (1.0 - tv));
      }
    }
  }
  return s;
}

HazeInversion invert_haze(const ImageBuffer& hazy, const ScalarField& depth, double beta_s,
                          double airlight, double t_min) {
  check_airlight(airlight);
  check_field(hazy, depth);
  const ScalarField t = transmission_from_depth(depth, beta_s);
  HazeInversion out{ImageBuffer(hazy.height, hazy.width),
                    std::vector<std::uint8_t>(static_cast<std::size_t>(hazy.height) * hazy.width, 0),
                    0};
  for (int y = 0; y < hazy.height; ++y) {
    for (int x = 0; x < hazy.width; ++x) {
      const double tv = t.at(y, x);
      const bool low = tv < t_min;
      if (low) {
        out.flagged[static_cast<std::size_t>(y) * hazy.width + x] = 1;
        ++out.flagged_count;
      }
      for (int c = 0; c < 3; ++c) {
        const double i = hazy.at(y, x, c);
        const double j = low ? i : (i - airlight * (1.0 - tv)) / tv;
        out.clean.at(y, x, c) = static_cast<float>(std::clamp(j, 0.0, 1.0));
      }
    }
  }
  return out;
}

ScalarField radial_depth(int height, int width, double cy, double cx) {
  ScalarField d(height, width);
  double far = 0.0;
  for (double y : {0.0, static_cast<double>(height - 1)}) {
    for (double x : {0.0, static_cast<double>(width - 1)}) far = std::max(far, std::hypot(y - cy, x - cx));
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      d.at(y, x) = far > 0.0 ? std::min(1.0, std::hypot(y - cy, x - cx) / far) : 0.0;
    }
  }
  return d;
}

namespace {

ScalarField ramp_depth(int height, int width, Rng& rng) {
  ScalarField d(height, width);
  const auto dir = rng.below(4);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double fx = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
      const double fy = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
      switch (dir) {
        case 0: d.at(y, x) = fx; break;
        case 1: d.at(y, x) = 1.0 - fx; break;
        case 2: d.at(y, x) = fy; break;
        default: d.at(y, x) = 1.0 - fy; break;
      }
    }
  }
  return d;
}

// Bilinear upsampling of a coarse random lattice, min-max normalized.
ScalarField smooth_noise_depth(int height, int width, Rng& rng) {
  constexpr int kGrid = 4;
  std::vector<double> lattice((kGrid + 1) * (kGrid + 1));
  for (double& v : lattice) v = rng.uniform();
  ScalarField d(height, width);
  for (int y = 0; y < height; ++y) {
    const double gy = height > 1 ? static_cast<double>(y) / (height - 1) * kGrid : 0.0;
    const int y0 = std::min(static_cast<int>(gy), kGrid - 1);
    const double ty = gy - y0;
    for (int x = 0; x < width; ++x) {
      const double gx = width > 1 ? static_cast<double>(x) / (width - 1) * kGrid : 0.0;
      const int x0 = std::min(static_cast<int>(gx), kGrid - 1);
      const double tx = gx - x0;
      const auto l = [&](int yy, int xx) { return lattice[yy * (kGrid + 1) + xx]; };
      const double top = l(y0, x0) * (1 - tx) + l(y0, x0 + 1) * tx;
      const double bot = l(y0 + 1, x0) * (1 - tx) + l(y0 + 1, x0 + 1) * tx;
      d.at(y, x) = top * (1 - ty) + bot * ty;
    }
  }
  const auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
  const double lo_v = *lo;
  const double span = *hi - *lo;
  for (double& v : d.values) v = span > 0.0 ? (v - lo_v) / span : 0.0;
  return d;
}

}  // namespace

ScalarField make_depth(DepthKind kind, int height, int width, std::uint64_t seed) {
  if (height < 1 || width < 1) throw ShapeError("depth map dimensions must be >= 1");
  Rng rng(seed);
  switch (kind) {
    case DepthKind::Ramp: return ramp_depth(height, width, rng);
    case DepthKind::Radial: {
      const double cy = rng.uniform(0.0, height - 1.0);
      const double cx = rng.uniform(0.0, width - 1.0);
      return radial_depth(height, width, cy, cx);
    }
    case DepthKind::SmoothNoise: return smooth_noise_depth(height, width, rng);
  }
  throw ConfigError("unknown depth kind");
}

ImageBuffer procedural_scene(int height, int width, std::uint64_t seed) {
  if (height < 1 || width < 1) throw ShapeError("scene dimensions must be >= 1");
  Rng rng(seed);
  ImageBuffer img(height, width);
  float top[3];
  float bottom[3];
  for (int c = 0; c < 3; ++c) {
    top[c] = static_cast<float>(rng.uniform(0.3, 1.0));
    bottom[c] = static_cast<float>(rng.uniform(0.0, 0.7));
  }
  for (int y = 0; y < height; ++y) {
    const float f = height > 1 ? static_cast<float>(y) / static_cast<float>(height - 1) : 0.f;
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = top[c] * (1 - f) + bottom[c] * f;
    }
  }
  const int shapes = 6 + static_cast<int>(rng.below(10));
  for (int s = 0; s < shapes; ++s) {
    const bool disk = rng.below(2) == 0;
    const double cy = rng.uniform(0.0, height);
    const double cx = rng.uniform(0.0, width);
    const double ry = rng.uniform(0.05, 0.3) * height;
    const double rx = rng.uniform(0.05, 0.3) * width;
    float color[3];
    for (float& v : color) v = static_cast<float>(rng.uniform());
    const double freq = rng.uniform(0.0, 0.8);
    const double amp = rng.uniform(0.0, 0.15);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dy = (y - cy) / ry;
        const double dx = (x - cx) / rx;
        const bool inside = disk ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (!inside) continue;
        const double stripe = amp * std::sin(freq * (x + y));
        for (int c = 0; c < 3; ++c) {
          img.at(y, x, c) = static_cast<float>(std::clamp(color[c] + stripe, 0.0, 1.0));
        }
      }
    }
  }
  return img;
}

void DatasetOptions::validate() const {
  if (count < 1) throw ConfigError("sample count must be >= 1");
  if (!(beta_range.first > 0.0) || beta_range.first > beta_range.second) {
    throw ConfigError("beta range must satisfy 0 < lo <= hi");
  }
  if (!(airlight_range.first > 0.0) || airlight_range.first > airlight_range.second ||
      airlight_range.second > 1.0) {
    throw ConfigError("airlight range must satisfy 0 < lo <= hi <= 1");
  }
  if (depth_kinds.empty()) throw ConfigError("at least one depth kind is required");
  if (crop < 0) throw ConfigError("crop must be >= 0");
}

std::vector<fs::path> list_png_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<ManifestEntry> build_dataset(const DatasetOptions& options) {
  options.validate();
  const auto sources = list_png_files(options.clean_dir);
  if (sources.empty()) {
    throw IoError("no PNG images in '" + options.clean_dir.string() + "'");
  }
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec || !fs::is_directory(options.out_dir)) {
    throw IoError("cannot create output directory '" + options.out_dir.string() + "'");
  }

  std::map<std::size_t, ImageBuffer> cache;
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < options.count; ++i) {
    Rng rng(mix_seed(options.seed * 0x100000001b3ULL + static_cast<std::uint64_t>(i)));
    const std::size_t src = rng.below(sources.size());
    auto it = cache.find(src);
    if (it == cache.end()) it = cache.emplace(src, read_png(sources[src])).first;
    const ImageBuffer& full = it->second;

    ManifestEntry e;
    e.index = i;
    e.crop_w = options.crop > 0 ? options.crop : full.width;
    e.crop_h = options.crop > 0 ? options.crop : full.height;
    if (e.crop_w > full.width || e.crop_h > full.height) {
      throw ShapeError("source '" + sources[src].filename().string() + "' is smaller than the " +
                       std::to_string(options.crop) + " pixel crop");
    }
    e.crop_x = static_cast<int>(rng.below(static_cast<std::uint64_t>(full.width - e.crop_w + 1)));
    e.crop_y = static_cast<int>(rng.below(static_cast<std::uint64_t>(full.height - e.crop_h + 1)));
    const DepthKind kind = options.depth_kinds[static_cast<std::size_t>(i) % options.depth_kinds.size()];
    e.depth_kind = to_string(kind);
    e.beta_s = rng.uniform(options.beta_range.first, options.beta_range.second);
    e.airlight = rng.uniform(options.airlight_range.first, options.airlight_range.second);
    e.seed = rng.next();

    char name[64];
    std::snprintf(name, sizeof name, "clean_%05d.png", i);
    e.clean_path = name;
    std::snprintf(name, sizeof name, "hazy_%05d.png", i);
    e.hazy_path = name;

    // Haze is applied to the 8-bit clean pixels that end up on disk.
    ImageBuffer clean = crop(full, e.crop_y, e.crop_x, e.crop_h, e.crop_w);
    for (float& v : clean.pixels) v = static_cast<float>(quantize8(v)) / 255.0f;
    const ScalarField depth = make_depth(kind, e.crop_h, e.crop_w, e.seed);
    const HazeSample sample = apply_haze(clean, depth, e.beta_s, e.airlight);
    write_png(options.out_dir / e.clean_path, sample.clean);
    write_png(options.out_dir / e.hazy_path, sample.hazy);
    entries.push_back(std::move(e));
  }
  write_manifest(options.out_dir / kManifestName, entries);
  return entries;
}

std::string manifest_line(const ManifestEntry& e) {
  // Field order is part of the file format.
  nlohmann::ordered_json j;
  j["index"] = e.index;
  j["clean_path"] = e.clean_path;
  j["hazy_path"] = e.hazy_path;
  j["depth_kind"] = e.depth_kind;
  j["beta_s"] = e.beta_s;
  j["airlight"] = e.airlight;
  j["seed"] = e.seed;
  j["crop_x"] = e.crop_x;
  j["crop_y"] = e.crop_y;
  j["crop_w"] = e.crop_w;
  j["crop_h"] = e.crop_h;
  return j.dump();
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  for (const auto& e : entries) out << manifest_line(e) << '\n';
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest '" + path.string() + "'");
  std::vector<ManifestEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.index = j.at("index").get<int>();
      e.clean_path = j.at("clean_path").get<std::string>();
      e.hazy_path = j.at("hazy_path").get<std::string>();
      e.depth_kind = j.at("depth_kind").get<std::string>();
      e.beta_s = j.at("beta_s").get<double>();
      e.airlight = j.at("airlight").get<double>();
      e.seed = j.at("seed").get<std::uint64_t>();
      e.crop_x = j.at("crop_x").get<int>();
      e.crop_y = j.at("crop_y").get<int>();
      e.crop_w = j.at("crop_w").get<int>();
      e.crop_h = j.at("crop_h").get<int>();
      entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return entries;
}

double verify_manifest_entry(const fs::path& dataset_dir, const ManifestEntry& e) {
  const ImageBuffer clean = read_png(dataset_dir / e.clean_path);
  const ImageBuffer hazy = read_png(dataset_dir / e.hazy_path);
  const ScalarField depth = make_depth(parse_depth_kind(e.depth_kind), clean.height, clean.width, e.seed);
  const HazeSample expect = apply_haze(clean, depth, e.beta_s, e.airlight);
  double worst = 0.0;
  for (std::size_t i = 0; i < hazy.pixels.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(hazy.pixels[i]) - expect.hazy.pixels[i]));
  }
  return worst;
}

}  // namespace tnet
