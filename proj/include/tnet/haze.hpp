#pragma once

// Synthetic haze from the atmospheric scattering model
//   I = J * t + A * (1 - t),  t = exp(-beta_s * d)
// with procedural depth maps, its analytic inverse, and paired dataset
// generation with a JSON-lines manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tnet/image.hpp"

namespace tnet {

/// Single-channel H x W field (depth or transmission).
struct ScalarField {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(int h, int w, double fill = 0.0);
  double& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  [[nodiscard]] double at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

enum class DepthKind { Ramp, Radial, SmoothNoise };

std::string to_string(DepthKind kind);
/// Accepts "ramp", "radial", "smooth-noise"; throws ConfigError otherwise.
DepthKind parse_depth_kind(const std::string& name);

ScalarField transmission_from_depth(const ScalarField& depth, double beta_s);

struct HazeSample {
  ImageBuffer clean;
  ImageBuffer hazy;
  ScalarField depth;
  double beta_s = 0.0;
  double airlight = 0.0;
};

HazeSample apply_haze(const ImageBuffer& clean, const ScalarField& depth, double beta_s,
                      double airlight);

struct HazeInversion {
  ImageBuffer clean;                  // clamped to [0, 1]; flagged pixels copy the input
  std::vector<std::uint8_t> flagged;  // 1 where t < t_min
  std::size_t flagged_count = 0;
};

HazeInversion invert_haze(const ImageBuffer& hazy, const ScalarField& depth, double beta_s,
                          double airlight, double t_min = 0.05);

/// Procedural depth normalized to [0, 1]; deterministic in (kind, size, seed).
ScalarField make_depth(DepthKind kind, int height, int width, std::uint64_t seed);
/// Distance from (cy, cx) divided by the distance to the farthest corner.
ScalarField radial_depth(int height, int width, double cy, double cx);

/// Deterministic synthetic clean scene: a two-color gradient backdrop with
/// randomly placed, lightly textured rectangles and ellipses in [0, 1].
ImageBuffer procedural_scene(int height, int width, std::uint64_t seed);

struct ManifestEntry {
  int index = 0;
  std::string clean_path;  // relative to the dataset directory
  std::string hazy_path;
  std::string depth_kind;
  double beta_s = 0.0;
  double airlight = 0.0;
  std::uint64_t seed = 0;  // depth-map seed
  int crop_x = 0;
  int crop_y = 0;
  int crop_w = 0;
  int crop_h = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetOptions {
  std::filesystem::path clean_dir;
  std::filesystem::path out_dir;
  int count = 0;
  std::pair<double, double> beta_range{0.4, 1.6};
  std::pair<double, double> airlight_range{0.7, 1.0};
  std::vector<DepthKind> depth_kinds{DepthKind::Ramp, DepthKind::Radial, DepthKind::SmoothNoise};
  std::uint64_t seed = 0;
  int crop = 0;  // square crop edge; 0 keeps whole source images

  void validate() const;
};

inline constexpr const char* kManifestName = "manifest.jsonl";

/// Writes clean_NNNNN.png / hazy_NNNNN.png pairs and manifest.jsonl into
/// out_dir and returns the manifest records.
std::vector<ManifestEntry> build_dataset(const DatasetOptions& options);

std::string manifest_line(const ManifestEntry& e);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Recomputes the hazy image from the stored clean PNG and the manifest
/// parameters; returns the max abs difference to the stored hazy PNG.
double verify_manifest_entry(const std::filesystem::path& dataset_dir, const ManifestEntry& e);

/// Sorted PNG files of a directory.
std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir);

}  // namespace tnet
