#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tnet/image.hpp"

namespace tnet {

/// PSNR reported for identical images (MSE == 0).
inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) over all pixels and channels of two [0, 1] images.
double psnr(const ImageBuffer& pred, const ImageBuffer& gt);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1, valid-region mean per channel, averaged over
/// the three channels.
double ssim(const ImageBuffer& pred, const ImageBuffer& gt);

struct ImageScore {
  std::string name;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<ImageScore> per_image;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::size_t count = 0;

  void add(ImageScore score);
  /// Recomputes the aggregates as arithmetic means of per_image.
  void finalize();

  [[nodiscard]] std::string table() const;
  /// One JSON object per line: each image, then {"aggregate": true, ...}.
  [[nodiscard]] std::string jsonl() const;
  void write(const std::filesystem::path& table_path, const std::filesystem::path& jsonl_path) const;
};

/// Scores a network-domain or unit-domain prediction after clamping to [0, 1].
ImageScore score_image(const std::string& name, const ImageBuffer& pred, const ImageBuffer& gt);

}  // namespace tnet
