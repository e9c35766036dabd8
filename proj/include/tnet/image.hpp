#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tnet/tensor.hpp"

namespace tnet {

enum class ValueDomain {
  Unit,     // [0, 1], storage and metrics
  Network,  // [-1, 1], network inputs and outputs
};

/// Interleaved H x W x 3 float image with a declared value domain.
struct ImageBuffer {
  int height = 0;
  int width = 0;
  ValueDomain domain = ValueDomain::Unit;
  std::vector<float> pixels;  // row-major, RGB interleaved

  ImageBuffer() = default;
  ImageBuffer(int h, int w, ValueDomain d = ValueDomain::Unit, float fill = 0.f);

  float& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  [[nodiscard]] float at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  [[nodiscard]] bool same_size(const ImageBuffer& o) const {
    return height == o.height && width == o.width;
  }
};

/// [0,1] -> [-1,1] (x * 2 - 1). No-op on network-domain input.
ImageBuffer to_network_domain(const ImageBuffer& img);
/// [-1,1] -> [0,1] ((x + 1) / 2), clamped to [0, 1].
ImageBuffer to_unit_domain(const ImageBuffer& img);
ImageBuffer clamp_unit(const ImageBuffer& img);

/// Packs images of equal size into an (N, 3, H, W) tensor, keeping values.
template <typename T>
Tensor<T> to_tensor(const std::vector<ImageBuffer>& images);
template <typename T>
Tensor<T> to_tensor(const ImageBuffer& image) {
  return to_tensor<T>(std::vector<ImageBuffer>{image});
}
/// Extracts sample n of a 3-channel tensor.
template <typename T>
ImageBuffer from_tensor(const Tensor<T>& t, int n, ValueDomain domain);

ImageBuffer crop(const ImageBuffer& img, int y, int x, int h, int w);
ImageBuffer flip_horizontal(const ImageBuffer& img);
/// Mirror padding (no edge repeat) up to the given size.
ImageBuffer reflect_pad(const ImageBuffer& img, int height, int width);

/// 8-bit RGB PNG I/O. Grayscale and alpha inputs are converted to RGB.
ImageBuffer read_png(const std::filesystem::path& path);
/// Writes a unit-domain image (clamped, rounded to nearest 8-bit level).
void write_png(const std::filesystem::path& path, const ImageBuffer& img);

/// Round-to-nearest 8-bit quantization, as write_png stores it.
std::uint8_t quantize8(float v);

}  // namespace tnet
