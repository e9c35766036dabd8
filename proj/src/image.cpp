#include "tnet/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace tnet {

ImageBuffer::ImageBuffer(int h, int w, ValueDomain d, float fill)
    : height(h), width(w), domain(d), pixels(static_cast<std::size_t>(h) * w * 3, fill) {
  if (h < 1 || w < 1) throw ShapeError("image dimensions must be >= 1");
}

ImageBuffer to_network_domain(const ImageBuffer& img) {
  if (img.domain == ValueDomain::Network) return img;
  ImageBuffer out = img;
  out.domain = ValueDomain::Network;
  for (float& v : out.pixels) v = v * 2.f - 1.f;
  return out;
}

ImageBuffer to_unit_domain(const ImageBuffer& img) {
  ImageBuffer out = img;
  if (img.domain == ValueDomain::Network) {
    for (float& v : out.pixels) v = (v + 1.f) * 0.5f;
  }
  out.domain = ValueDomain::Unit;
  return clamp_unit(out);
}

ImageBuffer clamp_unit(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (float& v : out.pixels) v = std::clamp(v, 0.f, 1.f);
  return out;
}

template <typename T>
Tensor<T> to_tensor(const std::vector<ImageBuffer>& images) {
  if (images.empty()) throw ShapeError("to_tensor: no images");
  const int h = images.front().height;
  const int w = images.front().width;
  Tensor<T> t({static_cast<int>(images.size()), 3, h, w});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const ImageBuffer& img = images[n];
    if (img.height != h || img.width != w) throw ShapeError("to_tensor: images differ in size");
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) t.at(static_cast<int>(n), c, y, x) = img.at(y, x, c);
      }
    }
  }
  return t;
}

template <typename T>
ImageBuffer from_tensor(const Tensor<T>& t, int n, ValueDomain domain) {
  const Shape& s = t.shape();
  if (s.c != 3) throw ShapeError("from_tensor: expected 3 channels, got " + s.str());
  ImageBuffer img(s.h, s.w, domain);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) img.at(y, x, c) = static_cast<float>(t.at(n, c, y, x));
    }
  }
  return img;
}

ImageBuffer crop(const ImageBuffer& img, int y, int x, int h, int w) {
  if (y < 0 || x < 0 || h < 1 || w < 1 || y + h > img.height || x + w > img.width) {
    throw ShapeError("crop window outside image");
  }
  ImageBuffer out(h, w, img.domain);
  for (int r = 0; r < h; ++r) {
    const float* src = &img.pixels[(static_cast<std::size_t>(y + r) * img.width + x) * 3];
    std::copy_n(src, static_cast<std::size_t>(w) * 3, &out.pixels[static_cast<std::size_t>(r) * w * 3]);
  }
  return out;
}

ImageBuffer flip_horizontal(const ImageBuffer& img) {
  ImageBuffer out(img.height, img.width, img.domain);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
    }
  }
  return out;
}

namespace {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

ImageBuffer reflect_pad(const ImageBuffer& img, int height, int width) {
  if (height < img.height || width < img.width) throw ShapeError("reflect_pad: target smaller");
  ImageBuffer out(height, width, img.domain);
  for (int y = 0; y < height; ++y) {
    const int sy = reflect_index(y, img.height);
    for (int x = 0; x < width; ++x) {
      const int sx = reflect_index(x, img.width);
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

std::uint8_t quantize8(float v) {
  const float s = std::clamp(v, 0.f, 1.f) * 255.f;
  return static_cast<std::uint8_t>(std::lround(s));
}

ImageBuffer read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG '" + path.string() + "': " + msg);
  }
  ImageBuffer out(static_cast<int>(image.height), static_cast<int>(image.width));
  for (std::size_t i = 0; i < buffer.size(); ++i) out.pixels[i] = buffer[i] / 255.f;
  return out;
}

void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
  const ImageBuffer unit = img.domain == ValueDomain::Unit ? img : to_unit_domain(img);
  std::vector<std::uint8_t> buffer(unit.pixels.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = quantize8(unit.pixels[i]);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(unit.width);
  image.height = static_cast<png_uint_32>(unit.height);
  image.format = PNG_FORMAT_RGB;
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  if (!png_image_write_to_stdio(&image, file.get(), 0, buffer.data(), 0, nullptr)) {
    throw IoError("cannot encode PNG '" + path.string() + "': " + image.message);
  }
}

template Tensor<float> to_tensor<float>(const std::vector<ImageBuffer>&);
template Tensor<double> to_tensor<double>(const std::vector<ImageBuffer>&);
template ImageBuffer from_tensor<float>(const Tensor<float>&, int, ValueDomain);
template ImageBuffer from_tensor<double>(const Tensor<double>&, int, ValueDomain);

}  // namespace tnet
