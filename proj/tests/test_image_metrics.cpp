#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "tnet/errors.hpp"
#include "tnet/image.hpp"
#include "tnet/metrics.hpp"

using namespace tnet;
using namespace tnet::testing;

namespace {

ImageBuffer ramp_image(int h, int w, float scale = 0.9f) {
  ImageBuffer img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = scale * static_cast<float>((y * w + x + c) % 37) / 36.f;
  return img;
}

}  // namespace

TEST_CASE("domain mapping") {
  ImageBuffer img(1, 2);
  img.pixels = {0, 0.25f, 0.5f, 0.75f, 1, 1};
  const auto n = to_network_domain(img);
  CHECK(n.domain == ValueDomain::Network);
  CHECK(n.pixels[1] == -0.5f);
  CHECK(n.pixels[4] == 1.f);
  const auto back = to_unit_domain(n);
  CHECK(back.pixels == img.pixels);
  ImageBuffer wild(1, 1, ValueDomain::Network);
  wild.pixels = {-3, 0, 5};
  CHECK(to_unit_domain(wild).pixels == std::vector<float>{0, 0.5f, 1});
}

TEST_CASE("tensor packing round trip") {
  const auto img = ramp_image(3, 5);
  const auto t = to_tensor<float>(std::vector<ImageBuffer>{img, img});
  CHECK(t.shape() == Shape{2, 3, 3, 5});
  CHECK(t.at(1, 2, 1, 4) == img.at(1, 4, 2));
  CHECK(from_tensor(t, 1, ValueDomain::Unit).pixels == img.pixels);
  CHECK_THROWS_AS(to_tensor<float>(std::vector<ImageBuffer>{img, ramp_image(3, 4)}), ShapeError);
}

TEST_CASE("crop, flip and mirror padding") {
  const auto img = ramp_image(4, 5);
  const auto c = crop(img, 1, 2, 2, 3);
  CHECK(c.at(0, 0, 1) == img.at(1, 2, 1));
  CHECK(c.at(1, 2, 0) == img.at(2, 4, 0));
  CHECK_THROWS_AS(crop(img, 3, 0, 2, 2), ShapeError);
  const auto f = flip_horizontal(img);
  CHECK(f.at(2, 0, 2) == img.at(2, 4, 2));
  const auto p = reflect_pad(img, 7, 8);
  CHECK(p.height == 7);
  // mirror without edge repeat: row 4 -> 2, row 5 -> 1, col 5 -> 3, col 7 -> 1
  CHECK(p.at(4, 0, 0) == img.at(2, 0, 0));
  CHECK(p.at(5, 5, 1) == img.at(1, 3, 1));
  CHECK(p.at(6, 7, 2) == img.at(0, 1, 2));
  CHECK(crop(p, 0, 0, 4, 5).pixels == img.pixels);
}

TEST_CASE("PNG round trip is exact for 8-bit levels") {
  const auto dir = temp_dir("png");
  ImageBuffer img(3, 4);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<float>((i * 23) % 256) / 255.f;
  write_png(dir / "a.png", img);
  const auto back = read_png(dir / "a.png");
  CHECK(back.height == 3);
  CHECK(back.width == 4);
  CHECK(back.pixels == img.pixels);
  CHECK(quantize8(0.5f) == 128);
  CHECK(quantize8(-1.f) == 0);
  CHECK(quantize8(2.f) == 255);
  CHECK_THROWS_AS(read_png(dir / "missing.png"), IoError);
}

TEST_CASE("PSNR closed forms") {
  const auto gt = ramp_image(16, 16);
  ImageBuffer pred = gt;
  for (float& v : pred.pixels) v += 0.1f;
  CHECK(std::abs(psnr(pred, gt) - 20.0) < 1e-3);
  CHECK(psnr(gt, gt) == kPsnrCap);
  ImageBuffer half = gt;
  for (float& v : half.pixels) v = v * 0.5f;
  double mse = 0;
  for (std::size_t i = 0; i < gt.pixels.size(); ++i) {
    const double d = static_cast<double>(half.pixels[i]) - gt.pixels[i];
    mse += d * d;
  }
  mse /= static_cast<double>(gt.pixels.size());
  CHECK(psnr(half, gt) == doctest::Approx(10 * std::log10(1 / mse)).epsilon(1e-12));
  CHECK_THROWS_AS(psnr(gt, ramp_image(16, 15)), ShapeError);
}

TEST_CASE("SSIM closed forms") {
  const auto gt = ramp_image(20, 20);
  CHECK(std::abs(ssim(gt, gt) - 1.0) < 1e-9);
  // Constant images: only the luminance term differs from 1.
  ImageBuffer a(12, 12, ValueDomain::Unit, 0.3f);
  ImageBuffer b(12, 12, ValueDomain::Unit, 0.6f);
  const double c1 = 0.01 * 0.01;
  const double x = 0.3f, y = 0.6f;
  CHECK(ssim(a, b) == doctest::Approx((2 * x * y + c1) / (x * x + y * y + c1)).epsilon(1e-9));
  ImageBuffer noisy = gt;
  for (std::size_t i = 0; i < noisy.pixels.size(); i += 7) noisy.pixels[i] = 1.f - noisy.pixels[i];
  const double s = ssim(noisy, gt);
  CHECK(s < 1.0);
  CHECK(s == doctest::Approx(ssim(gt, noisy)).epsilon(1e-12));
  CHECK_THROWS_AS(ssim(ImageBuffer(10, 20), ImageBuffer(10, 20)), ShapeError);
}

TEST_CASE("metric report") {
  MetricReport r;
  r.add({"a.png", 20.0, 0.5});
  r.add({"b.png", 30.0, 0.7});
  r.finalize();
  CHECK(r.count == 2);
  CHECK(r.mean_psnr == 25.0);
  CHECK(r.mean_ssim == doctest::Approx(0.6));
  const std::string j = r.jsonl();
  CHECK(j.find("a.png") < j.find("\"aggregate\""));
  CHECK(r.table().find("b.png") != std::string::npos);
  const auto score = score_image("n", to_network_domain(ramp_image(12, 12)), ramp_image(12, 12));
  CHECK(score.psnr_db == kPsnrCap);
}
