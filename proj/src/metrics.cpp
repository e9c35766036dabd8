#include "tnet/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tnet {

namespace {

void require_same_size(const ImageBuffer& a, const ImageBuffer& b, const char* metric) {
  if (!a.same_size(b)) {
    throw ShapeError(std::string(metric) + ": image sizes differ (" + std::to_string(a.height) +
                     "x" + std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                     std::to_string(b.width) + ")");
  }
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 1.0) * (0.01 * 1.0);
constexpr double kC2 = (0.03 * 1.0) * (0.03 * 1.0);

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> g{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[i] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

// Separable valid-region filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::array<double, kWindow>& g) {
  const int oh = h - kWindow + 1;
  const int ow = w - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * src[static_cast<std::size_t>(y) * w + x + k];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const ImageBuffer& pred, const ImageBuffer& gt) {
  require_same_size(pred, gt, "psnr");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.pixels.size(); ++i) {
    const double d = static_cast<double>(pred.pixels[i]) - gt.pixels[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(pred.pixels.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const ImageBuffer& pred, const ImageBuffer& gt) {
  require_same_size(pred, gt, "ssim");
  if (std::min(pred.height, pred.width) < kWindow) {
    throw ShapeError("ssim: image " + std::to_string(pred.height) + "x" +
                     std::to_string(pred.width) + " is smaller than the 11x11 window");
  }
  const auto g = gaussian_window();
  const int h = pred.height;
  const int w = pred.width;
  const std::size_t n = static_cast<std::size_t>(h) * w;
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> a(n), b(n), aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = pred.pixels[i * 3 + c];
      b[i] = gt.pixels[i * 3 + c];
      aa[i] = a[i] * a[i];
      bb[i] = b[i] * b[i];
      ab[i] = a[i] * b[i];
    }
    const auto mu_a = filter_valid(a, h, w, g);
    const auto mu_b = filter_valid(b, h, w, g);
    const auto e_aa = filter_valid(aa, h, w, g);
    const auto e_bb = filter_valid(bb, h, w, g);
    const auto e_ab = filter_valid(ab, h, w, g);
    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i];
      const double mb = mu_b[i];
      const double va = e_aa[i] - ma * ma;
      const double vb = e_bb[i] - mb * mb;
      const double cov = e_ab[i] - ma * mb;
      acc += ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
             ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    }
    total += acc / static_cast<double>(mu_a.size());
  }
  return total / 3.0;
}

void MetricReport::add(ImageScore score) {
  per_image.push_back(std::move(score));
  finalize();
}

void MetricReport::finalize() {
  count = per_image.size();
  mean_psnr = 0.0;
  mean_ssim = 0.0;
  for (const auto& s : per_image) {
    mean_psnr += s.psnr_db;
    mean_ssim += s.ssim;
  }
  if (count > 0) {
    mean_psnr /= static_cast<double>(count);
    mean_ssim /= static_cast<double>(count);
  }
}

std::string MetricReport::table() const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-40s %10s %8s\n", "image", "PSNR(dB)", "SSIM");
  os << line;
  for (const auto& s : per_image) {
    std::snprintf(line, sizeof line, "%-40s %10.4f %8.5f\n", s.name.c_str(), s.psnr_db, s.ssim);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-40s %10.4f %8.5f\n",
                ("mean (" + std::to_string(count) + " images)").c_str(), mean_psnr, mean_ssim);
  os << line;
  return os.str();
}

std::string MetricReport::jsonl() const {
  std::string out;
  for (const auto& s : per_image) {
    out += nlohmann::json{{"name", s.name}, {"psnr_db", s.psnr_db}, {"ssim", s.ssim}}.dump();
    out += '\n';
  }
  out += nlohmann::json{{"aggregate", true},
                        {"count", count},
                        {"mean_psnr_db", mean_psnr},
                        {"mean_ssim", mean_ssim}}
             .dump();
  out += '\n';
  return out;
}

void MetricReport::write(const std::filesystem::path& table_path,
                         const std::filesystem::path& jsonl_path) const {
  std::ofstream t(table_path);
  std::ofstream j(jsonl_path);
  if (!t || !j) throw IoError("cannot write metric report");
  t << table();
  j << jsonl();
}

ImageScore score_image(const std::string& name, const ImageBuffer& pred, const ImageBuffer& gt) {
  const ImageBuffer p = to_unit_domain(pred);
  const ImageBuffer g = to_unit_domain(gt);
  return {name, psnr(p, g), ssim(p, g)};
}

}  // namespace tnet
