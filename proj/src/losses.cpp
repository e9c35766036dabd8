#include "tnet/losses.hpp"

#include <cmath>

#include "tnet/archive.hpp"

namespace tnet {

double smooth_l1_pointwise(double e) {
  if (e < 0.0 || std::isnan(e)) throw DomainError("smooth-L1 is defined for e >= 0");
  return e < 1.0 ? 0.5 * e * e : e - 0.5;
}

std::string to_string(ExtractorKind kind) {
  return kind == ExtractorKind::PretrainedVgg16 ? "pretrained-vgg16" : "fixed-random-pyramid";
}

ExtractorKind parse_extractor_kind(const std::string& name) {
  if (name == "pretrained-vgg16") return ExtractorKind::PretrainedVgg16;
  if (name == "fixed-random-pyramid") return ExtractorKind::FixedRandomPyramid;
  throw ConfigError("unknown feature extractor '" + name +
                    "' (expected pretrained-vgg16 or fixed-random-pyramid)");
}

void LossConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (stages < 1) throw ConfigError("loss stage count must be >= 1");
}

namespace {

// torchvision indices of conv1_1..conv3_3 in vgg16.features, grouped by level.
const std::array<std::vector<int>, 3> kVggConvs{{{0, 2}, {5, 7}, {10, 12, 14}}};
const std::array<int, 3> kVggWidths{64, 128, 256};
const std::vector<double> kImageNetMean{0.485, 0.456, 0.406};
const std::vector<double> kImageNetStd{0.229, 0.224, 0.225};

}  // namespace

template <typename T>
std::shared_ptr<const FeatureExtractor<T>> FeatureExtractor<T>::create(
    const FeatureExtractorSpec& spec) {
  std::shared_ptr<FeatureExtractor<T>> fx(new FeatureExtractor<T>(spec));
  if (spec.kind == ExtractorKind::FixedRandomPyramid) {
    Rng rng(spec.seed);
    int in = 3;
    for (int level = 0; level < 3; ++level) {
      const int out = spec.widths[level];
      if (out < 1) throw ConfigError("extractor widths must be >= 1");
      // He-uniform so activations keep their scale through the frozen stack.
      const double bound = std::sqrt(6.0 / (in * 9));
      Tensor<T> w({out, in, 3, 3});
      for (T& v : w.vec()) v = static_cast<T>(static_cast<float>(rng.uniform(-bound, bound)));
      fx->stages_.push_back({{Var<T>(std::move(w)), Var<T>(Tensor<T>({1, out, 1, 1}))}});
      in = out;
    }
    return fx;
  }

  if (spec.weights.empty() || !std::filesystem::exists(spec.weights)) {
    throw IoError("pretrained VGG-16 weights not found" +
                  (spec.weights.empty() ? std::string() : " at '" + spec.weights.string() + "'") +
                  "; convert them with tools/export_vgg16.py or use the "
                  "fixed-random-pyramid extractor instead");
  }
  const Archive archive = load_archive(spec.weights);
  fx->spec_.widths = kVggWidths;
  for (const auto& level : kVggConvs) {
    std::vector<Conv> convs;
    for (int idx : level) {
      const std::string base = "features." + std::to_string(idx);
      convs.push_back({Var<T>(archive.get(base + ".weight").template cast<T>()),
                       Var<T>(archive.get(base + ".bias").template cast<T>())});
    }
    fx->stages_.push_back(std::move(convs));
  }
  return fx;
}

template <typename T>
std::array<LevelDescriptor, 3> FeatureExtractor<T>::levels() const {
  return {{{spec_.widths[0], 1}, {spec_.widths[1], 2}, {spec_.widths[2], 4}}};
}

template <typename T>
std::array<Var<T>, 3> FeatureExtractor<T>::features(const Var<T>& image) const {
  if (image.shape().c != 3) throw ShapeError("feature extractor expects 3-channel images");
  std::vector<T> mul(3), shift(3);
  for (int c = 0; c < 3; ++c) {
    // [-1, 1] -> [0, 1], then optional standardization.
    double m = 0.5;
    double s = 0.5;
    if (spec_.kind == ExtractorKind::PretrainedVgg16) {
      m /= kImageNetStd[c];
      s = (s - kImageNetMean[c]) / kImageNetStd[c];
    }
    mul[c] = static_cast<T>(m);
    shift[c] = static_cast<T>(s);
  }
  Var<T> h = ops::channel_affine(image, mul, shift);
  std::array<Var<T>, 3> out;
  for (int level = 0; level < 3; ++level) {
    if (level > 0) {
      h = spec_.kind == ExtractorKind::PretrainedVgg16 ? ops::max_pool2(h) : ops::avg_pool2(h);
    }
    for (const auto& conv : stages_[level]) h = ops::relu(ops::conv2d(h, conv.weight, conv.bias, 1, 1));
    out[level] = h;
  }
  return out;
}

template <typename T>
Var<T> stage_smooth_l1(const Var<T>& pred, const Var<T>& gt) {
  if (pred.shape().c != 3) throw ShapeError("smooth-L1 stage loss expects 3-channel images");
  return ops::smooth_l1_loss(pred, gt);
}

namespace {

template <typename T>
Var<T> perceptual_from_features(const std::array<Var<T>, 3>& a, const std::array<Var<T>, 3>& b) {
  Var<T> total = ops::normalized_sq_distance(a[0], b[0]);
  for (int j = 1; j < 3; ++j) total = ops::add(total, ops::normalized_sq_distance(a[j], b[j]));
  return total;
}

}  // namespace

template <typename T>
Var<T> stage_perceptual(const Var<T>& pred, const Var<T>& gt, const FeatureExtractor<T>& extractor) {
  if (pred.shape() != gt.shape()) {
    throw ShapeError("perceptual loss: " + pred.shape().str() + " vs " + gt.shape().str());
  }
  return perceptual_from_features(extractor.features(pred), extractor.features(gt));
}

template <typename T>
TotalLoss<T> total_loss(const StackOutput<T>& out, const Var<T>& gt, const LossConfig& cfg,
                        const FeatureExtractor<T>& extractor) {
  cfg.validate();
  if (static_cast<int>(out.per_stage.size()) != cfg.stages) {
    throw ConfigError("loss configured for " + std::to_string(cfg.stages) +
                      " stages but the model produced " + std::to_string(out.per_stage.size()));
  }
  std::array<Var<T>, 3> gt_features;
  {
    NoGradGuard guard;
    gt_features = extractor.features(gt);
  }
  TotalLoss<T> result;
  Var<T> sl1_sum;
  Var<T> perc_sum;
  for (const auto& y : out.per_stage) {
    const Var<T> sl1 = stage_smooth_l1(y, gt);
    if (y.shape() != gt.shape()) throw ShapeError("stage output and ground truth differ in shape");
    const Var<T> perc = perceptual_from_features(extractor.features(y), gt_features);
    result.breakdown.smooth_l1.push_back(static_cast<double>(sl1.value()[0]));
    result.breakdown.perceptual.push_back(static_cast<double>(perc.value()[0]));
    sl1_sum = sl1_sum.defined() ? ops::add(sl1_sum, sl1) : sl1;
    perc_sum = perc_sum.defined() ? ops::add(perc_sum, perc) : perc;
  }
  result.value = ops::add(sl1_sum, ops::scale(perc_sum, static_cast<T>(cfg.lambda)));
  result.breakdown.total = static_cast<double>(result.value.value()[0]);
  return result;
}

template class FeatureExtractor<float>;
template class FeatureExtractor<double>;
template Var<float> stage_smooth_l1<float>(const Var<float>&, const Var<float>&);
template Var<double> stage_smooth_l1<double>(const Var<double>&, const Var<double>&);
template Var<float> stage_perceptual<float>(const Var<float>&, const Var<float>&,
                                            const FeatureExtractor<float>&);
template Var<double> stage_perceptual<double>(const Var<double>&, const Var<double>&,
                                              const FeatureExtractor<double>&);
template TotalLoss<float> total_loss<float>(const StackOutput<float>&, const Var<float>&,
                                            const LossConfig&, const FeatureExtractor<float>&);
template TotalLoss<double> total_loss<double>(const StackOutput<double>&, const Var<double>&,
                                              const LossConfig&, const FeatureExtractor<double>&);

}  // namespace tnet
