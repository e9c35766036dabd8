#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tnet/stack.hpp"

namespace tnet {

/// 0.5 e^2 for e < 1, e - 0.5 otherwise. Throws DomainError for e < 0.
double smooth_l1_pointwise(double e);

enum class ExtractorKind { FixedRandomPyramid, PretrainedVgg16 };

std::string to_string(ExtractorKind kind);
ExtractorKind parse_extractor_kind(const std::string& name);

struct FeatureExtractorSpec {
  ExtractorKind kind = ExtractorKind::FixedRandomPyramid;
  std::array<int, 3> widths{64, 128, 256};  // channels of the three feature levels
  std::uint64_t seed = 0x5eed;              // fixed-random-pyramid weights
  std::filesystem::path weights;            // VGG-16 archive for the pretrained kind

  friend bool operator==(const FeatureExtractorSpec&, const FeatureExtractorSpec&) = default;
};

struct LevelDescriptor {
  int channels = 0;
  int spatial_divisor = 1;
};

/// Frozen three-level feature extractor consuming network-domain images.
///
/// fixed-random-pyramid: three stages of seeded 3x3 conv + ReLU (the level
/// feature) followed by 2x average pooling; inputs mapped to [0, 1].
///
/// pretrained-vgg16: conv1_1..conv3_3 of VGG-16 with features taken at
/// relu1_2, relu2_2, relu3_3; inputs mapped to [0, 1] and standardized with
/// the ImageNet channel statistics. Weights come from a tensor archive with
/// torchvision names features.{0,2,5,7,10,12,14}.{weight,bias}.
template <typename T>
class FeatureExtractor {
 public:
  static std::shared_ptr<const FeatureExtractor> create(const FeatureExtractorSpec& spec);

  [[nodiscard]] const FeatureExtractorSpec& spec() const { return spec_; }
  [[nodiscard]] std::array<LevelDescriptor, 3> levels() const;
  std::array<Var<T>, 3> features(const Var<T>& image) const;

 private:
  explicit FeatureExtractor(FeatureExtractorSpec spec) : spec_(std::move(spec)) {}

  struct Conv {
    Var<T> weight;
    Var<T> bias;
  };
  FeatureExtractorSpec spec_;
  std::vector<std::vector<Conv>> stages_;  // convolutions per level
};

struct LossConfig {
  double lambda = 0.04;
  int stages = 3;
  FeatureExtractorSpec extractor;

  void validate() const;
};

/// Mean over pixels of the channel sum of smooth-L1(|pred - gt|), averaged over the batch.
template <typename T>
Var<T> stage_smooth_l1(const Var<T>& pred, const Var<T>& gt);

/// Sum over the three extractor levels of ||F_j(pred) - F_j(gt)||^2 / (C_j H_j W_j).
template <typename T>
Var<T> stage_perceptual(const Var<T>& pred, const Var<T>& gt, const FeatureExtractor<T>& extractor);

struct LossBreakdown {
  std::vector<double> smooth_l1;   // per stage
  std::vector<double> perceptual;  // per stage, unweighted
  double total = 0.0;
};

template <typename T>
struct TotalLoss {
  Var<T> value;
  LossBreakdown breakdown;
};

/// sum_k SL1_k + lambda * sum_k P_k over all stages.
template <typename T>
TotalLoss<T> total_loss(const StackOutput<T>& out, const Var<T>& gt, const LossConfig& cfg,
                        const FeatureExtractor<T>& extractor);

}  // namespace tnet
