#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnet/checkpoint.hpp"
#include "tnet/config.hpp"
#include "tnet/haze.hpp"
#include "tnet/image.hpp"
#include "tnet/metrics.hpp"

namespace tnet {

/// Raised when the training loss stops being finite.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// lr0 * 0.5^floor(epoch / halve_every) before lr_floor_epoch, lr_floor after.
double lr_at(int epoch, const TrainConfig& cfg);

struct ImagePair {
  ImageBuffer hazy;
  ImageBuffer clean;
};

struct CropWindow {
  int y = 0;
  int x = 0;
  int size = 0;
  bool flipped = false;
};

/// Same random crop window and horizontal-flip decision for both images,
/// then maps both to [-1, 1]. crop == 0 keeps the full frame.
ImagePair augment(const ImagePair& pair, int crop, bool flip, std::uint64_t seed,
                  CropWindow* window = nullptr);

/// Deterministic 10% hold-out membership by hash of the sample index.
bool is_holdout(int index);

/// Reflection-pads to a multiple of 2^m, runs `stages` stages (0 = model's
/// K), crops back and returns every stage output in [0, 1].
std::vector<ImageBuffer> dehaze_stages(const StackTNet<float>& model, const ImageBuffer& hazy,
                                       int stages = 0);
ImageBuffer dehaze(const StackTNet<float>& model, const ImageBuffer& hazy, int stages = 0);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  int steps = 0;
  double mean_loss = 0.0;
  double eval_psnr = 0.0;
  double eval_ssim = 0.0;
  double best_psnr = 0.0;
};

struct TrainOptions {
  std::filesystem::path dataset_dir;  // holds manifest.jsonl and the images
  std::filesystem::path out_dir;      // receives best.ckpt, last.ckpt, train_log.jsonl
  RunConfig config;
  std::filesystem::path resume;       // optional checkpoint to continue from
  std::function<void(const std::string&)> progress;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;   // epochs run by this call
  std::vector<double> step_losses;   // total loss per optimizer step, this call
  TrainingState state;
  double eval_hazy_psnr = 0.0;       // mean PSNR of the raw hazy eval inputs
  std::size_t train_samples = 0;
  std::size_t eval_samples = 0;
  std::filesystem::path best_path;
  std::filesystem::path last_path;
  std::filesystem::path log_path;
};

TrainResult train(const TrainOptions& options);

/// Mean PSNR/SSIM of the model's final stage on manifest samples.
MetricReport evaluate_model(const StackTNet<float>& model, const std::vector<ImagePair>& samples,
                            const std::vector<std::string>& names, int stages = 0);

}  // namespace tnet
