#pragma once

// Checkpoints are tensor archives (see archive.hpp) whose meta object holds
//   "format": "tnet-checkpoint", "version": 1,
//   "config": flat RunConfig echo (includes "stages"),
//   "concat_order": "x0,previous",
//   "state": {"epoch", "step", "adam_step", "rng_state", "best_psnr", "best_epoch"}
// and whose tensors are the model parameters under their registry names
// followed by optional Adam moments "adam.m/<name>" and "adam.v/<name>".

#include <filesystem>
#include <string>
#include <vector>

#include "tnet/archive.hpp"
#include "tnet/config.hpp"

namespace tnet {

struct TrainingState {
  int epoch = 0;  // completed epochs
  long long step = 0;
  long long adam_step = 0;
  std::string rng_state;
  double best_psnr = -1.0;  // < 0 until the first evaluation
  int best_epoch = -1;
};

struct AdamMoments {
  std::vector<Tensor<float>> m;
  std::vector<Tensor<float>> v;
};

void save_checkpoint(const std::filesystem::path& path, const StackTNet<float>& model,
                     const RunConfig& config, const TrainingState& state,
                     const AdamMoments* moments = nullptr);

struct LoadedCheckpoint {
  RunConfig config;
  TrainingState state;
  Archive archive;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Copies archived parameters into the model. Missing names or shape
/// differences raise ConfigError describing the first offending entry.
void restore_parameters(StackTNet<float>& model, const Archive& archive);

/// Reads Adam moments for the model's parameters; empty if absent.
AdamMoments restore_moments(const StackTNet<float>& model, const Archive& archive);

}  // namespace tnet
