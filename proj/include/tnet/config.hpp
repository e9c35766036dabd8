#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "tnet/losses.hpp"
#include "tnet/stack.hpp"
#include "tnet/tnet.hpp"

namespace tnet {

struct TrainConfig {
  int batch_size = 14;
  int epochs = 2000;
  double lr0 = 1e-3;
  int halve_every = 20;
  int lr_floor_epoch = 80;
  double lr_floor = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int crop = 256;
  bool flip = true;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Everything a run needs; serialized as one flat key-value object.
struct RunConfig {
  TNetConfig net;
  StackConfig stack;
  TrainConfig train;
  LossConfig loss;

  /// Published training settings (crop 256, batch 14, 2000 epochs).
  static RunConfig paper();
  /// CPU-sized preset: crop 64, 60 epochs, batch 4.
  static RunConfig desk();
  /// Tiny network for smoke tests (m=2, n=1, base 4, K=1, crop 32).
  static RunConfig micro();
  /// Looks up "paper", "desk" or "micro".
  static RunConfig preset(const std::string& name);

  void validate() const;

  [[nodiscard]] nlohmann::ordered_json to_json() const;
  /// Overlays the keys of a flat object onto this config. Unknown keys and
  /// ill-typed values raise ConfigError.
  void apply(const nlohmann::json& flat);
  /// Overlays one "key=value" assignment (value parsed per key type).
  void apply_assignment(const std::string& key, const std::string& value);

  static RunConfig from_json(const nlohmann::json& flat, const RunConfig& base = RunConfig());
  static RunConfig load(const std::filesystem::path& path, const RunConfig& base = RunConfig());
};

}  // namespace tnet
