#pragma once

// The T-Net encoder/decoder backbone.
//
// Levels run 0..m with base_channels * 2^i channels at level i and H / 2^i
// spatial size. Encoder: conv_in, then for each level a downsampling block
// followed by that level's encoder trunk RDBs (none at the bottleneck).
// Bottleneck: dual attention. Decoder: upsample, fuse with the lateral path
// of the same level (RDB for levels >= 1, identity at level 0), run the
// decoder trunk RDBs, upsample again, ... and finish with conv_out.

#include <cstdint>
#include <vector>

#include "tnet/blocks.hpp"

namespace tnet {

struct TNetConfig {
  int m = 4;              // down/up pairs
  int n = 3;              // trunk RDB pairs
  int base_channels = 16;
  int in_channels = 6;
  int out_channels = 3;
  int rdb_growth = 16;
  int rdb_layers = 5;

  void validate() const;
  [[nodiscard]] int level_channels(int level) const { return base_channels << level; }
  /// Channels for levels 0..m.
  [[nodiscard]] std::vector<int> channel_ladder() const;
  /// Number of encoder (= decoder) trunk RDBs at each level 0..m. Pairs fill
  /// levels m-1, m-2, ..., 1 round-robin, deepest first.
  [[nodiscard]] std::vector<int> trunk_rdbs_per_level() const;
  [[nodiscard]] int spatial_multiple() const { return 1 << m; }
  [[nodiscard]] RdbSpec rdb_spec(int level) const {
    return {level_channels(level), rdb_growth, rdb_layers};
  }

  friend bool operator==(const TNetConfig&, const TNetConfig&) = default;
};

/// Shapes observed during a forward pass; every entry is checked against the
/// configuration's level arithmetic as it is produced.
struct ForwardTrace {
  std::vector<Shape> encoder;  // F_0..F_m
  Shape bottleneck;            // dual attention output
  std::vector<Shape> fused;    // fused features, level m-1 down to 0
};

template <typename T>
class TNet {
 public:
  TNet(const TNetConfig& config, std::uint64_t seed, const std::string& prefix = "");

  [[nodiscard]] const TNetConfig& config() const { return config_; }
  ParameterStore<T>& parameters() { return store_; }
  [[nodiscard]] const ParameterStore<T>& parameters() const { return store_; }
  [[nodiscard]] std::size_t parameter_count() const { return store_.scalar_count(); }

  /// Checks channel count and divisibility by 2^m; throws ShapeError naming
  /// the first level whose spatial size would be odd.
  void check_input(const Shape& s) const;

  Var<T> forward(const Var<T>& x, ForwardTrace* trace = nullptr) const;

  // Block access, mostly for tests.
  [[nodiscard]] const std::vector<FusionWeights<T>>& fusion() const { return fuse_; }
  [[nodiscard]] const AttentionState<T>& attention() const { return attention_; }

 private:
  TNetConfig config_;
  ParameterStore<T> store_;
  ConvParams<T> conv_in_;
  ConvParams<T> conv_out_;
  std::vector<DownParams<T>> down_;                 // index i-1 maps level i-1 -> i
  std::vector<UpParams<T>> up_;                     // index i-1 maps level i -> i-1
  std::vector<std::vector<RdbParams<T>>> enc_rdb_;  // per level 0..m
  std::vector<std::vector<RdbParams<T>>> dec_rdb_;  // per level 0..m
  std::vector<RdbParams<T>> lateral_;               // index i-1 for level i = 1..m-1
  AttentionState<T> attention_;
  std::vector<FusionWeights<T>> fuse_;              // per level 0..m-1
};

}  // namespace tnet
