#pragma once

// Reusable building blocks of the dehazing network: residual dense block,
// down/up sampling blocks, position/channel/dual attention and per-channel
// weighted fusion of skip features.

#include <string>
#include <vector>

#include "tnet/ops.hpp"
#include "tnet/params.hpp"

namespace tnet {

struct RdbSpec {
  int channels = 16;
  int growth = 16;
  int layers = 5;  // layers - 1 growth convolutions followed by one 1x1 projection

  void validate() const;
  /// Channel count entering the final 1x1 projection.
  [[nodiscard]] int projection_inputs() const { return channels + (layers - 1) * growth; }
};

template <typename T>
struct ConvParams {
  Var<T> weight;
  Var<T> bias;
};

template <typename T>
struct RdbParams {
  RdbSpec spec;
  std::vector<ConvParams<T>> convs;  // size == spec.layers
};

/// 3x3 stride-2 convolution (C -> C) + ReLU, then 1x1 convolution (C -> 2C).
template <typename T>
struct DownParams {
  int channels = 0;
  ConvParams<T> spatial;
  ConvParams<T> project;
};

/// 4x4 stride-2 transposed convolution (C -> C) + ReLU, then 1x1 (C -> C/2).
template <typename T>
struct UpParams {
  int channels = 0;
  ConvParams<T> spatial;
  ConvParams<T> project;
};

/// Learnable scales on the two attention increments, zero at init.
template <typename T>
struct AttentionState {
  Var<T> gamma_pos;
  Var<T> gamma_chan;
};

/// Per-channel weights for one skip level; both vectors start at ones.
template <typename T>
struct FusionWeights {
  int level = 0;
  Var<T> alpha;
  Var<T> beta;
};

// Registration. Names are "<prefix>.<part>.weight|bias" etc.; see README.
template <typename T>
ConvParams<T> make_conv(ParameterStore<T>& store, const std::string& prefix, int in, int out,
                        int k, Rng& rng);
template <typename T>
ConvParams<T> make_conv_transpose(ParameterStore<T>& store, const std::string& prefix, int in,
                                  int out, int k, Rng& rng);
template <typename T>
RdbParams<T> make_rdb(ParameterStore<T>& store, const std::string& prefix, const RdbSpec& spec,
                      Rng& rng);
template <typename T>
DownParams<T> make_down(ParameterStore<T>& store, const std::string& prefix, int channels,
                        Rng& rng);
template <typename T>
UpParams<T> make_up(ParameterStore<T>& store, const std::string& prefix, int channels, Rng& rng);
template <typename T>
AttentionState<T> make_attention(ParameterStore<T>& store, const std::string& prefix);
template <typename T>
FusionWeights<T> make_fusion(ParameterStore<T>& store, const std::string& prefix, int level,
                             int channels);

// Forward passes.
template <typename T>
Var<T> rdb_forward(const Var<T>& x, const RdbParams<T>& p);
template <typename T>
Var<T> downsample_forward(const Var<T>& x, const DownParams<T>& p);
template <typename T>
Var<T> upsample_forward(const Var<T>& x, const UpParams<T>& p);
template <typename T>
Var<T> position_attention(const Var<T>& x, const Var<T>& gamma_pos);
template <typename T>
Var<T> channel_attention(const Var<T>& x, const Var<T>& gamma_chan);
/// position_attention(x) + channel_attention(x).
template <typename T>
Var<T> dual_attention_forward(const Var<T>& x, const AttentionState<T>& state);
template <typename T>
Var<T> weighted_fuse(const Var<T>& lateral, const Var<T>& vertical, const FusionWeights<T>& w);

}  // namespace tnet
