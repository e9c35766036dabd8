#include "tnet/blocks.hpp"

namespace tnet {

void RdbSpec::validate() const {
  if (channels < 1) throw ConfigError("RDB channels must be >= 1");
  if (growth < 1) throw ConfigError("RDB growth rate must be >= 1");
  if (layers < 2) throw ConfigError("RDB needs at least 2 layers (growth + 1x1 projection)");
}

template <typename T>
ConvParams<T> make_conv(ParameterStore<T>& store, const std::string& prefix, int in, int out,
                        int k, Rng& rng) {
  ConvParams<T> c;
  c.weight = store.add_uniform(prefix + ".weight", {out, in, k, k}, in * k * k, rng);
  c.bias = store.add_constant(prefix + ".bias", {1, out, 1, 1}, T(0));
  return c;
}

template <typename T>
ConvParams<T> make_conv_transpose(ParameterStore<T>& store, const std::string& prefix, int in,
                                  int out, int k, Rng& rng) {
  ConvParams<T> c;
  c.weight = store.add_uniform(prefix + ".weight", {in, out, k, k}, in * k * k, rng);
  c.bias = store.add_constant(prefix + ".bias", {1, out, 1, 1}, T(0));
  return c;
}

template <typename T>
RdbParams<T> make_rdb(ParameterStore<T>& store, const std::string& prefix, const RdbSpec& spec,
                      Rng& rng) {
  spec.validate();
  RdbParams<T> p;
  p.spec = spec;
  for (int l = 0; l + 1 < spec.layers; ++l) {
    p.convs.push_back(make_conv(store, prefix + ".conv" + std::to_string(l),
                                spec.channels + l * spec.growth, spec.growth, 3, rng));
  }
  p.convs.push_back(
      make_conv(store, prefix + ".fuse", spec.projection_inputs(), spec.channels, 1, rng));
  return p;
}

template <typename T>
DownParams<T> make_down(ParameterStore<T>& store, const std::string& prefix, int channels,
                        Rng& rng) {
  DownParams<T> p;
  p.channels = channels;
  p.spatial = make_conv(store, prefix + ".spatial", channels, channels, 3, rng);
  p.project = make_conv(store, prefix + ".project", channels, 2 * channels, 1, rng);
  return p;
}

template <typename T>
UpParams<T> make_up(ParameterStore<T>& store, const std::string& prefix, int channels, Rng& rng) {
  if (channels % 2 != 0) {
    throw ConfigError("upsampling block needs an even channel count, got " +
                      std::to_string(channels));
  }
  UpParams<T> p;
  p.channels = channels;
  p.spatial = make_conv_transpose(store, prefix + ".spatial", channels, channels, 4, rng);
  p.project = make_conv(store, prefix + ".project", channels, channels / 2, 1, rng);
  return p;
}

template <typename T>
AttentionState<T> make_attention(ParameterStore<T>& store, const std::string& prefix) {
  return {store.add_constant(prefix + ".gamma_pos", {1, 1, 1, 1}, T(0)),
          store.add_constant(prefix + ".gamma_chan", {1, 1, 1, 1}, T(0))};
}

template <typename T>
FusionWeights<T> make_fusion(ParameterStore<T>& store, const std::string& prefix, int level,
                             int channels) {
  return {level, store.add_constant(prefix + ".alpha", {1, channels, 1, 1}, T(1)),
          store.add_constant(prefix + ".beta", {1, channels, 1, 1}, T(1))};
}

template <typename T>
Var<T> rdb_forward(const Var<T>& x, const RdbParams<T>& p) {
  if (x.shape().c != p.spec.channels) {
    throw ConfigError("RDB expects " + std::to_string(p.spec.channels) + " channels, got " +
                      std::to_string(x.shape().c));
  }
  std::vector<Var<T>> features{x};
  for (std::size_t l = 0; l + 1 < p.convs.size(); ++l) {
    Var<T> in = features.size() == 1 ? x : ops::concat_channels(features);
    features.push_back(ops::relu(ops::conv2d(in, p.convs[l].weight, p.convs[l].bias, 1, 1)));
  }
  const auto& last = p.convs.back();
  Var<T> local = ops::conv2d(ops::concat_channels(features), last.weight, last.bias, 1, 0);
  return ops::add(x, local);
}

template <typename T>
Var<T> downsample_forward(const Var<T>& x, const DownParams<T>& p) {
  const Shape& s = x.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw ShapeError("downsampling needs even spatial size, got " + s.str());
  }
  if (s.c != p.channels) {
    throw ConfigError("downsampling block expects " + std::to_string(p.channels) +
                      " channels, got " + std::to_string(s.c));
  }
  Var<T> y = ops::relu(ops::conv2d(x, p.spatial.weight, p.spatial.bias, 2, 1));
  return ops::conv2d(y, p.project.weight, p.project.bias, 1, 0);
}

template <typename T>
Var<T> upsample_forward(const Var<T>& x, const UpParams<T>& p) {
  const Shape& s = x.shape();
  if (s.c % 2 != 0) {
    throw ConfigError("upsampling needs an even channel count, got " + std::to_string(s.c));
  }
  if (s.c != p.channels) {
    throw ConfigError("upsampling block expects " + std::to_string(p.channels) +
                      " channels, got " + std::to_string(s.c));
  }
  Var<T> y = ops::relu(ops::conv_transpose2d(x, p.spatial.weight, p.spatial.bias, 2, 1));
  return ops::conv2d(y, p.project.weight, p.project.bias, 1, 0);
}

template <typename T>
Var<T> position_attention(const Var<T>& x, const Var<T>& gamma_pos) {
  return ops::add(x, ops::scale_by(ops::position_attention_increment(x), gamma_pos));
}

template <typename T>
Var<T> channel_attention(const Var<T>& x, const Var<T>& gamma_chan) {
  return ops::add(x, ops::scale_by(ops::channel_attention_increment(x), gamma_chan));
}

template <typename T>
Var<T> dual_attention_forward(const Var<T>& x, const AttentionState<T>& state) {
  return ops::add(position_attention(x, state.gamma_pos), channel_attention(x, state.gamma_chan));
}

template <typename T>
Var<T> weighted_fuse(const Var<T>& lateral, const Var<T>& vertical, const FusionWeights<T>& w) {
  if (lateral.shape() != vertical.shape()) {
    throw ShapeError("fusion at level " + std::to_string(w.level) + ": lateral " +
                     lateral.shape().str() + " vs vertical " + vertical.shape().str());
  }
  if (w.alpha.shape().c != lateral.shape().c) {
    throw ShapeError("fusion at level " + std::to_string(w.level) + ": weights have " +
                     std::to_string(w.alpha.shape().c) + " channels, features have " +
                     std::to_string(lateral.shape().c));
  }
  return ops::channel_fuse(lateral, vertical, w.alpha, w.beta);
}

#define TNET_INSTANTIATE(T)                                                                     \
  template ConvParams<T> make_conv<T>(ParameterStore<T>&, const std::string&, int, int, int,    \
                                      Rng&);                                                    \
  template ConvParams<T> make_conv_transpose<T>(ParameterStore<T>&, const std::string&, int,    \
                                                int, int, Rng&);                                \
  template RdbParams<T> make_rdb<T>(ParameterStore<T>&, const std::string&, const RdbSpec&,     \
                                    Rng&);                                                      \
  template DownParams<T> make_down<T>(ParameterStore<T>&, const std::string&, int, Rng&);       \
  template UpParams<T> make_up<T>(ParameterStore<T>&, const std::string&, int, Rng&);           \
  template AttentionState<T> make_attention<T>(ParameterStore<T>&, const std::string&);         \
  template FusionWeights<T> make_fusion<T>(ParameterStore<T>&, const std::string&, int, int);   \
  template Var<T> rdb_forward<T>(const Var<T>&, const RdbParams<T>&);                           \
  template Var<T> downsample_forward<T>(const Var<T>&, const DownParams<T>&);                   \
  template Var<T> upsample_forward<T>(const Var<T>&, const UpParams<T>&);                       \
  template Var<T> position_attention<T>(const Var<T>&, const Var<T>&);                          \
  template Var<T> channel_attention<T>(const Var<T>&, const Var<T>&);                           \
  template Var<T> dual_attention_forward<T>(const Var<T>&, const AttentionState<T>&);           \
  template Var<T> weighted_fuse<T>(const Var<T>&, const Var<T>&, const FusionWeights<T>&);

TNET_INSTANTIATE(float)
TNET_INSTANTIATE(double)

}  // namespace tnet
