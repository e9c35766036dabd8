#include "tnet/tnet.hpp"

namespace tnet {

void TNetConfig::validate() const {
  if (m < 1) throw ConfigError("m (down/up pairs) must be >= 1");
  if (n < 0) throw ConfigError("n (trunk RDB pairs) must be >= 0");
  if (n > 0 && m < 2) {
    throw ConfigError("trunk RDBs live on levels 1..m-1; m = " + std::to_string(m) +
                      " leaves no level for n = " + std::to_string(n) + " RDB pairs");
  }
  if (base_channels < 1) throw ConfigError("base_channels must be >= 1");
  if (m > 12 || (static_cast<long long>(base_channels) << m) > (1LL << 20)) {
    throw ConfigError("channel ladder overflows: base_channels * 2^m too large");
  }
  if (in_channels < 1) throw ConfigError("in_channels must be >= 1");
  if (out_channels < 1) throw ConfigError("out_channels must be >= 1");
  RdbSpec{base_channels, rdb_growth, rdb_layers}.validate();
}

std::vector<int> TNetConfig::channel_ladder() const {
  std::vector<int> out;
  for (int i = 0; i <= m; ++i) out.push_back(level_channels(i));
  return out;
}

std::vector<int> TNetConfig::trunk_rdbs_per_level() const {
  std::vector<int> counts(m + 1, 0);
  if (m < 2) return counts;
  for (int k = 0; k < n; ++k) counts[m - 1 - (k % (m - 1))] += 1;
  return counts;
}

template <typename T>
TNet<T>::TNet(const TNetConfig& config, std::uint64_t seed, const std::string& prefix)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  const int m = config_.m;
  const auto per_level = config_.trunk_rdbs_per_level();
  const std::string p = prefix;

  conv_in_ = make_conv(store_, p + "conv_in", config_.in_channels, config_.base_channels, 3, rng);
  enc_rdb_.resize(m + 1);
  dec_rdb_.resize(m + 1);
  for (int i = 1; i <= m; ++i) {
    const std::string enc = p + "enc" + std::to_string(i);
    down_.push_back(make_down(store_, enc + ".down", config_.level_channels(i - 1), rng));
    for (int j = 0; j < per_level[i]; ++j) {
      enc_rdb_[i].push_back(
          make_rdb(store_, enc + ".rdb" + std::to_string(j), config_.rdb_spec(i), rng));
    }
  }
  attention_ = make_attention(store_, p + "attention");
  for (int i = 1; i < m; ++i) {
    lateral_.push_back(make_rdb(store_, p + "lat" + std::to_string(i) + ".rdb",
                                config_.rdb_spec(i), rng));
  }
  up_.resize(m);
  for (int i = m; i >= 1; --i) {
    const std::string dec = p + "dec" + std::to_string(i);
    for (int j = 0; j < per_level[i]; ++j) {
      dec_rdb_[i].push_back(
          make_rdb(store_, dec + ".rdb" + std::to_string(j), config_.rdb_spec(i), rng));
    }
    up_[i - 1] = make_up(store_, dec + ".up", config_.level_channels(i), rng);
  }
  for (int i = 0; i < m; ++i) {
    fuse_.push_back(
        make_fusion(store_, p + "fuse" + std::to_string(i), i, config_.level_channels(i)));
  }
  conv_out_ = make_conv(store_, p + "conv_out", config_.base_channels, config_.out_channels, 3,
                        rng);
}

template <typename T>
void TNet<T>::check_input(const Shape& s) const {
  if (s.c != config_.in_channels) {
    throw ShapeError("network expects " + std::to_string(config_.in_channels) +
                     " input channels, got " + std::to_string(s.c));
  }
  int h = s.h;
  int w = s.w;
  for (int level = 1; level <= config_.m; ++level) {
    if (h % 2 != 0 || w % 2 != 0) {
      throw ShapeError("input " + s.str() + " not divisible by 2^" + std::to_string(config_.m) +
                       ": level " + std::to_string(level - 1) + " feature is " +
                       std::to_string(h) + "x" + std::to_string(w) +
                       " and cannot be downsampled to level " + std::to_string(level));
    }
    h /= 2;
    w /= 2;
  }
}

namespace {

void expect_level(const Shape& got, const Shape& input, const TNetConfig& cfg, int level,
                  const char* what) {
  const Shape want{input.n, cfg.level_channels(level), input.h >> level, input.w >> level};
  if (got != want) {
    throw ShapeError(std::string(what) + " at level " + std::to_string(level) + " is " +
                     got.str() + ", expected " + want.str());
  }
}

}  // namespace

template <typename T>
Var<T> TNet<T>::forward(const Var<T>& x, ForwardTrace* trace) const {
  const Shape in = x.shape();
  check_input(in);
  const int m = config_.m;

  std::vector<Var<T>> enc(m + 1);
  enc[0] = ops::conv2d(x, conv_in_.weight, conv_in_.bias, 1, 1);
  expect_level(enc[0].shape(), in, config_, 0, "encoder feature");
  for (int i = 1; i <= m; ++i) {
    Var<T> h = downsample_forward(enc[i - 1], down_[i - 1]);
    for (const auto& rdb : enc_rdb_[i]) h = rdb_forward(h, rdb);
    expect_level(h.shape(), in, config_, i, "encoder feature");
    enc[i] = h;
  }
  if (trace) {
    trace->encoder.clear();
    for (const auto& f : enc) trace->encoder.push_back(f.shape());
    trace->fused.clear();
  }

  const Var<T> bottleneck = dual_attention_forward(enc[m], attention_);
  expect_level(bottleneck.shape(), in, config_, m, "bottleneck");
  if (trace) trace->bottleneck = bottleneck.shape();

  Var<T> vertical = upsample_forward(bottleneck, up_[m - 1]);
  for (int i = m - 1;; --i) {
    const Var<T> lateral = i >= 1 ? rdb_forward(enc[i], lateral_[i - 1]) : enc[i];
    Var<T> fused = weighted_fuse(lateral, vertical, fuse_[i]);
    expect_level(fused.shape(), in, config_, i, "fused feature");
    if (trace) trace->fused.push_back(fused.shape());
    if (i == 0) {
      return ops::conv2d(fused, conv_out_.weight, conv_out_.bias, 1, 1);
    }
    for (const auto& rdb : dec_rdb_[i]) fused = rdb_forward(fused, rdb);
    vertical = upsample_forward(fused, up_[i - 1]);
  }
}

template class TNet<float>;
template class TNet<double>;

}  // namespace tnet
