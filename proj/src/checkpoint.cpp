#include "tnet/checkpoint.hpp"

namespace tnet {

namespace {
constexpr const char* kFormat = "tnet-checkpoint";
constexpr int kVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const StackTNet<float>& model,
                     const RunConfig& config, const TrainingState& state,
                     const AdamMoments* moments) {
  Archive a;
  a.meta["format"] = kFormat;
  a.meta["version"] = kVersion;
  a.meta["config"] = config.to_json();
  a.meta["concat_order"] = "x0,previous";
  a.meta["state"] = {{"epoch", state.epoch},         {"step", state.step},
                     {"adam_step", state.adam_step}, {"rng_state", state.rng_state},
                     {"best_psnr", state.best_psnr}, {"best_epoch", state.best_epoch}};
  const auto params = model.named_parameters();
  a.meta["parameter_count"] = model.parameter_count();
  for (const auto& [name, v] : params) a.tensors.push_back({name, v.value()});
  if (moments && !moments->m.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      a.tensors.push_back({"adam.m/" + params[i].first, moments->m[i]});
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      a.tensors.push_back({"adam.v/" + params[i].first, moments->v[i]});
    }
  }
  save_archive(path, a);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  LoadedCheckpoint out;
  out.archive = load_archive(path);
  const auto& meta = out.archive.meta;
  if (meta.value("format", "") != kFormat) {
    throw IoError("'" + path.string() + "' is not a checkpoint");
  }
  if (meta.value("version", 0) != kVersion) {
    throw IoError("unsupported checkpoint version in '" + path.string() + "'");
  }
  out.config = RunConfig::from_json(meta.at("config"));
  const auto& s = meta.at("state");
  out.state.epoch = s.at("epoch").get<int>();
  out.state.step = s.at("step").get<long long>();
  out.state.adam_step = s.at("adam_step").get<long long>();
  out.state.rng_state = s.at("rng_state").get<std::string>();
  out.state.best_psnr = s.at("best_psnr").get<double>();
  out.state.best_epoch = s.at("best_epoch").get<int>();
  return out;
}

void restore_parameters(StackTNet<float>& model, const Archive& archive) {
  for (auto& [name, v] : model.named_parameters()) {
    const Tensor<float>* t = archive.find(name);
    if (!t) throw ConfigError("checkpoint lacks parameter '" + name + "'");
    if (t->shape() != v.shape()) {
      throw ConfigError("parameter '" + name + "' has shape " + t->shape().str() +
                        " in the checkpoint but " + v.shape().str() + " in the model");
    }
    auto var = v;
    var.mutable_value() = *t;
  }
}

AdamMoments restore_moments(const StackTNet<float>& model, const Archive& archive) {
  AdamMoments moments;
  const auto params = model.named_parameters();
  if (params.empty() || !archive.find("adam.m/" + params.front().first)) return moments;
  for (const auto& [name, v] : params) {
    moments.m.push_back(archive.get("adam.m/" + name));
    moments.v.push_back(archive.get("adam.v/" + name));
    if (moments.m.back().shape() != v.shape() || moments.v.back().shape() != v.shape()) {
      throw ConfigError("optimizer state for '" + name + "' does not match the model");
    }
  }
  return moments;
}

}  // namespace tnet
