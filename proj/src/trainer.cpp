#include "tnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "tnet/metrics.hpp"

namespace tnet {

namespace fs = std::filesystem;
using nlohmann::json;

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw DomainError("epoch must be >= 0");
  if (epoch >= cfg.lr_floor_epoch) return cfg.lr_floor;
  return cfg.lr0 * std::pow(0.5, epoch / cfg.halve_every);
}

ImagePair augment(const ImagePair& pair, int crop_size, bool flip, std::uint64_t seed,
                  CropWindow* window) {
  if (!pair.hazy.same_size(pair.clean)) throw ShapeError("hazy and clean images differ in size");
  const int h = pair.hazy.height;
  const int w = pair.hazy.width;
  const int size_h = crop_size > 0 ? crop_size : h;
  const int size_w = crop_size > 0 ? crop_size : w;
  if (size_h > h || size_w > w) {
    throw ShapeError("image " + std::to_string(h) + "x" + std::to_string(w) +
                     " is smaller than the " + std::to_string(crop_size) + " pixel crop");
  }
  Rng rng(seed);
  CropWindow win;
  win.y = static_cast<int>(rng.below(static_cast<std::uint64_t>(h - size_h + 1)));
  win.x = static_cast<int>(rng.below(static_cast<std::uint64_t>(w - size_w + 1)));
  win.size = crop_size;
  win.flipped = flip && (rng.next() & 1U) != 0;
  ImagePair out{crop(pair.hazy, win.y, win.x, size_h, size_w),
                crop(pair.clean, win.y, win.x, size_h, size_w)};
  if (win.flipped) {
    out.hazy = flip_horizontal(out.hazy);
    out.clean = flip_horizontal(out.clean);
  }
  out.hazy = to_network_domain(out.hazy);
  out.clean = to_network_domain(out.clean);
  if (window) *window = win;
  return out;
}

bool is_holdout(int index) { return mix_seed(static_cast<std::uint64_t>(index)) % 10 == 0; }

std::vector<ImageBuffer> dehaze_stages(const StackTNet<float>& model, const ImageBuffer& hazy,
                                       int stages) {
  const int multiple = model.net_config().spatial_multiple();
  const int ph = (hazy.height + multiple - 1) / multiple * multiple;
  const int pw = (hazy.width + multiple - 1) / multiple * multiple;
  const ImageBuffer padded = reflect_pad(to_network_domain(hazy), ph, pw);
  NoGradGuard guard;
  const auto out = model.forward(Var<float>(to_tensor<float>(padded)), stages);
  std::vector<ImageBuffer> images;
  for (const auto& y : out.per_stage) {
    const ImageBuffer full = from_tensor(y.value(), 0, ValueDomain::Network);
    images.push_back(to_unit_domain(crop(full, 0, 0, hazy.height, hazy.width)));
  }
  return images;
}

ImageBuffer dehaze(const StackTNet<float>& model, const ImageBuffer& hazy, int stages) {
  return dehaze_stages(model, hazy, stages).back();
}

MetricReport evaluate_model(const StackTNet<float>& model, const std::vector<ImagePair>& samples,
                            const std::vector<std::string>& names, int stages) {
  MetricReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    report.per_image.push_back(
        score_image(names[i], dehaze(model, samples[i].hazy, stages), samples[i].clean));
  }
  report.finalize();
  return report;
}

namespace {

class Adam {
 public:
  Adam(const std::vector<std::pair<std::string, Var<float>>>& params, const TrainConfig& cfg)
      : params_(params), cfg_(cfg) {
    for (const auto& [name, v] : params_) {
      moments_.m.emplace_back(v.shape());
      moments_.v.emplace_back(v.shape());
    }
  }

  void restore(AdamMoments moments, long long step) {
    if (!moments.m.empty()) moments_ = std::move(moments);
    step_ = step;
  }

  void step(double lr) {
    ++step_;
    const double b1 = cfg_.adam_beta1;
    const double b2 = cfg_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    const float lr_t = static_cast<float>(lr / c1);
    const float inv_sqrt_c2 = static_cast<float>(1.0 / std::sqrt(c2));
    const float eps = static_cast<float>(cfg_.adam_eps);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Var<float> p = params_[i].second;
      if (!p.has_grad()) continue;
      const float* g = p.grad().data();
      float* m = moments_.m[i].data();
      float* v = moments_.v[i].data();
      float* w = p.mutable_value().data();
      const std::size_t n = p.value().size();
      for (std::size_t j = 0; j < n; ++j) {
        m[j] = static_cast<float>(b1) * m[j] + static_cast<float>(1.0 - b1) * g[j];
        v[j] = static_cast<float>(b2) * v[j] + static_cast<float>(1.0 - b2) * g[j] * g[j];
        w[j] -= lr_t * m[j] / (std::sqrt(v[j]) * inv_sqrt_c2 + eps);
      }
    }
  }

  [[nodiscard]] const AdamMoments& moments() const { return moments_; }
  [[nodiscard]] long long steps() const { return step_; }

 private:
  std::vector<std::pair<std::string, Var<float>>> params_;
  TrainConfig cfg_;
  AdamMoments moments_;
  long long step_ = 0;
};

struct Sample {
  int index;
  std::string name;
  ImagePair pair;
};

std::vector<Sample> load_samples(const fs::path& dir, const std::vector<ManifestEntry>& manifest) {
  std::vector<Sample> samples;
  samples.reserve(manifest.size());
  for (const auto& e : manifest) {
    samples.push_back({e.index, e.hazy_path,
                       {read_png(dir / e.hazy_path), read_png(dir / e.clean_path)}});
  }
  return samples;
}

void check_resume_compatible(const RunConfig& ckpt, const RunConfig& run) {
  if (!(ckpt.net == run.net) || !(ckpt.stack == run.stack)) {
    throw ConfigError("checkpoint architecture (m, n, channels, stages) differs from the run config");
  }
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

TrainResult train(const TrainOptions& options) {
  const RunConfig& cfg = options.config;
  cfg.validate();
  const TrainConfig& tc = cfg.train;

  const auto manifest = read_manifest(options.dataset_dir / kManifestName);
  if (manifest.empty()) throw ConfigError("dataset manifest is empty");
  const auto samples = load_samples(options.dataset_dir, manifest);

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> eval_idx;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (is_holdout(samples[i].index) ? eval_idx : train_idx).push_back(i);
  }
  if (train_idx.empty()) {
    train_idx = eval_idx;
  }
  if (eval_idx.empty()) eval_idx = train_idx;

  std::vector<ImagePair> eval_pairs;
  std::vector<std::string> eval_names;
  for (std::size_t i : eval_idx) {
    eval_pairs.push_back(samples[i].pair);
    eval_names.push_back(samples[i].name);
  }

  StackTNet<float> model(cfg.net, cfg.stack, mix_seed(tc.seed));
  const auto extractor = FeatureExtractor<float>::create(cfg.loss.extractor);
  const auto params = model.named_parameters();
  Adam adam(params, tc);
  Rng rng(tc.seed);
  TrainingState state;
  state.rng_state = rng.state();

  if (!options.resume.empty()) {
    auto ckpt = load_checkpoint(options.resume);
    check_resume_compatible(ckpt.config, cfg);
    restore_parameters(model, ckpt.archive);
    adam.restore(restore_moments(model, ckpt.archive), ckpt.state.adam_step);
    state = ckpt.state;
    rng.set_state(state.rng_state);
  }

  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (!fs::is_directory(options.out_dir)) {
    throw IoError("cannot create output directory '" + options.out_dir.string() + "'");
  }
  TrainResult result;
  result.best_path = options.out_dir / "best.ckpt";
  result.last_path = options.out_dir / "last.ckpt";
  result.log_path = options.out_dir / "train_log.jsonl";
  result.train_samples = train_idx.size();
  result.eval_samples = eval_idx.size();

  std::ofstream log(result.log_path, options.resume.empty() ? std::ios::trunc : std::ios::app);
  if (!log) throw IoError("cannot open training log '" + result.log_path.string() + "'");
  const auto emit = [&](const json& record) { log << record.dump() << '\n'; };
  const auto say = [&](const std::string& s) {
    if (options.progress) options.progress(s);
  };

  {
    double acc = 0.0;
    for (const auto& p : eval_pairs) acc += psnr(p.hazy, p.clean);
    result.eval_hazy_psnr = acc / static_cast<double>(eval_pairs.size());
  }
  if (options.resume.empty()) {
    emit({{"type", "run"},
          {"config", cfg.to_json()},
          {"parameter_count", model.parameter_count()},
          {"train_samples", train_idx.size()},
          {"eval_samples", eval_idx.size()},
          {"eval_hazy_psnr", result.eval_hazy_psnr}});
  }

  for (int epoch = state.epoch; epoch < tc.epochs; ++epoch) {
    const double lr = lr_at(epoch, tc);
    std::vector<std::size_t> order = train_idx;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    double loss_acc = 0.0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(tc.batch_size));
      std::vector<ImageBuffer> hazy;
      std::vector<ImageBuffer> clean;
      for (std::size_t b = start; b < stop; ++b) {
        const Sample& s = samples[order[b]];
        const std::uint64_t aug_seed =
            mix_seed(tc.seed ^ mix_seed((static_cast<std::uint64_t>(epoch) << 32) |
                                        static_cast<std::uint32_t>(s.index)));
        ImagePair a = augment(s.pair, tc.crop, tc.flip, aug_seed);
        hazy.push_back(std::move(a.hazy));
        clean.push_back(std::move(a.clean));
      }
      const Var<float> x0(to_tensor<float>(hazy));
      const Var<float> gt(to_tensor<float>(clean));

      model.zero_grad();
      const auto out = model.forward(x0);
      const auto loss = total_loss(out, gt, cfg.loss, *extractor);
      const double total = loss.breakdown.total;
      if (!finite(total)) {
        throw TrainingDiverged("loss became " + std::to_string(total) + " at epoch " +
                               std::to_string(epoch) + ", step " + std::to_string(state.step) +
                               " (lr " + std::to_string(lr) + ")");
      }
      backward(loss.value);
      adam.step(lr);
      ++state.step;
      ++rec.steps;
      loss_acc += total;
      result.step_losses.push_back(total);

      emit({{"type", "step"},
            {"epoch", epoch},
            {"step", state.step},
            {"lr", lr},
            {"total", total},
            {"smooth_l1", loss.breakdown.smooth_l1},
            {"perceptual", loss.breakdown.perceptual}});
      for (std::size_t k = 0; k < loss.breakdown.smooth_l1.size(); ++k) {
        emit({{"type", "loss"}, {"epoch", epoch}, {"step", state.step}, {"stage", k + 1},
              {"family", "smooth_l1"}, {"value", loss.breakdown.smooth_l1[k]}});
        emit({{"type", "loss"}, {"epoch", epoch}, {"step", state.step}, {"stage", k + 1},
              {"family", "perceptual"}, {"value", loss.breakdown.perceptual[k]}});
      }
    }
    rec.mean_loss = rec.steps > 0 ? loss_acc / rec.steps : 0.0;

    const MetricReport report = evaluate_model(model, eval_pairs, eval_names);
    rec.eval_psnr = report.mean_psnr;
    rec.eval_ssim = report.mean_ssim;
    state.epoch = epoch + 1;
    state.adam_step = adam.steps();
    state.rng_state = rng.state();
    if (report.mean_psnr > state.best_psnr) {
      state.best_psnr = report.mean_psnr;
      state.best_epoch = epoch;
      save_checkpoint(result.best_path, model, cfg, state, &adam.moments());
    }
    rec.best_psnr = state.best_psnr;
    save_checkpoint(result.last_path, model, cfg, state, &adam.moments());
    emit({{"type", "eval"},
          {"epoch", epoch},
          {"lr", lr},
          {"mean_loss", rec.mean_loss},
          {"psnr", rec.eval_psnr},
          {"ssim", rec.eval_ssim},
          {"best_psnr", state.best_psnr},
          {"best_epoch", state.best_epoch}});
    log.flush();
    result.epochs.push_back(rec);

    char line[200];
    std::snprintf(line, sizeof line,
                  "epoch %d lr %.3g steps %d loss %.5f eval psnr %.3f ssim %.4f (best %.3f @%d)",
                  epoch, lr, rec.steps, rec.mean_loss, rec.eval_psnr, rec.eval_ssim,
                  state.best_psnr, state.best_epoch);
    say(line);
  }
  result.state = state;
  return result;
}

}  // namespace tnet
