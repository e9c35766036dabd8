#include <cmath>
#include <fstream>

#include "doctest.h"
#include "support.hpp"
#include "tnet/archive.hpp"
#include "tnet/errors.hpp"
#include "tnet/trainer.hpp"

using namespace tnet;
using namespace tnet::testing;
namespace fs = std::filesystem;

namespace {

// Smallest dataset whose training split holds exactly `train_count` samples.
int count_for_training_split(int train_count) {
  int n = 0;
  int train = 0;
  while (train < train_count) train += is_holdout(n++) ? 0 : 1;
  return n;
}

fs::path make_dataset(const std::string& name, int count, int size) {
  const auto root = temp_dir(name);
  fs::create_directories(root / "clean");
  for (int i = 0; i < 4; ++i) {
    write_png(root / "clean" / ("s" + std::to_string(i) + ".png"), procedural_scene(size + 8, size + 8, 50 + i));
  }
  DatasetOptions o;
  o.clean_dir = root / "clean";
  o.out_dir = root / "data";
  o.count = count;
  o.seed = 3;
  o.crop = size;
  build_dataset(o);
  return root;
}

RunConfig micro(int epochs) {
  RunConfig c = RunConfig::micro();
  c.train.epochs = epochs;
  c.loss.extractor.widths = {8, 8, 8};
  return c;
}

std::vector<nlohmann::json> read_log(const fs::path& p) {
  std::vector<nlohmann::json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  const TrainConfig cfg;
  CHECK(lr_at(0, cfg) == 1e-3);
  CHECK(lr_at(19, cfg) == 1e-3);
  CHECK(lr_at(20, cfg) == 5e-4);
  CHECK(std::abs(lr_at(65, cfg) - 1.25e-4) < 1e-18);
  CHECK(lr_at(79, cfg) == lr_at(60, cfg));
  CHECK(lr_at(80, cfg) == 1e-4);
  CHECK(lr_at(1999, cfg) == 1e-4);
  CHECK_THROWS_AS(lr_at(-1, cfg), DomainError);
}

TEST_CASE("augmentation keeps pairs aligned") {
  ImagePair pair{procedural_scene(40, 50, 1), procedural_scene(40, 50, 2)};
  CropWindow w1, w2;
  const auto a = augment(pair, 32, true, 77, &w1);
  const auto b = augment(pair, 32, true, 77, &w2);
  CHECK(w1.y == w2.y);
  CHECK(w1.x == w2.x);
  CHECK(w1.flipped == w2.flipped);
  CHECK(a.hazy.pixels == b.hazy.pixels);
  CHECK(a.hazy.domain == ValueDomain::Network);

  bool saw_flip = false;
  bool saw_plain = false;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    CropWindow w;
    const auto out = augment(pair, 32, true, seed, &w);
    (w.flipped ? saw_flip : saw_plain) = true;
    auto hazy = crop(pair.hazy, w.y, w.x, 32, 32);
    auto clean = crop(pair.clean, w.y, w.x, 32, 32);
    if (w.flipped) {
      hazy = flip_horizontal(hazy);
      clean = flip_horizontal(clean);
    }
    REQUIRE(out.hazy.pixels == to_network_domain(hazy).pixels);
    REQUIRE(out.clean.pixels == to_network_domain(clean).pixels);
    for (float v : out.hazy.pixels) REQUIRE((v >= -1.f && v <= 1.f));
  }
  CHECK(saw_flip);
  CHECK(saw_plain);
  CropWindow w;
  augment(pair, 32, false, 5, &w);
  CHECK_FALSE(w.flipped);
  CHECK_THROWS_AS(augment(pair, 48, true, 1), ShapeError);
}

TEST_CASE("hold-out split is about ten percent and deterministic") {
  int held = 0;
  for (int i = 0; i < 2000; ++i) held += is_holdout(i) ? 1 : 0;
  CHECK(held > 140);
  CHECK(held < 260);
  CHECK(is_holdout(17) == is_holdout(17));
}

TEST_CASE("one epoch over eight training samples takes four steps") {
  const auto root = make_dataset("train_steps", count_for_training_split(8), 32);
  TrainOptions o;
  o.dataset_dir = root / "data";
  o.out_dir = root / "run";
  o.config = micro(1);
  const auto r = train(o);
  CHECK(r.train_samples == 8);
  CHECK(r.step_losses.size() == 4);
  int steps = 0;
  for (const auto& rec : read_log(r.log_path)) steps += rec["type"] == "step" ? 1 : 0;
  CHECK(steps == 4);
  CHECK(fs::exists(r.best_path));
  CHECK(fs::exists(r.last_path));
}

TEST_CASE("micro run lowers the training loss") {
  const auto root = make_dataset("train_descent", 32, 32);
  TrainOptions o;
  o.dataset_dir = root / "data";
  o.out_dir = root / "run";
  o.config = micro(20);
  const auto r = train(o);
  REQUIRE(r.epochs.size() == 20);
  CHECK(r.epochs.back().mean_loss < r.epochs.front().mean_loss);

  double best = -1;
  for (const auto& rec : read_log(r.log_path)) {
    if (rec["type"] != "eval") continue;
    CHECK(rec["best_psnr"].get<double>() >= best);
    best = rec["best_psnr"].get<double>();
  }
  CHECK(best == r.state.best_psnr);
}

TEST_CASE("training is deterministic and resumable") {
  const auto root = make_dataset("train_det", 12, 32);
  RunConfig cfg = micro(3);
  cfg.stack.stages = 2;
  cfg.loss.stages = 2;
  TrainOptions o;
  o.dataset_dir = root / "data";
  o.config = cfg;
  o.out_dir = root / "a";
  const auto a = train(o);
  o.out_dir = root / "b";
  const auto b = train(o);
  CHECK(a.step_losses == b.step_losses);
  const auto pa = load_archive(a.last_path);
  const auto pb = load_archive(b.last_path);
  REQUIRE(pa.tensors.size() == pb.tensors.size());
  for (std::size_t i = 0; i < pa.tensors.size(); ++i) CHECK(pa.tensors[i].value.vec() == pb.tensors[i].value.vec());

  // Two epochs, then resume for the third.
  o.out_dir = root / "c";
  o.config.train.epochs = 2;
  const auto c1 = train(o);
  CHECK(c1.state.epoch == 2);
  o.config.train.epochs = 3;
  o.resume = c1.last_path;
  const auto c2 = train(o);
  REQUIRE(c2.epochs.size() == 1);
  CHECK(c2.epochs.front().epoch == 2);
  CHECK(c2.state.epoch == 3);
  std::vector<double> joined = c1.step_losses;
  joined.insert(joined.end(), c2.step_losses.begin(), c2.step_losses.end());
  CHECK(joined == a.step_losses);
  const auto pc = load_archive(c2.last_path);
  for (std::size_t i = 0; i < pa.tensors.size(); ++i) CHECK(pa.tensors[i].value.vec() == pc.tensors[i].value.vec());
}

TEST_CASE("checkpoint round trip reproduces outputs") {
  const auto dir = temp_dir("ckpt");
  RunConfig cfg = micro(1);
  cfg.stack.stages = 3;
  cfg.loss.stages = 3;
  StackTNet<float> model(cfg.net, cfg.stack, 42);
  for (const auto& [name, v] : model.named_parameters()) {
    if (name.find("gamma") != std::string::npos) {
      auto var = v;
      var.mutable_value().fill(0.25f);
    }
  }
  TrainingState state;
  state.epoch = 7;
  state.best_psnr = 21.5;
  AdamMoments moments;
  for (const auto& [name, v] : model.named_parameters()) {
    moments.m.emplace_back(v.shape(), 0.5f);
    moments.v.emplace_back(v.shape(), 0.25f);
  }
  save_checkpoint(dir / "m.ckpt", model, cfg, state, &moments);

  const auto loaded = load_checkpoint(dir / "m.ckpt");
  CHECK(loaded.config.stack.stages == 3);
  CHECK(loaded.state.epoch == 7);
  CHECK(loaded.state.best_psnr == 21.5);
  CHECK(loaded.archive.meta["concat_order"] == "x0,previous");
  StackTNet<float> copy(loaded.config.net, loaded.config.stack, 0);
  restore_parameters(copy, loaded.archive);
  const auto x = random_var<float>({1, 3, 16, 16}, 3);
  CHECK(model.forward(x).final().value().vec() == copy.forward(x).final().value().vec());
  const auto m = restore_moments(copy, loaded.archive);
  CHECK(m.m.size() == model.named_parameters().size());

  RunConfig wider = cfg;
  wider.net.base_channels = 8;
  StackTNet<float> other(wider.net, wider.stack, 0);
  CHECK_THROWS_AS(restore_parameters(other, loaded.archive), ConfigError);
  CHECK_THROWS_AS(load_checkpoint(dir / "nothing.ckpt"), IoError);
}

TEST_CASE("divergence aborts with a diagnostic") {
  const auto root = make_dataset("train_diverge", 6, 32);
  TrainOptions o;
  o.dataset_dir = root / "data";
  o.out_dir = root / "run";
  o.config = micro(3);
  o.config.train.lr0 = 1e30;
  try {
    train(o);
    FAIL("expected TrainingDiverged");
  } catch (const TrainingDiverged& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("dehaze pads to the network multiple and crops back") {
  TNetConfig c;
  c.m = 4;
  c.n = 1;
  c.base_channels = 2;
  StackTNet<float> model(c, {2, true}, 1);
  const auto hazy = procedural_scene(75, 100, 3);
  const auto outs = dehaze_stages(model, hazy);
  REQUIRE(outs.size() == 2);
  CHECK(outs[1].height == 75);
  CHECK(outs[1].width == 100);
  for (float v : outs[1].pixels) REQUIRE((v >= 0.f && v <= 1.f));
  // The padded forward equals a direct forward on the mirrored 80x112 frame.
  const auto padded = reflect_pad(to_network_domain(hazy), 80, 112);
  NoGradGuard guard;
  const auto direct = model.forward(Var<float>(to_tensor<float>(padded))).final().value();
  const auto expect = to_unit_domain(crop(from_tensor(direct, 0, ValueDomain::Network), 0, 0, 75, 100));
  CHECK(outs[1].pixels == expect.pixels);
  CHECK(dehaze(model, hazy, 1).pixels == outs[0].pixels);
}
