// tnet: synthesize hazy data, train, dehaze and evaluate.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
// TNET_QUIET=1 silences progress lines; the resolved-config line and errors
// are always printed.

#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tnet/checkpoint.hpp"
#include "tnet/haze.hpp"
#include "tnet/metrics.hpp"
#include "tnet/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRuntime = 2 };

bool quiet() {
  const char* v = std::getenv("TNET_QUIET");
  return v != nullptr && std::string(v) != "0" && std::string(v) != "";
}

void progress(const std::string& line) {
  if (!quiet()) std::cerr << line << '\n';
}

void print_config(const std::string& command, const ordered_json& config) {
  ordered_json line;
  line["command"] = command;
  line["config"] = config;
  std::cout << "config " << line.dump() << std::endl;
}

std::pair<double, double> parse_range(const std::string& text, const std::string& flag) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw tnet::ConfigError(flag + " expects LO,HI");
  try {
    std::size_t used = 0;
    const double lo = std::stod(text.substr(0, comma), &used);
    const double hi = std::stod(text.substr(comma + 1));
    if (lo > hi) {
      throw tnet::ConfigError(flag + " is inverted: " + text + " (LO must be <= HI)");
    }
    return {lo, hi};
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const tnet::ConfigError*>(&e)) throw;
    throw tnet::ConfigError(flag + " expects two numbers, got '" + text + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------- synthesize

struct SynthesizeArgs {
  std::string clean;
  std::string out;
  int count = 0;
  std::uint64_t seed = 0;
  std::string beta_range = "0.4,1.6";
  std::string airlight_range = "0.7,1.0";
  std::string depth_kinds = "ramp,radial,smooth-noise";
  int crop = 0;
};

int run_synthesize(const SynthesizeArgs& a) {
  tnet::DatasetOptions o;
  o.clean_dir = a.clean;
  o.out_dir = a.out;
  o.count = a.count;
  o.seed = a.seed;
  o.beta_range = parse_range(a.beta_range, "--beta-range");
  o.airlight_range = parse_range(a.airlight_range, "--airlight-range");
  o.depth_kinds.clear();
  for (const auto& k : split_list(a.depth_kinds)) o.depth_kinds.push_back(tnet::parse_depth_kind(k));
  o.crop = a.crop;
  o.validate();

  std::vector<std::string> kinds;
  for (auto k : o.depth_kinds) kinds.push_back(tnet::to_string(k));
  print_config("synthesize", {{"clean", a.clean},
                              {"out", a.out},
                              {"count", o.count},
                              {"seed", o.seed},
                              {"beta_range", {o.beta_range.first, o.beta_range.second}},
                              {"airlight_range", {o.airlight_range.first, o.airlight_range.second}},
                              {"depth_kinds", kinds},
                              {"crop", o.crop}});
  const auto entries = tnet::build_dataset(o);
  std::map<std::string, int> per_kind;
  for (const auto& e : entries) ++per_kind[e.depth_kind];
  std::cout << "wrote " << entries.size() << " pairs to " << a.out;
  for (const auto& [k, n] : per_kind) std::cout << "  " << k << ":" << n;
  std::cout << std::endl;
  return kOk;
}

// -------------------------------------------------------------------- scenes

struct ScenesArgs {
  std::string out;
  int count = 0;
  int size = 96;
  std::uint64_t seed = 0;
};

int run_scenes(const ScenesArgs& a) {
  if (a.count < 1) throw tnet::ConfigError("--count must be >= 1");
  if (a.size < 1) throw tnet::ConfigError("--size must be >= 1");
  print_config("scenes", {{"out", a.out}, {"count", a.count}, {"size", a.size}, {"seed", a.seed}});
  std::error_code ec;
  fs::create_directories(a.out, ec);
  for (int i = 0; i < a.count; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "scene_%05d.png", i);
    tnet::write_png(fs::path(a.out) / name,
                    tnet::procedural_scene(a.size, a.size, tnet::mix_seed(a.seed + static_cast<std::uint64_t>(i))));
  }
  std::cout << "wrote " << a.count << " scenes to " << a.out << std::endl;
  return kOk;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string out;
  std::string preset = "desk";
  std::string config;
  std::vector<std::string> set;
  std::string resume;
  int stages = 0;
  int epochs = -1;
  long long seed = -1;
};

int run_train(const TrainArgs& a) {
  tnet::RunConfig cfg = tnet::RunConfig::preset(a.preset);
  if (!a.config.empty()) cfg = tnet::RunConfig::load(a.config, cfg);
  for (const auto& kv : a.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw tnet::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.apply_assignment(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.stages > 0) cfg.apply_assignment("stages", std::to_string(a.stages));
  if (a.epochs >= 0) cfg.train.epochs = a.epochs;
  if (a.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(a.seed);
  cfg.validate();

  ordered_json shown = cfg.to_json();
  shown["data"] = a.data;
  shown["out"] = a.out;
  shown["resume"] = a.resume;
  print_config("train", shown);

  tnet::TrainOptions o;
  o.dataset_dir = a.data;
  o.out_dir = a.out;
  o.config = cfg;
  o.resume = a.resume;
  o.progress = progress;
  const auto r = tnet::train(o);
  std::cout << "trained epochs " << (r.state.epoch - static_cast<int>(r.epochs.size())) << ".."
            << r.state.epoch << ", best eval PSNR " << r.state.best_psnr << " dB at epoch "
            << r.state.best_epoch << " (hazy inputs " << r.eval_hazy_psnr << " dB)" << std::endl;
  return kOk;
}

// -------------------------------------------------------------------- dehaze

struct DehazeArgs {
  std::string checkpoint;
  std::string input;
  std::string out;
  int stages = 0;
  bool save_stages = false;
};

int run_dehaze(const DehazeArgs& a) {
  auto ckpt = tnet::load_checkpoint(a.checkpoint);
  const int trained = ckpt.config.stack.stages;
  const int stages = a.stages > 0 ? a.stages : trained;
  ordered_json shown = ckpt.config.to_json();
  shown["checkpoint"] = a.checkpoint;
  shown["input"] = a.input;
  shown["out"] = a.out;
  shown["inference_stages"] = stages;
  shown["save_stages"] = a.save_stages;
  print_config("dehaze", shown);
  if (stages != trained) {
    std::cerr << "warning: running " << stages << " stages on a model trained with K=" << trained
              << '\n';
  }

  tnet::StackTNet<float> model(ckpt.config.net, ckpt.config.stack, 0);
  tnet::restore_parameters(model, ckpt.archive);

  std::vector<fs::path> inputs;
  if (fs::is_directory(a.input)) {
    inputs = tnet::list_png_files(a.input);
  } else {
    inputs.push_back(a.input);
  }
  std::error_code ec;
  fs::create_directories(a.out, ec);
  for (const auto& path : inputs) {
    const tnet::ImageBuffer hazy = tnet::read_png(path);
    const auto outputs = tnet::dehaze_stages(model, hazy, stages);
    const std::string stem = path.stem().string();
    tnet::write_png(fs::path(a.out) / (stem + ".png"), outputs.back());
    if (a.save_stages) {
      for (std::size_t k = 0; k < outputs.size(); ++k) {
        tnet::write_png(fs::path(a.out) / (stem + "_stage" + std::to_string(k + 1) + ".png"),
                        outputs[k]);
      }
    }
    progress("dehazed " + path.string() + " (" + std::to_string(hazy.width) + "x" +
             std::to_string(hazy.height) + ")");
  }
  std::cout << "dehazed " << inputs.size() << " image(s) into " << a.out << std::endl;
  return kOk;
}

// ---------------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string out = ".";
  bool allow_partial = false;
};

int run_eval(const EvalArgs& a) {
  print_config("eval", {{"pred", a.pred}, {"gt", a.gt}, {"out", a.out}, {"allow_partial", a.allow_partial}});
  std::map<std::string, fs::path> pred;
  std::map<std::string, fs::path> gt;
  for (const auto& p : tnet::list_png_files(a.pred)) pred[p.filename().string()] = p;
  for (const auto& p : tnet::list_png_files(a.gt)) gt[p.filename().string()] = p;

  std::vector<std::string> unpaired;
  for (const auto& [name, p] : pred) {
    if (!gt.count(name)) unpaired.push_back(name + " (no ground truth)");
  }
  for (const auto& [name, p] : gt) {
    if (!pred.count(name)) unpaired.push_back(name + " (no prediction)");
  }
  for (const auto& u : unpaired) std::cerr << "unpaired: " << u << '\n';
  if (!unpaired.empty() && !a.allow_partial) {
    std::cerr << "error: " << unpaired.size() << " unpaired file(s); pass --allow-partial to score the rest\n";
    return kRuntime;
  }

  tnet::MetricReport report;
  for (const auto& [name, p] : pred) {
    auto it = gt.find(name);
    if (it == gt.end()) continue;
    report.add(tnet::score_image(name, tnet::read_png(p), tnet::read_png(it->second)));
  }
  if (report.per_image.empty()) {
    std::cerr << "error: no image pairs to score\n";
    return kRuntime;
  }
  report.finalize();
  std::error_code ec;
  fs::create_directories(a.out, ec);
  report.write(fs::path(a.out) / "metrics.txt", fs::path(a.out) / "metrics.jsonl");
  if (!quiet()) std::cerr << report.table();
  std::cout << "images " << report.count << "  mean PSNR " << report.mean_psnr << " dB  mean SSIM "
            << report.mean_ssim << std::endl;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dehazing network toolkit: synthesize, train, dehaze, eval"};
  app.require_subcommand(1);

  SynthesizeArgs syn;
  auto* s = app.add_subcommand("synthesize", "Build a paired hazy/clean dataset from clean PNGs");
  s->add_option("--clean", syn.clean, "Directory of clean PNG images")->required();
  s->add_option("--out", syn.out, "Output dataset directory")->required();
  s->add_option("--count", syn.count, "Number of pairs")->required();
  s->add_option("--seed", syn.seed, "Random seed");
  s->add_option("--beta-range", syn.beta_range, "Scattering coefficient range LO,HI");
  s->add_option("--airlight-range", syn.airlight_range, "Airlight range LO,HI within (0, 1]");
  s->add_option("--depth-kinds", syn.depth_kinds, "Comma list of ramp, radial, smooth-noise");
  s->add_option("--crop", syn.crop, "Square crop edge in pixels (0 = whole image)");

  ScenesArgs sc;
  auto* g = app.add_subcommand("scenes", "Write procedural clean scenes usable as --clean input");
  g->add_option("--out", sc.out, "Output directory")->required();
  g->add_option("--count", sc.count, "Number of scenes")->required();
  g->add_option("--size", sc.size, "Edge length in pixels");
  g->add_option("--seed", sc.seed, "Random seed");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a Stack T-Net on a synthesized dataset");
  t->add_option("--data", tr.data, "Dataset directory with manifest.jsonl")->required();
  t->add_option("--out", tr.out, "Directory for checkpoints and the training log")->required();
  t->add_option("--preset", tr.preset, "paper, desk or micro")->check(CLI::IsMember({"paper", "desk", "micro"}));
  t->add_option("--config", tr.config, "Flat JSON config file overlaid on the preset");
  t->add_option("--set", tr.set, "key=value override, repeatable");
  t->add_option("--resume", tr.resume, "Checkpoint to continue from");
  t->add_option("--stages", tr.stages, "Stage count K");
  t->add_option("--epochs", tr.epochs, "Total epochs");
  t->add_option("--seed", tr.seed, "Training seed");

  DehazeArgs dh;
  auto* d = app.add_subcommand("dehaze", "Dehaze a PNG file or a directory of PNGs");
  d->add_option("--checkpoint", dh.checkpoint, "Checkpoint file")->required();
  d->add_option("--input", dh.input, "PNG file or directory")->required();
  d->add_option("--out", dh.out, "Output directory")->required();
  d->add_option("--stages", dh.stages, "Run this many stages instead of the trained K");
  d->add_flag("--save-stages", dh.save_stages, "Also write every stage output");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score predictions against ground truth by filename");
  e->add_option("--pred", ev.pred, "Directory of predicted PNGs")->required();
  e->add_option("--gt", ev.gt, "Directory of ground-truth PNGs")->required();
  e->add_option("--out", ev.out, "Directory for metrics.txt and metrics.jsonl");
  e->add_flag("--allow-partial", ev.allow_partial, "Score available pairs when some are missing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return run_synthesize(syn);
    if (*g) return run_scenes(sc);
    if (*t) return run_train(tr);
    if (*d) return run_dehaze(dh);
    if (*e) return run_eval(ev);
  } catch (const tnet::ConfigError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
