#include <fstream>
#include <functional>
#include <vector>

#include "tnet/config.hpp"

namespace tnet {

using nlohmann::json;

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(lr0 > 0.0) || !(lr_floor > 0.0)) throw ConfigError("learning rates must be > 0");
  if (halve_every < 1) throw ConfigError("halve_every must be >= 1");
  if (lr_floor_epoch < 0) throw ConfigError("lr_floor_epoch must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be > 0");
  if (crop < 0) throw ConfigError("crop must be >= 0");
}

RunConfig RunConfig::paper() {
  RunConfig c;
  c.stack.stages = 3;
  c.loss.stages = 3;
  return c;
}

RunConfig RunConfig::desk() {
  RunConfig c = paper();
  c.train.epochs = 60;
  c.train.crop = 64;
  c.train.batch_size = 4;
  return c;
}

RunConfig RunConfig::micro() {
  RunConfig c = desk();
  c.net.m = 2;
  c.net.n = 1;
  c.net.base_channels = 4;
  c.stack.stages = 1;
  c.loss.stages = 1;
  c.train.crop = 32;
  c.train.epochs = 20;
  c.train.batch_size = 2;
  return c;
}

RunConfig RunConfig::preset(const std::string& name) {
  if (name == "paper") return paper();
  if (name == "desk") return desk();
  if (name == "micro") return micro();
  throw ConfigError("unknown preset '" + name + "' (expected paper, desk or micro)");
}

void RunConfig::validate() const {
  net.validate();
  stack.validate();
  train.validate();
  loss.validate();
  if (loss.stages != stack.stages) {
    throw ConfigError("loss stage count (" + std::to_string(loss.stages) +
                      ") differs from model stage count (" + std::to_string(stack.stages) + ")");
  }
  if (train.crop > 0 && train.crop % net.spatial_multiple() != 0) {
    throw ConfigError("crop " + std::to_string(train.crop) + " is not divisible by 2^m = " +
                      std::to_string(net.spatial_multiple()));
  }
}

namespace {

struct Field {
  const char* key;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename M>
Field int_field(const char* key, M member) {
  return {key, [member](const RunConfig& c) { return json(member(const_cast<RunConfig&>(c))); },
          [key, member](RunConfig& c, const json& v) {
            if (!v.is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
            member(c) = v.get<long long>();
          }};
}

template <typename M>
Field real_field(const char* key, M member) {
  return {key, [member](const RunConfig& c) { return json(member(const_cast<RunConfig&>(c))); },
          [key, member](RunConfig& c, const json& v) {
            if (!v.is_number()) throw ConfigError(std::string(key) + " must be a number");
            member(c) = v.get<double>();
          }};
}

template <typename M>
Field bool_field(const char* key, M member) {
  return {key, [member](const RunConfig& c) { return json(member(const_cast<RunConfig&>(c))); },
          [key, member](RunConfig& c, const json& v) {
            if (!v.is_boolean()) throw ConfigError(std::string(key) + " must be true or false");
            member(c) = v.get<bool>();
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    t.push_back(int_field("m", [](RunConfig& c) -> int& { return c.net.m; }));
    t.push_back(int_field("n", [](RunConfig& c) -> int& { return c.net.n; }));
    t.push_back(int_field("base_channels", [](RunConfig& c) -> int& { return c.net.base_channels; }));
    t.push_back(int_field("in_channels", [](RunConfig& c) -> int& { return c.net.in_channels; }));
    t.push_back(int_field("out_channels", [](RunConfig& c) -> int& { return c.net.out_channels; }));
    t.push_back(int_field("rdb_growth", [](RunConfig& c) -> int& { return c.net.rdb_growth; }));
    t.push_back(int_field("rdb_layers", [](RunConfig& c) -> int& { return c.net.rdb_layers; }));
    t.push_back(int_field("stages", [](RunConfig& c) -> int& { return c.stack.stages; }));
    t.push_back(bool_field("share_parameters",
                           [](RunConfig& c) -> bool& { return c.stack.share_parameters; }));
    t.push_back(int_field("batch_size", [](RunConfig& c) -> int& { return c.train.batch_size; }));
    t.push_back(int_field("epochs", [](RunConfig& c) -> int& { return c.train.epochs; }));
    t.push_back(real_field("lr0", [](RunConfig& c) -> double& { return c.train.lr0; }));
    t.push_back(int_field("halve_every", [](RunConfig& c) -> int& { return c.train.halve_every; }));
    t.push_back(
        int_field("lr_floor_epoch", [](RunConfig& c) -> int& { return c.train.lr_floor_epoch; }));
    t.push_back(real_field("lr_floor", [](RunConfig& c) -> double& { return c.train.lr_floor; }));
    t.push_back(real_field("adam_beta1", [](RunConfig& c) -> double& { return c.train.adam_beta1; }));
    t.push_back(real_field("adam_beta2", [](RunConfig& c) -> double& { return c.train.adam_beta2; }));
    t.push_back(real_field("adam_eps", [](RunConfig& c) -> double& { return c.train.adam_eps; }));
    t.push_back(int_field("crop", [](RunConfig& c) -> int& { return c.train.crop; }));
    t.push_back(bool_field("flip", [](RunConfig& c) -> bool& { return c.train.flip; }));
    t.push_back({"seed", [](const RunConfig& c) { return json(c.train.seed); },
                 [](RunConfig& c, const json& v) {
                   if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                     throw ConfigError("seed must be a non-negative integer");
                   }
                   c.train.seed = v.get<std::uint64_t>();
                 }});
    t.push_back(real_field("lambda", [](RunConfig& c) -> double& { return c.loss.lambda; }));
    t.push_back({"extractor",
                 [](const RunConfig& c) { return json(to_string(c.loss.extractor.kind)); },
                 [](RunConfig& c, const json& v) {
                   if (!v.is_string()) throw ConfigError("extractor must be a string");
                   c.loss.extractor.kind = parse_extractor_kind(v.get<std::string>());
                 }});
    t.push_back({"extractor_seed", [](const RunConfig& c) { return json(c.loss.extractor.seed); },
                 [](RunConfig& c, const json& v) {
                   if (!v.is_number_integer()) throw ConfigError("extractor_seed must be an integer");
                   c.loss.extractor.seed = v.get<std::uint64_t>();
                 }});
    t.push_back({"extractor_weights",
                 [](const RunConfig& c) { return json(c.loss.extractor.weights.string()); },
                 [](RunConfig& c, const json& v) {
                   if (!v.is_string()) throw ConfigError("extractor_weights must be a path string");
                   c.loss.extractor.weights = v.get<std::string>();
                 }});
    return t;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

}  // namespace

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& f : fields()) j[f.key] = f.get(*this);
  return j;
}

void RunConfig::apply(const json& flat) {
  if (!flat.is_object()) throw ConfigError("config must be a flat JSON object");
  for (const auto& [key, value] : flat.items()) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError("unknown config key '" + key + "'");
    if (value.is_object() || value.is_array()) {
      throw ConfigError("config key '" + key + "' must hold a scalar value");
    }
    f->set(*this, value);
  }
  // The loss always follows the model's stage count.
  if (flat.contains("stages")) loss.stages = stack.stages;
}

void RunConfig::apply_assignment(const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError("unknown config key '" + key + "'");
  json parsed;
  const json current = f->get(*this);
  if (current.is_string()) {
    parsed = value;
  } else {
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      throw ConfigError("cannot parse value '" + value + "' for key '" + key + "'");
    }
  }
  apply(json{{key, parsed}});
}

RunConfig RunConfig::from_json(const json& flat, const RunConfig& base) {
  RunConfig c = base;
  c.apply(flat);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return from_json(j, base);
}

}  // namespace tnet
