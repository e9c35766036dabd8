#pragma once

// Single-file tensor archive.
//
//   bytes 0..7   magic "TNETARC1"
//   bytes 8..15  header length L, uint64 little-endian
//   next L bytes UTF-8 JSON header:
//                  {"meta": {...},
//                   "tensors": [{"name", "shape": [n,c,h,w], "dtype": "float32",
//                                "offset", "nbytes"}, ...]}
//   remainder    raw tensor data, float32 little-endian, offsets relative to
//                the first byte after the header
//
// Used for checkpoints and for pretrained feature-extractor weights.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tnet/tensor.hpp"

namespace tnet {

struct NamedTensor {
  std::string name;
  Tensor<float> value;
};

struct Archive {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  [[nodiscard]] const Tensor<float>* find(const std::string& name) const;
  const Tensor<float>& get(const std::string& name) const;
};

inline constexpr char kArchiveMagic[9] = "TNETARC1";

void save_archive(const std::filesystem::path& path, const Archive& archive);
Archive load_archive(const std::filesystem::path& path);

}  // namespace tnet
