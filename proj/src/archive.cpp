#include "tnet/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace tnet {

static_assert(std::endian::native == std::endian::little,
              "archive I/O assumes a little-endian host");

const Tensor<float>* Archive::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.value;
  }
  return nullptr;
}

const Tensor<float>& Archive::get(const std::string& name) const {
  const Tensor<float>* t = find(name);
  if (!t) throw IoError("archive has no tensor '" + name + "'");
  return *t;
}

void save_archive(const std::filesystem::path& path, const Archive& archive) {
  nlohmann::ordered_json header;
  header["meta"] = archive.meta;
  header["tensors"] = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto& t : archive.tensors) {
    const Shape& s = t.value.shape();
    const std::uint64_t nbytes = t.value.size() * sizeof(float);
    nlohmann::ordered_json entry;
    entry["name"] = t.name;
    entry["shape"] = {s.n, s.c, s.h, s.w};
    entry["dtype"] = "float32";
    entry["offset"] = offset;
    entry["nbytes"] = nbytes;
    header["tensors"].push_back(entry);
    offset += nbytes;
  }
  const std::string text = header.dump();
  const std::uint64_t len = text.size();

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(kArchiveMagic, 8);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : archive.tensors) {
      out.write(reinterpret_cast<const char*>(t.value.data()),
                static_cast<std::streamsize>(t.value.size() * sizeof(float)));
    }
    if (!out) throw IoError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move archive into place at '" + path.string() + "'");
}

Archive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open archive '" + path.string() + "'");
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::memcmp(magic, kArchiveMagic, 8) != 0) {
    throw IoError("'" + path.string() + "' is not a tensor archive");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError("truncated archive header in '" + path.string() + "'");

  Archive archive;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt archive header in '" + path.string() + "': " + e.what());
  }
  archive.meta = header.value("meta", nlohmann::json::object());
  const auto data_start = in.tellg();
  for (const auto& entry : header.at("tensors")) {
    if (entry.at("dtype").get<std::string>() != "float32") {
      throw IoError("unsupported dtype in '" + path.string() + "'");
    }
    const auto dims = entry.at("shape").get<std::vector<int>>();
    if (dims.size() != 4) throw IoError("tensor shapes must have 4 dims");
    Shape s{dims[0], dims[1], dims[2], dims[3]};
    Tensor<float> t(s);
    const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
    if (nbytes != t.size() * sizeof(float)) throw IoError("tensor byte count mismatch");
    in.seekg(data_start + static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(nbytes));
    if (!in) throw IoError("truncated tensor data in '" + path.string() + "'");
    archive.tensors.push_back({entry.at("name").get<std::string>(), std::move(t)});
  }
  return archive;
}

}  // namespace tnet
