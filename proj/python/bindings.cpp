// Python bindings. Images cross the boundary as float32 arrays of shape
// (H, W, 3) in [0, 1]; depth maps as float64 (H, W); configs as JSON text
// (the Python package converts to and from dicts).

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <memory>

#include "tnet/checkpoint.hpp"
#include "tnet/config.hpp"
#include "tnet/haze.hpp"
#include "tnet/image.hpp"
#include "tnet/losses.hpp"
#include "tnet/metrics.hpp"
#include "tnet/stack.hpp"
#include "tnet/trainer.hpp"

namespace py = pybind11;
using namespace tnet;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

ImageBuffer image_from(const FloatArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ShapeError("image must have shape (H, W, 3)");
  ImageBuffer img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::memcpy(img.pixels.data(), a.data(), img.pixels.size() * sizeof(float));
  return img;
}

FloatArray image_to(const ImageBuffer& img) {
  const ImageBuffer unit = img.domain == ValueDomain::Unit ? img : to_unit_domain(img);
  FloatArray a({unit.height, unit.width, 3});
  std::memcpy(a.mutable_data(), unit.pixels.data(), unit.pixels.size() * sizeof(float));
  return a;
}

ScalarField field_from(const DoubleArray& a) {
  if (a.ndim() != 2) throw ShapeError("depth map must have shape (H, W)");
  ScalarField f(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::memcpy(f.values.data(), a.data(), f.values.size() * sizeof(double));
  return f;
}

DoubleArray field_to(const ScalarField& f) {
  DoubleArray a({f.height, f.width});
  std::memcpy(a.mutable_data(), f.values.data(), f.values.size() * sizeof(double));
  return a;
}

RunConfig config_from(const std::string& preset, const std::string& overrides) {
  RunConfig c = RunConfig::preset(preset);
  if (!overrides.empty()) c.apply(nlohmann::json::parse(overrides));
  c.validate();
  return c;
}

py::dict manifest_dict(const ManifestEntry& e) {
  py::dict d;
  d["index"] = e.index;
  d["clean"] = e.clean_path;
  d["hazy"] = e.hazy_path;
  d["depth_kind"] = e.depth_kind;
  d["beta"] = e.beta_s;
  d["airlight"] = e.airlight;
  d["seed"] = e.seed;
  d["crop"] = py::make_tuple(e.crop_x, e.crop_y, e.crop_w, e.crop_h);
  return d;
}

// A float model together with the config it was built from.
struct Model {
  RunConfig config;
  std::unique_ptr<StackTNet<float>> net;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stacked T-Net dehazing core";

  py::register_exception<TrainingDiverged>(m, "TrainingDiverged", PyExc_RuntimeError);

  m.def("config_json", [](const std::string& preset, const std::string& overrides) {
    return config_from(preset, overrides).to_json().dump();
  }, py::arg("preset"), py::arg("overrides") = "");

  m.def("read_png", [](const std::filesystem::path& p) { return image_to(read_png(p)); });
  m.def("write_png", [](const std::filesystem::path& p, const FloatArray& a) { write_png(p, image_from(a)); });

  m.def("psnr", [](const FloatArray& pred, const FloatArray& gt) { return psnr(image_from(pred), image_from(gt)); });
  m.def("ssim", [](const FloatArray& pred, const FloatArray& gt) { return ssim(image_from(pred), image_from(gt)); });
  m.def("smooth_l1", &smooth_l1_pointwise, py::arg("e"));

  m.def("make_depth", [](const std::string& kind, int h, int w, std::uint64_t seed) {
    return field_to(make_depth(parse_depth_kind(kind), h, w, seed));
  }, py::arg("kind"), py::arg("height"), py::arg("width"), py::arg("seed"));
  m.def("transmission", [](const DoubleArray& depth, double beta) {
    return field_to(transmission_from_depth(field_from(depth), beta));
  }, py::arg("depth"), py::arg("beta"));
  m.def("apply_haze", [](const FloatArray& clean, const DoubleArray& depth, double beta, double airlight) {
    return image_to(apply_haze(image_from(clean), field_from(depth), beta, airlight).hazy);
  }, py::arg("clean"), py::arg("depth"), py::arg("beta"), py::arg("airlight"));
  m.def("invert_haze", [](const FloatArray& hazy, const DoubleArray& depth, double beta, double airlight,
                          double t_min) {
    const auto inv = invert_haze(image_from(hazy), field_from(depth), beta, airlight, t_min);
    py::array_t<bool> mask({inv.clean.height, inv.clean.width});
    auto* out = mask.mutable_data();
    for (std::size_t i = 0; i < inv.flagged.size(); ++i) out[i] = inv.flagged[i] != 0;
    return py::make_tuple(image_to(inv.clean), mask);
  }, py::arg("hazy"), py::arg("depth"), py::arg("beta"), py::arg("airlight"), py::arg("t_min") = 0.05);
  m.def("procedural_scene", [](int h, int w, std::uint64_t seed) { return image_to(procedural_scene(h, w, seed)); },
        py::arg("height"), py::arg("width"), py::arg("seed"));

  m.def("build_dataset", [](const std::filesystem::path& clean_dir, const std::filesystem::path& out_dir, int count,
                            std::uint64_t seed, int crop, std::pair<double, double> beta,
                            std::pair<double, double> airlight, const std::vector<std::string>& kinds) {
    DatasetOptions o;
    o.clean_dir = clean_dir;
    o.out_dir = out_dir;
    o.count = count;
    o.seed = seed;
    o.crop = crop;
    o.beta_range = beta;
    o.airlight_range = airlight;
    o.depth_kinds.clear();
    for (const auto& k : kinds) o.depth_kinds.push_back(parse_depth_kind(k));
    py::list out;
    for (const auto& e : build_dataset(o)) out.append(manifest_dict(e));
    return out;
  }, py::arg("clean_dir"), py::arg("out_dir"), py::arg("count"), py::arg("seed") = 0, py::arg("crop") = 0,
     py::arg("beta_range") = std::pair{0.4, 1.6}, py::arg("airlight_range") = std::pair{0.7, 1.0},
     py::arg("depth_kinds") = std::vector<std::string>{"ramp", "radial", "smooth-noise"});

  py::class_<Model>(m, "Model")
      .def(py::init([](const std::string& preset, const std::string& overrides, std::uint64_t seed) {
             Model md;
             md.config = config_from(preset, overrides);
             md.net = std::make_unique<StackTNet<float>>(md.config.net, md.config.stack, seed);
             return md;
           }),
           py::arg("preset") = "desk", py::arg("overrides") = "", py::arg("seed") = 0)
      .def_static("load", [](const std::filesystem::path& p) {
        const auto ckpt = load_checkpoint(p);
        Model md;
        md.config = ckpt.config;
        md.net = std::make_unique<StackTNet<float>>(ckpt.config.net, ckpt.config.stack, 0);
        restore_parameters(*md.net, ckpt.archive);
        return md;
      })
      .def_property_readonly("config_json", [](const Model& md) { return md.config.to_json().dump(); })
      .def_property_readonly("stages", [](const Model& md) { return md.net->stages(); })
      .def_property_readonly("parameter_count", [](const Model& md) { return md.net->parameter_count(); })
      .def("parameter_names", [](const Model& md) {
        std::vector<std::string> names;
        for (const auto& [name, v] : md.net->named_parameters()) names.push_back(name);
        return names;
      })
      .def("dehaze", [](const Model& md, const FloatArray& hazy, int stages) {
        ImageBuffer out;
        {
          py::gil_scoped_release release;
          out = dehaze(*md.net, image_from(hazy), stages);
        }
        return image_to(out);
      }, py::arg("hazy"), py::arg("stages") = 0)
      .def("dehaze_stages", [](const Model& md, const FloatArray& hazy, int stages) {
        std::vector<ImageBuffer> outs;
        {
          py::gil_scoped_release release;
          outs = dehaze_stages(*md.net, image_from(hazy), stages);
        }
        py::list l;
        for (const auto& o : outs) l.append(image_to(o));
        return l;
      }, py::arg("hazy"), py::arg("stages") = 0);

  m.def("train", [](const std::filesystem::path& data, const std::filesystem::path& out, const std::string& preset,
                    const std::string& overrides, const std::filesystem::path& resume,
                    const std::function<void(const std::string&)>& progress) {
    TrainOptions o;
    o.dataset_dir = data;
    o.out_dir = out;
    o.config = config_from(preset, overrides);
    o.resume = resume;
    if (progress) {
      o.progress = [progress](const std::string& line) {
        py::gil_scoped_acquire acquire;
        progress(line);
      };
    }
    TrainResult r;
    {
      py::gil_scoped_release release;
      r = train(o);
    }
    py::list epochs;
    for (const auto& e : r.epochs) {
      py::dict d;
      d["epoch"] = e.epoch;
      d["lr"] = e.lr;
      d["steps"] = e.steps;
      d["mean_loss"] = e.mean_loss;
      d["eval_psnr"] = e.eval_psnr;
      d["eval_ssim"] = e.eval_ssim;
      d["best_psnr"] = e.best_psnr;
      epochs.append(d);
    }
    py::dict d;
    d["epochs"] = epochs;
    d["step_losses"] = r.step_losses;
    d["eval_hazy_psnr"] = r.eval_hazy_psnr;
    d["train_samples"] = r.train_samples;
    d["eval_samples"] = r.eval_samples;
    d["best"] = r.best_path;
    d["last"] = r.last_path;
    d["log"] = r.log_path;
    return d;
  }, py::arg("data"), py::arg("out"), py::arg("preset") = "desk", py::arg("overrides") = "",
     py::arg("resume") = std::filesystem::path(), py::arg("progress") = nullptr);
}
