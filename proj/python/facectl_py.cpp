#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "facectl/animation.hpp"
#include "facectl/curve_engine.hpp"
#include "facectl/dataset_builder.hpp"
#include "facectl/error.hpp"
#include "facectl/eval_harness.hpp"
#include "facectl/face_render.hpp"
#include "facectl/similarity.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace facectl;

namespace {

py::object to_py(const nlohmann::json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

nlohmann::json from_py(const py::object& obj) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

using Pixels = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using Reals = py::array_t<double, py::array::c_style | py::array::forcecast>;

Frame to_frame(const Pixels& a) {
    if (a.ndim() != 2) throw DimensionError("image must be a 2-D uint8 array");
    Frame f(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), f.pixels.begin());
    return f;
}

Pixels to_array(const Frame& f) {
    Pixels a({f.height, f.width});
    std::copy(f.pixels.begin(), f.pixels.end(), a.mutable_data());
    return a;
}

ControlVector to_vector(const Reals& a) { return ControlVector::from_span({a.data(), static_cast<std::size_t>(a.size())}); }

Reals to_array(const ControlVector& v) {
    Reals a(static_cast<py::ssize_t>(kNumControls));
    std::copy(v.storage().begin(), v.storage().end(), a.mutable_data());
    return a;
}

fs::path manifest_path(const fs::path& p) { return fs::is_directory(p) ? p / kManifestFile : p; }

BezierSegment segment(const std::array<std::array<double, 2>, 4>& pts) {
    return {{pts[0][0], pts[0][1]}, {pts[1][0], pts[1][1]}, {pts[2][0], pts[2][1]}, {pts[3][0], pts[3][1]}};
}

py::dict sampled(const SampledSequence& seq) {
    Reals times(static_cast<py::ssize_t>(seq.samples.size()));
    Reals values({static_cast<py::ssize_t>(seq.samples.size()), static_cast<py::ssize_t>(kNumControls)});
    auto* t = times.mutable_data();
    auto* v = values.mutable_data();
    for (const auto& s : seq.samples) {
        *t++ = s.timestamp;
        v = std::copy(s.vector.storage().begin(), s.vector.storage().end(), v);
    }
    py::dict d;
    d["timestamps"] = times;
    d["vectors"] = values;
    d["clamped_values"] = seq.clamped_values;
    return d;
}

py::dict report_dict(const EvalReport& r) {
    py::dict d;
    d["predictor"] = r.predictor;
    d["n"] = r.errors.n;
    d["mae"] = r.errors.mae;
    d["sd"] = r.errors.sd;
    d["sem"] = r.errors.sem;
    d["ci"] = py::make_tuple(r.errors.ci_lo, r.errors.ci_hi);
    return d;
}

}  // namespace

PYBIND11_MODULE(_facectl, m) {
    m.doc() = "Facial control curves, renderer, dataset builder and evaluation harness.";

    static py::handle error_type = py::exception<Error>(m, "FacectlError").release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = error_type(std::string(e.what()));
            err.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(error_type.ptr(), err.ptr());
        }
    });

    m.attr("NUM_CONTROLS") = kNumControls;
    m.attr("DEFAULT_TIMESTEP") = kDefaultTimestep;
    m.attr("DEFAULT_THRESHOLD") = kDefaultDedupThreshold;

    m.def("registry", [] { return to_py(registry_to_json(registry_default())); },
          "Control registry as a list of channel records.");
    m.def("neutral_vector", [] { return to_array(neutral_vector(registry_default())); });
    m.def("clamp", [](const Reals& v) { return to_array(clamp(to_vector(v), registry_default())); }, py::arg("vector"));
    m.def("is_legal", [](const Reals& v) { return is_legal(to_vector(v), registry_default()); }, py::arg("vector"));

    m.def("eval_bezier_at_time",
          [](const std::array<std::array<double, 2>, 4>& pts, double t) { return eval_bezier_at_time(segment(pts), t); },
          py::arg("points"), py::arg("t"), "Value of a (time, value) cubic at time t.");
    m.def("solve_bezier_time",
          [](const std::array<std::array<double, 2>, 4>& pts, double t) { return solve_bezier_time(segment(pts), t); },
          py::arg("points"), py::arg("t"));

    py::class_<AnimationClip>(m, "Clip")
        .def_property_readonly("name", &AnimationClip::name)
        .def_property_readonly("duration", &AnimationClip::duration)
        .def("to_json", [](const AnimationClip& c) { return to_py(clip_to_json(c, registry_default())); })
        .def_static("from_json", [](const py::object& doc) { return clip_from_json(from_py(doc), registry_default()); })
        .def("__repr__", [](const AnimationClip& c) { return "<Clip " + c.name() + " " + std::to_string(c.duration()) + " s>"; });

    m.def("load_clip", [](const fs::path& p) { return load_clip(p); }, py::arg("path"));
    m.def("save_clip", [](const AnimationClip& c, const fs::path& p) { save_clip(c, p); }, py::arg("clip"), py::arg("path"));
    m.def("synthetic_clips", [](std::size_t n, std::uint64_t seed) { return make_synthetic_clips(n, seed); },
          py::arg("count"), py::arg("seed") = 0);
    m.def("sample_count", &sample_count, py::arg("duration"), py::arg("timestep") = kDefaultTimestep);
    m.def("sample_clip",
          [](const AnimationClip& c, double s) { return sampled(sample_clip(c, s, registry_default())); },
          py::arg("clip"), py::arg("timestep") = kDefaultTimestep,
          "Dict with 'timestamps' (n,) and 'vectors' (n, 30).");

    m.def("render",
          [](const Reals& v, int resolution) {
              const auto vec = to_vector(v);
              Frame f;
              {
                  py::gil_scoped_release release;
                  f = render(vec, default_geometry(), resolution);
              }
              return to_array(f);
          },
          py::arg("vector"), py::arg("resolution") = kDefaultResolution, "Grayscale face as a (res, res) uint8 array.");

    m.def("ssim",
          [](const Pixels& a, const Pixels& b, const std::string& window) {
              SsimParams p;
              p.window = parse_window(window);
              return ssim(to_frame(a), to_frame(b), p);
          },
          py::arg("x"), py::arg("y"), py::arg("window") = "sliding:8:8");
    m.def("dedup",
          [](const std::vector<Pixels>& frames, double theta, const std::string& window) {
              std::vector<Frame> fs;
              for (const auto& a : frames) fs.push_back(to_frame(a));
              SsimParams p;
              p.window = parse_window(window);
              return dedup(fs, theta, p).kept_indices;
          },
          py::arg("frames"), py::arg("theta") = kDefaultDedupThreshold, py::arg("window") = "sliding:8:8",
          "Indices of the frames kept by the near-duplicate filter.");

    m.def("build_dataset",
          [](const fs::path& out, const std::vector<AnimationClip>& clips, const py::dict& config) {
              BuildConfig cfg = build_config_from_json(from_py(config));
              cfg.output_root = out;
              BuildResult r;
              {
                  py::gil_scoped_release release;
                  r = build_dataset(clips, cfg);
              }
              py::dict d;
              d["records"] = r.manifest.records.size();
              d["train"] = r.manifest.count(Split::Train);
              d["test"] = r.manifest.count(Split::Test);
              d["samples"] = r.summary.samples;
              d["removed_duplicates"] = r.summary.removed_duplicates;
              d["manifest"] = out / kManifestFile;
              return d;
          },
          py::arg("out"), py::arg("clips"), py::arg("config") = py::dict(),
          "Build a dataset; config keys follow the build config JSON.");

    m.def("load_manifest",
          [](const fs::path& p) {
              const auto man = read_manifest(manifest_path(p));
              const auto n = static_cast<py::ssize_t>(man.records.size());
              Reals vectors({n, static_cast<py::ssize_t>(kNumControls)});
              Reals times(n);
              py::list ids, images, clips, splits;
              auto* v = vectors.mutable_data();
              auto* t = times.mutable_data();
              for (const auto& r : man.records) {
                  v = std::copy(r.vector.storage().begin(), r.vector.storage().end(), v);
                  *t++ = r.timestamp;
                  ids.append(r.id);
                  images.append((man.root / r.image_path).string());
                  clips.append(r.clip_name);
                  splits.append(std::string(to_string(r.split)));
              }
              py::dict d;
              d["ids"] = ids;
              d["images"] = images;
              d["clips"] = clips;
              d["splits"] = splits;
              d["timestamps"] = times;
              d["vectors"] = vectors;
              d["build_config"] = to_py(man.build_config);
              return d;
          },
          py::arg("path"), "Manifest records as columns; image paths are absolute.");

    m.def("channel_stats", [](const fs::path& p) { return to_py(stats_to_json(channel_stats(read_manifest(manifest_path(p))))); },
          py::arg("manifest"));
    m.def("histograms",
          [](const fs::path& p, int bins) { return to_py(histograms_to_json(histograms(read_manifest(manifest_path(p)), bins))); },
          py::arg("manifest"), py::arg("bins") = 20);

    m.def("verify",
          [](const fs::path& p, std::size_t threads) {
              const auto man = read_manifest(manifest_path(p));
              VerifyReport r;
              {
                  py::gil_scoped_release release;
                  r = verify_dataset(man, threads);
              }
              py::dict d;
              d["records"] = r.records_checked;
              d["alignment_violations"] = r.alignment_violations;
              d["image_violations"] = r.image_violations;
              d["structural_violations"] = r.structural_violations;
              d["messages"] = r.messages;
              return d;
          },
          py::arg("manifest"), py::arg("threads") = 0);

    m.def("summarize_errors",
          [](const Reals& e) {
              return report_dict({"errors", summarize_errors({e.data(), static_cast<std::size_t>(e.size())})});
          },
          py::arg("abs_errors"), "MAE, sample SD, SEM and 95% CI of absolute errors.");

    m.def("evaluate",
          [](const fs::path& p, const std::vector<std::string>& predictors, std::optional<fs::path> predictions,
             std::uint64_t seed) {
              const auto man = read_manifest(manifest_path(p));
              const auto train = man.subset(Split::Train), test = man.subset(Split::Test);
              std::vector<std::unique_ptr<Predictor>> owned;
              for (const auto& name : predictors) {
                  if (name == "rc") {
                      owned.push_back(std::make_unique<RcPredictor>(man.registry, seed));
                  } else if (name == "rt") {
                      owned.push_back(std::make_unique<RtPredictor>(train, seed));
                  } else if (name == "nn") {
                      owned.push_back(std::make_unique<NnPredictor>(train, man.root));
                  } else if (name == "perfect") {
                      owned.push_back(std::make_unique<PerfectPredictor>(test));
                  } else {
                      throw ParameterError("unknown predictor '" + name + "'");
                  }
              }
              if (predictions) owned.push_back(std::make_unique<ExternalPredictor>(*predictions, predictions->stem().string()));
              std::vector<const Predictor*> ptrs;
              for (const auto& o : owned) ptrs.push_back(o.get());
              std::vector<EvalReport> reports;
              {
                  py::gil_scoped_release release;
                  reports = compare(ptrs, test, man.root, man.registry);
              }
              py::list out;
              for (const auto& r : reports) out.append(report_dict(r));
              return out;
          },
          py::arg("manifest"), py::arg("predictors") = std::vector<std::string>{"rc", "rt", "nn"},
          py::arg("predictions") = py::none(), py::arg("seed") = 0,
          "Score predictors on the test split; 'predictions' is a JSONL of {id, values}.");
}
