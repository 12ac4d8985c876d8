#include "facectl/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "facectl/animation.hpp"
#include "facectl/control_space.hpp"
#include "facectl/dataset_builder.hpp"
#include "facectl/error.hpp"
#include "facectl/eval_harness.hpp"
#include "facectl/face_render.hpp"
#include "facectl/image_io.hpp"

namespace facectl {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write " + out);
    f << text;
    if (!f) throw IoError("failed writing " + out);
}

std::optional<fs::path> env_root() {
    if (const char* v = std::getenv(kDatasetRootEnv); v && *v) return fs::path(v);
    return std::nullopt;
}

// A dataset directory or a manifest file; falls back to the environment.
fs::path manifest_path(const std::string& given) {
    fs::path p;
    if (!given.empty()) {
        p = given;
    } else if (auto root = env_root()) {
        p = *root;
    } else {
        throw ParameterError(std::string("no manifest given (use --manifest or set ") + kDatasetRootEnv + ")");
    }
    if (fs::is_directory(p)) p /= kManifestFile;
    return p;
}

FaceGeometry geometry_or_default(const std::string& path, const ControlRegistry& registry) {
    return path.empty() ? default_geometry() : load_geometry(path, registry);
}

std::string format_doc(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

// Keeps the error line machine-parseable.
std::string one_line(std::string text) {
    for (auto& c : text) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return text;
}

struct Options {
    // shared
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::string out;
    std::string manifest;
    std::string format = "csv";
    std::string geometry;

    // gen-clips
    std::size_t count = 20;

    // sample / render
    std::string clip;
    double timestep = kDefaultTimestep;
    double time = 0.0;
    bool neutral = false;
    int resolution = kDefaultResolution;

    // build
    std::string config;
    std::string clips_dir;
    std::size_t synthetic = 0;
    double theta = kDefaultDedupThreshold;
    std::string window = "sliding:8:8";
    double split_fraction = kDefaultSplitFraction;
    std::string split_mode = "record";

    // hist / plot
    int bins = 20;

    // eval
    std::vector<std::string> predictors;
    std::string predictions;
};

int cmd_gen_clips(const Options& o) {
    if (o.out.empty()) throw ParameterError("gen-clips needs --out");
    const auto& reg = registry_default();
    const auto clips = make_synthetic_clips(o.count, o.seed, reg);
    fs::create_directories(o.out);
    for (const auto& c : clips) save_clip(c, fs::path(o.out) / (c.name() + ".json"), reg);
    std::cout << "wrote " << clips.size() << " clips to " << o.out << "\n";
    return 0;
}

int cmd_sample(const Options& o) {
    const auto& reg = registry_default();
    const auto clip = load_clip(o.clip, reg);
    const auto seq = sample_clip(clip, o.timestep, reg);
    std::ostringstream os;
    for (std::size_t k = 0; k < seq.samples.size(); ++k) {
        const auto& s = seq.samples[k];
        os << nlohmann::json{{"clip", clip.name()}, {"k", k}, {"timestamp", s.timestamp}, {"vector", s.vector.storage()}}
                  .dump()
           << '\n';
    }
    emit(os.str(), o.out);
    if (seq.clamped_values) std::cerr << "warning: clamped " << seq.clamped_values << " control values\n";
    return 0;
}

int cmd_render(const Options& o) {
    if (o.out.empty()) throw ParameterError("render needs --out");
    const auto& reg = registry_default();
    const auto geo = geometry_or_default(o.geometry, reg);
    ControlVector v = neutral_vector(reg);
    double t = 0.0;
    if (!o.neutral) {
        if (o.clip.empty()) throw ParameterError("render needs --clip or --neutral");
        t = o.time;
        v = sample_at(load_clip(o.clip, reg), t, reg);
    }
    Frame f = render(v, geo, o.resolution, reg);
    f.source_timestamp = t;
    write_png(o.out, f);
    std::cout << "checksum " << std::hex << frame_checksum(f) << std::dec << "\n";
    return 0;
}

int cmd_build(const Options& o, const CLI::App& app) {
    const auto& reg = registry_default();
    auto set = [&](const char* name) { return app.count(name) > 0; };

    BuildConfig cfg;
    if (!o.config.empty()) cfg = build_config_from_json(read_json(o.config), cfg);
    if (auto root = env_root()) cfg.output_root = *root;
    if (set("--out")) cfg.output_root = o.out;
    if (set("--timestep")) cfg.timestep = o.timestep;
    if (set("--theta")) cfg.theta = o.theta;
    if (set("--window")) cfg.window = parse_window(o.window);
    if (set("--split-fraction")) cfg.split_fraction = o.split_fraction;
    if (set("--split-mode")) cfg.split_mode = split_mode_from_string(o.split_mode);
    if (set("--seed")) cfg.seed = o.seed;
    if (set("--resolution")) cfg.resolution = o.resolution;
    if (set("--threads")) cfg.threads = o.threads;
    cfg.validate();

    std::vector<AnimationClip> clips;
    if (!o.clips_dir.empty() && o.synthetic > 0) throw ParameterError("use either --clips or --synthetic");
    if (!o.clips_dir.empty()) {
        clips = load_clip_dir(o.clips_dir, reg);
    } else if (o.synthetic > 0) {
        clips = make_synthetic_clips(o.synthetic, cfg.seed, reg);
    } else {
        throw ParameterError("build needs --clips DIR or --synthetic N");
    }
    if (clips.empty()) throw EmptyInputError("no clips to build from");

    const auto geo = geometry_or_default(o.geometry, reg);
    const auto result = build_dataset(clips, cfg, geo, reg);
    const auto& s = result.summary;
    if (s.clamped_values) std::cerr << "warning: clamped " << s.clamped_values << " control values\n";
    if (s.clamped_handles) std::cerr << "warning: clamped " << s.clamped_handles << " bezier handle times\n";
    if (s.clips_outside_duration_regime) {
        std::cerr << "warning: " << s.clips_outside_duration_regime << " clips last less than 1 s or more than 15 s\n";
    }
    const auto& m = result.manifest;
    std::cout << "clips " << s.clips << " samples " << s.samples << " removed " << s.removed_duplicates << " records "
              << m.records.size() << " train " << m.count(Split::Train) << " test " << m.count(Split::Test) << "\n"
              << "manifest " << (cfg.output_root / kManifestFile).string() << "\n";
    return 0;
}

int cmd_stats(const Options& o) {
    const auto m = read_manifest(manifest_path(o.manifest));
    const auto stats = channel_stats(m);
    emit(o.format == "json" ? format_doc(stats_to_json(stats)) : stats_to_csv(stats), o.out);
    return 0;
}

int cmd_hist(const Options& o) {
    const auto m = read_manifest(manifest_path(o.manifest));
    const auto h = histograms(m, o.bins);
    emit(o.format == "json" ? format_doc(histograms_to_json(h)) : histograms_to_csv(h), o.out);
    return 0;
}

int cmd_plot(const Options& o) {
    const auto m = read_manifest(manifest_path(o.manifest));
    emit(histograms_to_svg(histograms(m, o.bins)), o.out);
    return 0;
}

int cmd_eval(const Options& o) {
    const auto m = read_manifest(manifest_path(o.manifest));
    const auto test = m.subset(Split::Test);
    const auto train = m.subset(Split::Train);
    std::vector<std::unique_ptr<Predictor>> owned;
    for (const auto& name : o.predictors) {
        if (name == "rc") {
            owned.push_back(std::make_unique<RcPredictor>(m.registry, o.seed));
        } else if (name == "rt") {
            owned.push_back(std::make_unique<RtPredictor>(train, o.seed));
        } else if (name == "nn") {
            owned.push_back(std::make_unique<NnPredictor>(train, m.root, o.threads));
        } else if (name == "perfect") {
            owned.push_back(std::make_unique<PerfectPredictor>(test));
        } else {
            throw ParameterError("unknown predictor '" + name + "' (expected rc, rt, nn or perfect)");
        }
    }
    if (!o.predictions.empty()) {
        owned.push_back(std::make_unique<ExternalPredictor>(o.predictions, fs::path(o.predictions).stem().string()));
    }
    if (owned.empty()) throw ParameterError("eval needs --predictors or --predictions");
    std::vector<const Predictor*> ptrs;
    for (const auto& p : owned) ptrs.push_back(p.get());
    ScoreOptions opts;
    opts.threads = o.threads;
    const auto reports = compare(ptrs, test, m.root, m.registry, opts);
    if (o.format == "csv") {
        emit(reports_to_csv(reports), o.out);
    } else if (o.format == "json") {
        emit(format_doc(reports_to_json(reports)), o.out);
    } else {
        emit(reports_to_table(reports), o.out);
    }
    return 0;
}

int cmd_verify(const Options& o) {
    const auto m = read_manifest(manifest_path(o.manifest));
    const auto r = verify_dataset(m, o.threads);
    std::cout << "records " << r.records_checked << " alignment_violations " << r.alignment_violations
              << " image_violations " << r.image_violations << " structural_violations " << r.structural_violations
              << "\n";
    for (const auto& msg : r.messages) std::cerr << "  " << msg << "\n";
    if (r.total_violations() > 0) {
        std::cerr << "error: kind=verify_failed message=" << r.total_violations() << " violations\n";
        return 1;
    }
    return 0;
}

int cmd_registry(const Options& o) {
    emit(format_doc(registry_to_json(registry_default())), o.out);
    return 0;
}

int cmd_geometry(const Options& o) {
    emit(format_doc(geometry_to_json(default_geometry(), registry_default())), o.out);
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"facectl: control-curve engine and face dataset pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "facectl 0.1.0");
    Options o;

    auto add_manifest = [&](CLI::App* sub) {
        sub->add_option("--manifest,-m", o.manifest, "Manifest file or dataset directory");
    };
    auto add_out = [&](CLI::App* sub, const std::string& help) { sub->add_option("--out,-o", o.out, help); };

    auto* gen = app.add_subcommand("gen-clips", "Write seeded synthetic animation clips");
    gen->add_option("--count,-n", o.count, "Number of clips")->check(CLI::PositiveNumber);
    gen->add_option("--seed", o.seed, "Random seed");
    add_out(gen, "Output directory");

    auto* sample = app.add_subcommand("sample", "Sample a clip at a fixed timestep (JSONL)");
    sample->add_option("--clip", o.clip, "Clip file")->required();
    sample->add_option("--timestep,-s", o.timestep, "Sampling timestep in seconds");
    sample->add_option("--seed", o.seed, "Unused; accepted for uniformity");
    add_out(sample, "Output file (default stdout)");

    auto* rend = app.add_subcommand("render", "Render one control vector to PNG");
    rend->add_option("--clip", o.clip, "Clip file");
    rend->add_option("--time,-t", o.time, "Clip time in seconds");
    rend->add_flag("--neutral", o.neutral, "Render the rest pose");
    rend->add_option("--resolution,-r", o.resolution, "Image size in pixels");
    rend->add_option("--geometry", o.geometry, "Face geometry JSON");
    rend->add_option("--seed", o.seed, "Unused; accepted for uniformity");
    add_out(rend, "PNG path");

    auto* build = app.add_subcommand("build", "Sample, render, deduplicate and split into a dataset");
    build->add_option("--config,-c", o.config, "Build config JSON (flags take precedence)");
    build->add_option("--clips", o.clips_dir, "Directory of clip files");
    build->add_option("--synthetic", o.synthetic, "Generate this many synthetic clips from --seed");
    build->add_option("--timestep,-s", o.timestep, "Sampling timestep in seconds");
    build->add_option("--theta", o.theta, "Dedup SSIM threshold");
    build->add_option("--window", o.window, "SSIM window: global | sliding:<size>[:<stride>]");
    build->add_option("--split-fraction", o.split_fraction, "Fraction of records in train");
    build->add_option("--split-mode", o.split_mode, "record | clip");
    build->add_option("--seed", o.seed, "Random seed");
    build->add_option("--resolution,-r", o.resolution, "Image size in pixels");
    build->add_option("--threads,-j", o.threads, "Worker threads (0 = all cores)");
    build->add_option("--geometry", o.geometry, "Face geometry JSON");
    add_out(build, std::string("Dataset root (or set ") + kDatasetRootEnv + ")");

    auto* stats = app.add_subcommand("stats", "Per-channel summary statistics");
    add_manifest(stats);
    stats->add_option("--format,-f", o.format, "csv | json");
    stats->add_option("--seed", o.seed, "Unused; accepted for uniformity");
    add_out(stats, "Output file (default stdout)");

    auto* hist = app.add_subcommand("hist", "Per-channel histograms over the legal range");
    add_manifest(hist);
    hist->add_option("--bins,-b", o.bins, "Number of bins");
    hist->add_option("--format,-f", o.format, "csv | json");
    hist->add_option("--seed", o.seed, "Unused; accepted for uniformity");
    add_out(hist, "Output file (default stdout)");

    auto* plot = app.add_subcommand("plot", "SVG grid of channel distributions");
    add_manifest(plot);
    plot->add_option("--bins,-b", o.bins, "Number of bins");
    plot->add_option("--seed", o.seed, "Unused; accepted for uniformity");
    add_out(plot, "SVG path (default stdout)");

    auto* eval = app.add_subcommand("eval", "Score predictors on the test split");
    add_manifest(eval);
    eval->add_option("--predictors,-p", o.predictors, "Comma list of rc, rt, nn, perfect")->delimiter(',');
    eval->add_option("--predictions", o.predictions, "JSONL of {id, values} scored as an extra row");
    eval->add_option("--seed", o.seed, "Seed for the random baselines");
    eval->add_option("--threads,-j", o.threads, "Worker threads (0 = all cores)");
    eval->add_option("--format,-f", o.format, "table | csv | json")->default_str("table");
    add_out(eval, "Output file (default stdout)");

    auto* verify = app.add_subcommand("verify", "Re-derive every record and compare bit for bit");
    add_manifest(verify);
    verify->add_option("--threads,-j", o.threads, "Worker threads (0 = all cores)");
    verify->add_option("--seed", o.seed, "Unused; accepted for uniformity");

    auto* reg = app.add_subcommand("registry", "Export the control registry as JSON");
    add_out(reg, "Output file (default stdout)");
    auto* geo = app.add_subcommand("geometry", "Export the default face geometry as JSON");
    add_out(geo, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: kind=usage_error message=" << one_line(e.what()) << "\n";
        return 2;
    }

    try {
        if (*gen) return cmd_gen_clips(o);
        if (*sample) return cmd_sample(o);
        if (*rend) return cmd_render(o);
        if (*build) return cmd_build(o, *build);
        if (*stats) return cmd_stats(o);
        if (*hist) return cmd_hist(o);
        if (*plot) return cmd_plot(o);
        if (*eval) {
            if (eval->count("--format") == 0) o.format = "table";
            return cmd_eval(o);
        }
        if (*verify) return cmd_verify(o);
        if (*reg) return cmd_registry(o);
        if (*geo) return cmd_geometry(o);
    } catch (const Error& e) {
        std::cerr << "error: kind=" << to_string(e.kind()) << " message=" << one_line(e.what()) << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: kind=io_error message=" << one_line(e.what()) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: kind=internal_error message=" << one_line(e.what()) << "\n";
        return 1;
    }
    return 2;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> storage(args);
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    argv.push_back(nullptr);
    return run_cli(static_cast<int>(storage.size()), argv.data());
}

}  // namespace facectl
