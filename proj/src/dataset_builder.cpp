#include "facectl/dataset_builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "facectl/error.hpp"
#include "facectl/image_io.hpp"
#include "facectl/numeric.hpp"
#include "facectl/parallel.hpp"
#include "facectl/random.hpp"

namespace facectl {

namespace fs = std::filesystem;

std::string_view to_string(Split split) { return split == Split::Train ? "train" : "test"; }

std::string_view to_string(SplitMode mode) { return mode == SplitMode::Record ? "record" : "clip"; }

SplitMode split_mode_from_string(std::string_view text) {
    if (text == "record") return SplitMode::Record;
    if (text == "clip") return SplitMode::Clip;
    throw ParameterError("split mode must be 'record' or 'clip', got '" + std::string(text) + "'");
}

void BuildConfig::validate() const {
    if (!(timestep > 0.0) || !std::isfinite(timestep)) throw ParameterError("timestep must be positive");
    if (!(theta > 0.0 && theta <= 1.0)) throw ParameterError("dedup threshold must be in (0, 1]");
    if (!(split_fraction >= 0.0 && split_fraction <= 1.0)) throw ParameterError("split fraction must be in [0, 1]");
    if (resolution < 8) throw ParameterError("resolution must be at least 8");
    if (const auto* w = std::get_if<SlidingWindow>(&window)) {
        if (w->size <= 0 || w->stride <= 0 || w->size > resolution) {
            throw ParameterError("ssim window must fit inside the frame");
        }
    }
}

nlohmann::json build_config_to_json(const BuildConfig& cfg, const FaceGeometry& geo) {
    const SsimParams ssim_defaults;
    return {{"timestep", cfg.timestep},
            {"theta", cfg.theta},
            {"ssim_window", window_to_json(cfg.window)},
            {"ssim_k1", ssim_defaults.k1},
            {"ssim_k2", ssim_defaults.k2},
            {"ssim_L", ssim_defaults.dynamic_range},
            {"split_fraction", cfg.split_fraction},
            {"split_mode", std::string(to_string(cfg.split_mode))},
            {"seed", cfg.seed},
            {"resolution", cfg.resolution},
            {"geometry_version", geo.version}};
}

BuildConfig build_config_from_json(const nlohmann::json& doc, BuildConfig cfg) {
    if (!doc.is_object()) throw ParseError("build config: expected an object");
    try {
        if (doc.contains("timestep")) cfg.timestep = doc["timestep"].get<double>();
        if (doc.contains("theta")) cfg.theta = doc["theta"].get<double>();
        if (doc.contains("ssim_window")) {
            const auto& w = doc["ssim_window"];
            cfg.window = w.is_string() ? parse_window(w.get<std::string>()) : window_from_json(w);
        }
        if (doc.contains("split_fraction")) cfg.split_fraction = doc["split_fraction"].get<double>();
        if (doc.contains("split_mode")) cfg.split_mode = split_mode_from_string(doc["split_mode"].get<std::string>());
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("resolution")) cfg.resolution = doc["resolution"].get<int>();
        if (doc.contains("output_root")) cfg.output_root = doc["output_root"].get<std::string>();
        if (doc.contains("threads")) cfg.threads = doc["threads"].get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("build config: ") + e.what());
    }
    return cfg;
}

double DatasetManifest::timestep() const {
    if (build_config.contains("timestep")) return build_config["timestep"].get<double>();
    return kDefaultTimestep;
}

std::size_t DatasetManifest::count(Split split) const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [&](const auto& r) { return r.split == split; }));
}

std::vector<DatasetRecord> DatasetManifest::subset(Split split) const {
    std::vector<DatasetRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out), [&](const auto& r) { return r.split == split; });
    return out;
}

// ---------------------------------------------------------------------------
// Manifest files

namespace {

nlohmann::json record_to_json(const DatasetRecord& r) {
    return {{"id", r.id},
            {"image", r.image_path},
            {"clip", r.clip_name},
            {"timestamp", r.timestamp},
            {"vector", r.vector.storage()},
            {"split", std::string(to_string(r.split))}};
}

DatasetRecord record_from_json(const nlohmann::json& doc) {
    DatasetRecord r;
    r.id = doc.at("id").get<std::string>();
    r.image_path = doc.at("image").get<std::string>();
    r.clip_name = doc.at("clip").get<std::string>();
    r.timestamp = doc.at("timestamp").get<double>();
    r.vector = ControlVector::from_span(doc.at("vector").get<std::vector<double>>());
    const auto split = doc.at("split").get<std::string>();
    if (split == "train") {
        r.split = Split::Train;
    } else if (split == "test") {
        r.split = Split::Test;
    } else {
        throw ParseError("split must be 'train' or 'test'");
    }
    return r;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest " + path.string());
    const nlohmann::json header = {{"kind", "header"},
                                   {"schema", kManifestSchema},
                                   {"build_config", manifest.build_config},
                                   {"registry", registry_to_json(manifest.registry)},
                                   {"records", manifest.records.size()}};
    out << header.dump() << '\n';
    for (const auto& r : manifest.records) out << record_to_json(r).dump() << '\n';
    if (!out) throw IoError("failed writing manifest " + path.string());
}

DatasetManifest read_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path.string());
    DatasetManifest m;
    m.root = path.parent_path();
    std::string line;
    std::size_t line_no = 0;
    std::size_t declared = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto where = path.string() + ":" + std::to_string(line_no);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!have_header) {
            if (!doc.is_object() || doc.value("kind", "") != "header") throw ParseError(where + ": missing manifest header");
            if (doc.value("schema", "") != kManifestSchema) {
                throw ParseError(where + ": unsupported manifest schema '" + doc.value("schema", "") + "'");
            }
            m.build_config = doc.value("build_config", nlohmann::json::object());
            try {
                m.registry = registry_from_json(doc.at("registry"));
                declared = doc.at("records").get<std::size_t>();
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(where + ": " + e.what());
            } catch (const ParseError& e) {
                throw ParseError(where + ": " + e.what());
            }
            have_header = true;
            continue;
        }
        try {
            m.records.push_back(record_from_json(doc));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        } catch (const Error& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    if (!have_header) throw ParseError(path.string() + ": empty manifest");
    if (declared != m.records.size()) {
        throw ParseError(path.string() + ": header declares " + std::to_string(declared) + " records, found " +
                         std::to_string(m.records.size()));
    }
    return m;
}

void assign_splits(std::vector<DatasetRecord>& records, double fraction, std::uint64_t seed, SplitMode mode) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ParameterError("split fraction must be in [0, 1]");
    Rng rng = derived_rng(seed, 0x5b117);
    if (mode == SplitMode::Record) {
        std::vector<std::size_t> order(records.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        deterministic_shuffle(order.begin(), order.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(records.size())));
        for (std::size_t i = 0; i < order.size(); ++i) records[order[i]].split = i < n_train ? Split::Train : Split::Test;
        return;
    }
    std::vector<std::string> clips;
    for (const auto& r : records) clips.push_back(r.clip_name);
    std::sort(clips.begin(), clips.end());
    clips.erase(std::unique(clips.begin(), clips.end()), clips.end());
    deterministic_shuffle(clips.begin(), clips.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(clips.size())));
    std::set<std::string> train(clips.begin(), clips.begin() + static_cast<std::ptrdiff_t>(n_train));
    for (auto& r : records) r.split = train.count(r.clip_name) ? Split::Train : Split::Test;
}

// ---------------------------------------------------------------------------
// Build

namespace {

struct ClipOutput {
    std::vector<DatasetRecord> records;
    DedupReport dedup;
    std::size_t samples = 0;
    std::size_t clamped_values = 0;
};

std::string record_id(const std::string& clip, std::size_t frame) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_f%05zu", frame);
    return clip + buf;
}

ClipOutput build_clip(const AnimationClip& clip, const BuildConfig& cfg, const FaceGeometry& geo,
                      const ControlRegistry& registry) {
    ClipOutput out;
    const auto seq = sample_clip(clip, cfg.timestep, registry);
    out.samples = seq.samples.size();
    out.clamped_values = seq.clamped_values;

    const fs::path image_dir = cfg.output_root / "images" / clip.name();
    fs::create_directories(image_dir);

    SsimParams ssim_params;
    ssim_params.window = cfg.window;
    Deduplicator dedup(cfg.theta, ssim_params);
    for (std::size_t k = 0; k < seq.samples.size(); ++k) {
        const auto& sample = seq.samples[k];
        Frame frame = render(sample.vector, geo, cfg.resolution, registry);
        // One clock: the frame is stamped with the very timestamp its control
        // vector was sampled at.
        frame.source_timestamp = sample.timestamp;
        if (!dedup.offer(frame)) continue;

        DatasetRecord r;
        r.id = record_id(clip.name(), k);
        r.clip_name = clip.name();
        r.image_path = "images/" + clip.name() + "/" + r.id + ".png";
        r.timestamp = frame.source_timestamp;
        r.vector = sample.vector;
        write_png(cfg.output_root / r.image_path, frame);
        out.records.push_back(std::move(r));
    }
    out.dedup = dedup.take_report();
    return out;
}

}  // namespace

BuildResult build_dataset(const std::vector<AnimationClip>& clips, const BuildConfig& cfg, const FaceGeometry& geo,
                          const ControlRegistry& registry) {
    cfg.validate();
    std::vector<const AnimationClip*> ordered;
    for (const auto& c : clips) ordered.push_back(&c);
    std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->name() < b->name(); });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i]->name() == ordered[i - 1]->name()) {
            throw StructuralError("duplicate clip name '" + ordered[i]->name() + "' would produce duplicate record ids");
        }
    }

    const fs::path& root = cfg.output_root;
    fs::create_directories(root / "clips");
    fs::create_directories(root / "dedup");
    fs::create_directories(root / "images");

    std::vector<ClipOutput> outputs(ordered.size());
    parallel_for(ordered.size(), cfg.threads, [&](std::size_t i) {
        const auto& clip = *ordered[i];
        save_clip(clip, root / "clips" / (clip.name() + ".json"), registry);
        outputs[i] = build_clip(clip, cfg, geo, registry);
        write_text(root / "dedup" / (clip.name() + ".json"), dedup_report_to_json(outputs[i].dedup).dump() + "\n");
    });

    BuildResult result;
    auto& m = result.manifest;
    m.root = root;
    m.registry = registry;
    m.build_config = build_config_to_json(cfg, geo);
    auto& s = result.summary;
    s.clips = ordered.size();
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        auto& o = outputs[i];
        s.samples += o.samples;
        s.removed_duplicates += o.dedup.removed_indices.size();
        s.clamped_values += o.clamped_values;
        s.clamped_handles += ordered[i]->clamped_handles();
        if (!ordered[i]->in_duration_regime()) ++s.clips_outside_duration_regime;
        std::move(o.records.begin(), o.records.end(), std::back_inserter(m.records));
    }
    std::set<std::string> ids;
    for (const auto& r : m.records) {
        if (!ids.insert(r.id).second) throw StructuralError("duplicate record id '" + r.id + "'");
    }
    assign_splits(m.records, cfg.split_fraction, cfg.seed, cfg.split_mode);

    write_text(root / "geometry.json", geometry_to_json(geo, registry).dump(2) + "\n");
    write_text(root / "registry.json", registry_to_json(registry).dump(2) + "\n");
    write_manifest(m, root / kManifestFile);
    return result;
}

// ---------------------------------------------------------------------------
// Statistics

std::vector<ChannelStats> channel_stats(const DatasetManifest& manifest) {
    if (manifest.records.empty()) throw EmptyInputError("statistics need a non-empty manifest");
    const auto& reg = manifest.registry;
    const std::size_t n = manifest.records.size();
    std::vector<ChannelStats> out;
    std::vector<double> column(n), scratch(n);
    for (std::size_t ch = 0; ch < reg.size(); ++ch) {
        for (std::size_t i = 0; i < n; ++i) column[i] = manifest.records[i].vector[ch];
        // Shifted by the first value: constant columns give their value back
        // exactly.
        const double shift = column[0];
        for (std::size_t i = 0; i < n; ++i) scratch[i] = column[i] - shift;
        ChannelStats s;
        s.abbrev = reg[ch].abbrev;
        s.neutral = reg[ch].neutral;
        s.min = *std::min_element(column.begin(), column.end());
        s.max = *std::max_element(column.begin(), column.end());
        s.mean = std::clamp(shift + pairwise_sum(scratch) / static_cast<double>(n), s.min, s.max);
        for (std::size_t i = 0; i < n; ++i) scratch[i] = (column[i] - s.mean) * (column[i] - s.mean);
        s.sd = std::sqrt(pairwise_sum(scratch) / static_cast<double>(n));
        out.push_back(std::move(s));
    }
    return out;
}

std::string stats_to_csv(const std::vector<ChannelStats>& stats) {
    std::ostringstream os;
    os.precision(17);
    os << "channel,mean,sd,max,min,neutral\n";
    for (const auto& s : stats) {
        os << s.abbrev << ',' << s.mean << ',' << s.sd << ',' << s.max << ',' << s.min << ',' << s.neutral << '\n';
    }
    return os.str();
}

nlohmann::json stats_to_json(const std::vector<ChannelStats>& stats) {
    auto doc = nlohmann::json::array();
    for (const auto& s : stats) {
        doc.push_back({{"channel", s.abbrev}, {"mean", s.mean}, {"sd", s.sd}, {"max", s.max}, {"min", s.min},
                       {"neutral", s.neutral}});
    }
    return doc;
}

std::vector<ChannelHistogram> histograms(const DatasetManifest& manifest, int bins) {
    if (bins < 2) throw ParameterError("histograms need at least 2 bins");
    const auto& reg = manifest.registry;
    std::vector<ChannelHistogram> out;
    for (std::size_t ch = 0; ch < reg.size(); ++ch) {
        ChannelHistogram h;
        h.abbrev = reg[ch].abbrev;
        h.group = reg[ch].group;
        h.min = reg[ch].range_min;
        h.max = reg[ch].range_max;
        h.counts.assign(static_cast<std::size_t>(bins), 0);
        for (const auto& r : manifest.records) {
            const double pos = (r.vector[ch] - h.min) / (h.max - h.min) * bins;
            const auto b = std::clamp(static_cast<long>(std::floor(pos)), 0L, static_cast<long>(bins) - 1);
            ++h.counts[static_cast<std::size_t>(b)];
        }
        out.push_back(std::move(h));
    }
    return out;
}

std::string histograms_to_csv(const std::vector<ChannelHistogram>& hists) {
    std::ostringstream os;
    os.precision(17);
    os << "channel,bin,lo,hi,count\n";
    for (const auto& h : hists) {
        const auto bins = h.counts.size();
        for (std::size_t b = 0; b < bins; ++b) {
            const double lo = h.min + (h.max - h.min) * static_cast<double>(b) / static_cast<double>(bins);
            const double hi = h.min + (h.max - h.min) * static_cast<double>(b + 1) / static_cast<double>(bins);
            os << h.abbrev << ',' << b << ',' << lo << ',' << hi << ',' << h.counts[b] << '\n';
        }
    }
    return os.str();
}

nlohmann::json histograms_to_json(const std::vector<ChannelHistogram>& hists) {
    auto doc = nlohmann::json::array();
    for (const auto& h : hists) {
        doc.push_back({{"channel", h.abbrev}, {"group", std::string(to_string(h.group))}, {"min", h.min},
                       {"max", h.max}, {"counts", h.counts}});
    }
    return doc;
}

std::string histograms_to_svg(const std::vector<ChannelHistogram>& hists) {
    static const std::map<ControlGroup, const char*> colors = {
        {ControlGroup::Brows, "#4e79a7"}, {ControlGroup::Lids, "#f28e2b"}, {ControlGroup::Gaze, "#e15759"},
        {ControlGroup::Nose, "#76b7b2"},  {ControlGroup::Mouth, "#59a14f"}, {ControlGroup::Head, "#edc948"},
        {ControlGroup::Neck, "#b07aa1"},
    };
    constexpr int kCols = 6, kCellW = 180, kCellH = 130, kPad = 18;
    const int rows = static_cast<int>((hists.size() + kCols - 1) / kCols);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCols * kCellW << "\" height=\"" << rows * kCellH
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < hists.size(); ++i) {
        const auto& h = hists[i];
        const int x0 = static_cast<int>(i % kCols) * kCellW, y0 = static_cast<int>(i / kCols) * kCellH;
        const double plot_w = kCellW - 2 * kPad, plot_h = kCellH - 2 * kPad - 6;
        const std::uint64_t peak = std::max<std::uint64_t>(1, *std::max_element(h.counts.begin(), h.counts.end()));
        const double bar_w = plot_w / static_cast<double>(h.counts.size());
        os << "<g transform=\"translate(" << x0 << ',' << y0 << ")\">\n";
        os << "<text x=\"" << kPad << "\" y=\"" << kPad - 4 << "\">" << h.abbrev << " [" << h.min << ", " << h.max
           << "]</text>\n";
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            const double bh = plot_h * static_cast<double>(h.counts[b]) / static_cast<double>(peak);
            os << "<rect x=\"" << kPad + bar_w * static_cast<double>(b) << "\" y=\"" << kPad + plot_h - bh
               << "\" width=\"" << bar_w << "\" height=\"" << bh << "\" fill=\"" << colors.at(h.group) << "\"/>\n";
        }
        os << "<line x1=\"" << kPad << "\" y1=\"" << kPad + plot_h << "\" x2=\"" << kPad + plot_w << "\" y2=\""
           << kPad + plot_h << "\" stroke=\"#333\"/>\n</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Verification

VerifyReport verify_dataset(const DatasetManifest& manifest, std::size_t threads) {
    VerifyReport report;
    std::mutex mu;
    constexpr std::size_t kMaxMessages = 50;
    auto note = [&](std::size_t VerifyReport::*counter, std::string msg) {
        std::lock_guard lock(mu);
        ++(report.*counter);
        if (report.messages.size() < kMaxMessages) report.messages.push_back(std::move(msg));
    };

    const auto& root = manifest.root;
    const auto& reg = manifest.registry;
    const double timestep = manifest.timestep();
    const int resolution = manifest.build_config.value("resolution", kDefaultResolution);

    FaceGeometry geo = default_geometry();
    if (fs::exists(root / "geometry.json")) geo = load_geometry(root / "geometry.json", reg);
    const auto want_version = manifest.build_config.value("geometry_version", geo.version);
    if (geo.version != want_version) {
        note(&VerifyReport::structural_violations,
             "geometry version '" + geo.version + "' differs from build config '" + want_version + "'");
    }

    std::set<std::string> ids;
    for (const auto& r : manifest.records) {
        if (!ids.insert(r.id).second) note(&VerifyReport::structural_violations, "duplicate record id " + r.id);
    }
    const auto mode = split_mode_from_string(manifest.build_config.value("split_mode", std::string("record")));
    if (mode == SplitMode::Record && manifest.build_config.contains("split_fraction")) {
        const double want = manifest.build_config["split_fraction"].get<double>() * static_cast<double>(manifest.records.size());
        const double got = static_cast<double>(manifest.count(Split::Train));
        if (std::abs(got - want) > 1.0) {
            note(&VerifyReport::structural_violations, "train split size " + std::to_string(manifest.count(Split::Train)) +
                                                           " does not match the configured fraction");
        }
    }

    std::map<std::string, AnimationClip> clips;
    for (const auto& r : manifest.records) {
        if (clips.count(r.clip_name)) continue;
        try {
            clips.emplace(r.clip_name, load_clip(root / "clips" / (r.clip_name + ".json"), reg));
        } catch (const Error& e) {
            note(&VerifyReport::structural_violations, std::string("clip ") + r.clip_name + ": " + e.what());
        }
    }
    if (mode == SplitMode::Clip) {
        std::map<std::string, Split> clip_split;
        for (const auto& r : manifest.records) {
            auto [it, fresh] = clip_split.emplace(r.clip_name, r.split);
            if (!fresh && it->second != r.split) {
                note(&VerifyReport::structural_violations, "clip " + r.clip_name + " spans both splits");
                it->second = r.split;
            }
        }
    }

    report.records_checked = manifest.records.size();
    parallel_for(manifest.records.size(), threads, [&](std::size_t i) {
        const auto& r = manifest.records[i];
        if (!is_legal(r.vector, reg)) note(&VerifyReport::structural_violations, r.id + ": vector outside registry ranges");

        const auto k = std::llround(r.timestamp / timestep);
        if (k < 0 || sample_timestamp(static_cast<std::size_t>(k), timestep) != r.timestamp) {
            note(&VerifyReport::alignment_violations, r.id + ": timestamp is not on the sampling grid");
        }
        if (auto it = clips.find(r.clip_name); it != clips.end()) {
            if (sample_at(it->second, r.timestamp, reg) != r.vector) {
                note(&VerifyReport::alignment_violations, r.id + ": vector differs from the clip at its timestamp");
            }
        } else {
            note(&VerifyReport::alignment_violations, r.id + ": clip unavailable");
        }

        try {
            const Frame stored = read_png(root / r.image_path);
            if (stored.width != resolution || stored.height != resolution) {
                note(&VerifyReport::image_violations, r.id + ": image is not " + std::to_string(resolution) + " px square");
            } else if (is_legal(r.vector, reg) && !stored.same_pixels(render(r.vector, geo, resolution, reg))) {
                note(&VerifyReport::image_violations, r.id + ": image differs from a fresh render");
            }
        } catch (const Error& e) {
            note(&VerifyReport::image_violations, r.id + ": " + e.what());
        }
    });
    return report;
}

}  // namespace facectl
