#include "facectl/animation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "facectl/error.hpp"
#include "facectl/random.hpp"

namespace facectl {

namespace {

bool is_file_safe(const std::string& name) {
    if (name.empty() || name == "." || name == "..") return false;
    return std::all_of(name.begin(), name.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

}  // namespace

AnimationClip::AnimationClip(std::string name, double duration, std::vector<Track> tracks,
                             std::map<std::string, std::string> metadata)
    : name_(std::move(name)),
      duration_(duration),
      tracks_(std::move(tracks)),
      metadata_(std::move(metadata)),
      track_of_channel_(kNumControls, -1) {
    if (!is_file_safe(name_)) {
        throw StructuralError("clip name '" + name_ + "' must be non-empty and use only [A-Za-z0-9_.-]");
    }
    if (!std::isfinite(duration_) || duration_ < 0.0) {
        throw StructuralError("clip '" + name_ + "' has an invalid duration");
    }
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        const auto ch = tracks_[i].channel_index();
        if (ch >= kNumControls) throw StructuralError("track channel index out of range");
        if (track_of_channel_[ch] >= 0) {
            throw StructuralError("clip '" + name_ + "' has two tracks for channel " + std::to_string(ch));
        }
        track_of_channel_[ch] = static_cast<int>(i);
        if (tracks_[i].keys().back().time > duration_) {
            throw StructuralError("clip '" + name_ + "' has a keyframe after its duration");
        }
    }
}

std::size_t AnimationClip::clamped_handles() const {
    std::size_t n = 0;
    for (const auto& t : tracks_) n += t.clamped_handles();
    return n;
}

const Track* AnimationClip::track_for(std::size_t channel) const {
    if (channel >= track_of_channel_.size() || track_of_channel_[channel] < 0) return nullptr;
    return &tracks_[static_cast<std::size_t>(track_of_channel_[channel])];
}

std::size_t sample_count(double duration, double timestep) {
    if (!(timestep > 0.0)) throw ParameterError("timestep must be positive");
    if (!(duration >= 0.0)) throw ParameterError("duration must be non-negative");
    const double ratio = duration / timestep;
    return static_cast<std::size_t>(std::floor(ratio + 1e-9 * std::max(1.0, ratio))) + 1;
}

ControlVector sample_at(const AnimationClip& clip, double t, const ControlRegistry& registry,
                        std::size_t* clamped) {
    ControlVector v;
    for (std::size_t ch = 0; ch < registry.size(); ++ch) {
        const Track* track = clip.track_for(ch);
        v[ch] = track ? eval_track(*track, t) : registry[ch].neutral;
    }
    const auto n = clamp_counting(v, registry);
    if (clamped) *clamped += n;
    return v;
}

SampledSequence sample_clip(const AnimationClip& clip, double timestep, const ControlRegistry& registry) {
    SampledSequence seq;
    seq.clip_name = clip.name();
    seq.timestep = timestep;
    const auto n = sample_count(clip.duration(), timestep);
    seq.samples.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = sample_timestamp(k, timestep);
        seq.samples.push_back({t, sample_at(clip, t, registry, &seq.clamped_values)});
    }
    return seq;
}

// ---------------------------------------------------------------------------
// Clip files

namespace {

nlohmann::json point_json(const CurvePoint& p) { return nlohmann::json::array({p.time, p.value}); }

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
    throw ParseError(path + ": " + what);
}

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) parse_fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) parse_fail(path + "." + key, "missing required field");
    return *it;
}

double require_number(const nlohmann::json& obj, const char* key, const std::string& path) {
    const auto& v = require(obj, key, path);
    if (!v.is_number()) parse_fail(path + "." + key, "expected a number");
    return v.get<double>();
}

std::optional<CurvePoint> optional_point(const nlohmann::json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
        parse_fail(path + "." + key, "expected [t, v]");
    }
    return CurvePoint{(*it)[0].get<double>(), (*it)[1].get<double>()};
}

}  // namespace

nlohmann::json clip_to_json(const AnimationClip& clip, const ControlRegistry& registry) {
    nlohmann::json tracks = nlohmann::json::array();
    for (const auto& track : clip.tracks()) {
        nlohmann::json keys = nlohmann::json::array();
        for (const auto& k : track.keys()) {
            nlohmann::json key = {{"t", k.time}, {"v", k.value}, {"mode", std::string(to_string(k.mode))}};
            if (k.out_handle) key["out_handle"] = point_json(*k.out_handle);
            if (k.in_handle_of_next) key["in_handle"] = point_json(*k.in_handle_of_next);
            keys.push_back(std::move(key));
        }
        tracks.push_back({{"channel", registry[track.channel_index()].name}, {"keys", std::move(keys)}});
    }
    nlohmann::json metadata = nlohmann::json::object();
    for (const auto& [k, v] : clip.metadata()) metadata[k] = v;
    return {{"name", clip.name()},
            {"duration_s", clip.duration()},
            {"tracks", std::move(tracks)},
            {"metadata", std::move(metadata)}};
}

AnimationClip clip_from_json(const nlohmann::json& doc, const ControlRegistry& registry) {
    const std::string root = "$";
    const auto& name = require(doc, "name", root);
    if (!name.is_string()) parse_fail("$.name", "expected a string");
    const double duration = require_number(doc, "duration_s", root);

    const auto& tracks_doc = require(doc, "tracks", root);
    if (!tracks_doc.is_array()) parse_fail("$.tracks", "expected an array");

    std::vector<Track> tracks;
    for (std::size_t ti = 0; ti < tracks_doc.size(); ++ti) {
        const auto tpath = "$.tracks[" + std::to_string(ti) + "]";
        const auto& tdoc = tracks_doc[ti];
        const auto& channel = require(tdoc, "channel", tpath);
        if (!channel.is_string()) parse_fail(tpath + ".channel", "expected a channel name");
        const auto ch = registry.find(channel.get<std::string>());
        if (!ch) parse_fail(tpath + ".channel", "unknown channel '" + channel.get<std::string>() + "'");

        const auto& keys_doc = require(tdoc, "keys", tpath);
        if (!keys_doc.is_array() || keys_doc.empty()) parse_fail(tpath + ".keys", "expected a non-empty array");

        std::vector<Keyframe> keys;
        for (std::size_t ki = 0; ki < keys_doc.size(); ++ki) {
            const auto kpath = tpath + ".keys[" + std::to_string(ki) + "]";
            const auto& kdoc = keys_doc[ki];
            Keyframe k;
            k.time = require_number(kdoc, "t", kpath);
            k.value = require_number(kdoc, "v", kpath);
            const auto& mode = require(kdoc, "mode", kpath);
            const auto parsed = mode.is_string() ? interpolation_from_string(mode.get<std::string>()) : std::nullopt;
            if (!parsed) parse_fail(kpath + ".mode", "expected one of cubic_bezier, linear, step");
            k.mode = *parsed;
            k.out_handle = optional_point(kdoc, "out_handle", kpath);
            k.in_handle_of_next = optional_point(kdoc, "in_handle", kpath);
            const bool opens_segment = ki + 1 < keys_doc.size();
            if (k.mode == Interpolation::CubicBezier && opens_segment && (!k.out_handle || !k.in_handle_of_next)) {
                parse_fail(kpath, "cubic_bezier key requires out_handle and in_handle");
            }
            if (!keys.empty() && !(keys.back().time < k.time)) {
                parse_fail(kpath + ".t", "keyframe times must be strictly increasing");
            }
            keys.push_back(std::move(k));
        }
        try {
            tracks.emplace_back(*ch, std::move(keys));
        } catch (const StructuralError& e) {
            parse_fail(tpath, e.what());
        }
    }

    std::map<std::string, std::string> metadata;
    if (auto it = doc.find("metadata"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) parse_fail("$.metadata", "expected an object");
        for (const auto& [k, v] : it->items()) {
            if (!v.is_string()) parse_fail("$.metadata." + k, "expected a string");
            metadata[k] = v.get<std::string>();
        }
    }
    try {
        return AnimationClip(name.get<std::string>(), duration, std::move(tracks), std::move(metadata));
    } catch (const StructuralError& e) {
        parse_fail(root, e.what());
    }
}

AnimationClip load_clip(const std::filesystem::path& path, const ControlRegistry& registry) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open clip file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    try {
        return clip_from_json(doc, registry);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_clip(const AnimationClip& clip, const std::filesystem::path& path, const ControlRegistry& registry) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write clip file " + path.string());
    out << clip_to_json(clip, registry).dump(2) << '\n';
    if (!out) throw IoError("failed writing clip file " + path.string());
}

std::vector<AnimationClip> load_clip_dir(const std::filesystem::path& dir, const ControlRegistry& registry) {
    if (!std::filesystem::is_directory(dir)) throw IoError("clip directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<AnimationClip> clips;
    clips.reserve(files.size());
    for (const auto& f : files) clips.push_back(load_clip(f, registry));
    return clips;
}

// ---------------------------------------------------------------------------
// Synthetic clips

namespace {

constexpr double kSyntheticGrid = 0.02;

double synthetic_value(Rng& rng, const ControlChannel& c) {
    // Mass on the range ends so a batch reaches the full span.
    const double r = uniform01(rng);
    if (r < 0.15) return c.range_min;
    if (r < 0.30) return c.range_max;
    return uniform(rng, c.range_min, c.range_max);
}

Interpolation synthetic_mode(Rng& rng) {
    switch (uniform_index(rng, 3)) {
        case 0: return Interpolation::CubicBezier;
        case 1: return Interpolation::Linear;
        default: return Interpolation::Step;
    }
}

std::vector<Keyframe> synthetic_keys(Rng& rng, const ControlChannel& c, std::size_t grid_steps) {
    const auto count = static_cast<std::size_t>(2 + uniform_index(rng, 7));
    std::vector<std::size_t> slots(grid_steps + 1);
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
    deterministic_shuffle(slots.begin(), slots.end(), rng);
    slots.resize(std::min(count, slots.size()));
    std::sort(slots.begin(), slots.end());

    std::vector<Keyframe> keys;
    for (auto slot : slots) {
        Keyframe k;
        k.time = sample_timestamp(slot, kSyntheticGrid);
        k.value = synthetic_value(rng, c);
        k.mode = synthetic_mode(rng);
        keys.push_back(k);
    }
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        auto& k = keys[i];
        if (k.mode != Interpolation::CubicBezier) continue;
        const auto& next = keys[i + 1];
        const double span = next.time - k.time;
        const double dv = next.value - k.value;
        const double a = uniform(rng, 0.0, 0.6), b = uniform(rng, 0.0, 0.6);
        k.out_handle = CurvePoint{k.time + a * span, k.value + uniform01(rng) * dv};
        k.in_handle_of_next = CurvePoint{next.time - b * span, next.value - uniform01(rng) * dv};
    }
    return keys;
}

}  // namespace

std::vector<AnimationClip> make_synthetic_clips(std::size_t n, std::uint64_t seed, const ControlRegistry& registry) {
    if (n == 0) throw ParameterError("make_synthetic_clips needs n >= 1");
    const auto pairs = mirrored_pairs(registry);
    std::vector<AnimationClip> clips;
    clips.reserve(n);
    for (std::size_t ci = 0; ci < n; ++ci) {
        Rng rng = derived_rng(seed, ci);
        const auto steps = static_cast<std::size_t>(50 + uniform_index(rng, 701));  // 1.0 .. 15.0 s
        const double duration = sample_timestamp(steps, kSyntheticGrid);
        const bool symmetric = uniform01(rng) < 0.25;

        std::vector<std::optional<std::vector<Keyframe>>> per_channel(registry.size());
        for (std::size_t ch = 0; ch < registry.size(); ++ch) {
            if (uniform01(rng) < 0.7) per_channel[ch] = synthetic_keys(rng, registry[ch], steps);
        }
        if (symmetric) {
            for (auto [left, right] : pairs) per_channel[right] = per_channel[left];
        }

        std::vector<Track> tracks;
        for (std::size_t ch = 0; ch < registry.size(); ++ch) {
            if (per_channel[ch]) tracks.emplace_back(ch, std::move(*per_channel[ch]));
        }
        char name[64];
        std::snprintf(name, sizeof name, "synth_s%llu_%04zu", static_cast<unsigned long long>(seed), ci);
        clips.emplace_back(name, duration, std::move(tracks),
                           std::map<std::string, std::string>{{"generator", "synthetic"},
                                                              {"seed", std::to_string(seed)},
                                                              {"index", std::to_string(ci)}});
    }
    return clips;
}

}  // namespace facectl
