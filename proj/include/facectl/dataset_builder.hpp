#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facectl/animation.hpp"
#include "facectl/control_space.hpp"
#include "facectl/face_render.hpp"
#include "facectl/similarity.hpp"

namespace facectl {

inline constexpr double kDefaultSplitFraction = 0.8;
inline constexpr const char* kManifestSchema = "facectl.manifest/1";
inline constexpr const char* kManifestFile = "manifest.jsonl";

enum class Split { Train, Test };
enum class SplitMode { Record, Clip };

std::string_view to_string(Split split);
std::string_view to_string(SplitMode mode);
SplitMode split_mode_from_string(std::string_view text);

struct BuildConfig {
    double timestep = kDefaultTimestep;
    double theta = kDefaultDedupThreshold;
    SsimWindow window = SlidingWindow{};
    double split_fraction = kDefaultSplitFraction;
    SplitMode split_mode = SplitMode::Record;
    std::uint64_t seed = 0;
    int resolution = kDefaultResolution;
    std::filesystem::path output_root = "dataset";
    // Execution only; not part of the provenance record.
    std::size_t threads = 0;

    // Throws ParameterError for out-of-range settings.
    void validate() const;
};

// Provenance form written into manifests (no output root, no thread count, so
// identical builds in different directories produce identical manifests).
nlohmann::json build_config_to_json(const BuildConfig& cfg, const FaceGeometry& geo);
// Applies the keys present in `doc` on top of `base`; accepts the provenance
// fields plus "output_root" and "threads".
BuildConfig build_config_from_json(const nlohmann::json& doc, BuildConfig base = {});

struct DatasetRecord {
    std::string id;
    std::string image_path;  // relative to the dataset root, '/' separated
    std::string clip_name;
    double timestamp = 0.0;
    ControlVector vector;
    Split split = Split::Train;

    bool operator==(const DatasetRecord&) const = default;
};

struct DatasetManifest {
    nlohmann::json build_config;
    ControlRegistry registry = registry_default();
    std::vector<DatasetRecord> records;
    // Directory the manifest was read from or written to; not serialized.
    std::filesystem::path root;

    double timestep() const;
    std::size_t count(Split split) const;
    std::vector<DatasetRecord> subset(Split split) const;
};

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
// Throws IoError / ParseError (with line numbers).
DatasetManifest read_manifest(const std::filesystem::path& path);

// Seeded shuffle, then the first round(fraction * n) records (or clips, in
// clip mode) go to Train.
void assign_splits(std::vector<DatasetRecord>& records, double fraction, std::uint64_t seed,
                   SplitMode mode = SplitMode::Record);

struct BuildSummary {
    std::size_t clips = 0;
    std::size_t samples = 0;
    std::size_t removed_duplicates = 0;
    std::size_t clamped_values = 0;
    std::size_t clamped_handles = 0;
    std::size_t clips_outside_duration_regime = 0;
};

struct BuildResult {
    DatasetManifest manifest;
    BuildSummary summary;
};

// Sample -> render -> dedup for every clip, then split and write
// <root>/manifest.jsonl, images/, clips/, dedup/, geometry.json and
// registry.json. Output is identical for any thread count.
BuildResult build_dataset(const std::vector<AnimationClip>& clips, const BuildConfig& cfg,
                          const FaceGeometry& geo = default_geometry(),
                          const ControlRegistry& registry = registry_default());

struct ChannelStats {
    std::string abbrev;
    double mean = 0;
    double sd = 0;  // population
    double min = 0;
    double max = 0;
    double neutral = 0;
};

// Population moments per channel over all records. Throws EmptyInputError.
std::vector<ChannelStats> channel_stats(const DatasetManifest& manifest);
std::string stats_to_csv(const std::vector<ChannelStats>& stats);
nlohmann::json stats_to_json(const std::vector<ChannelStats>& stats);

struct ChannelHistogram {
    std::string abbrev;
    ControlGroup group = ControlGroup::Mouth;
    double min = 0, max = 1;
    std::vector<std::uint64_t> counts;
};

// Equal-width bins over each channel's legal range. Throws ParameterError
// for bins < 2.
std::vector<ChannelHistogram> histograms(const DatasetManifest& manifest, int bins);
std::string histograms_to_csv(const std::vector<ChannelHistogram>& hists);
nlohmann::json histograms_to_json(const std::vector<ChannelHistogram>& hists);

// Static SVG grid of per-channel distribution bars, colored by unit group.
std::string histograms_to_svg(const std::vector<ChannelHistogram>& hists);

struct VerifyReport {
    std::size_t records_checked = 0;
    std::size_t alignment_violations = 0;
    std::size_t image_violations = 0;
    std::size_t structural_violations = 0;
    std::vector<std::string> messages;  // first violations, capped

    std::size_t total_violations() const {
        return alignment_violations + image_violations + structural_violations;
    }
};

// Re-derives every record from its stored clip and timestamp, and re-renders
// every image, comparing bit for bit.
VerifyReport verify_dataset(const DatasetManifest& manifest, std::size_t threads = 0);

}  // namespace facectl
