#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facectl/control_space.hpp"
#include "facectl/curve_engine.hpp"

namespace facectl {

inline constexpr double kDefaultTimestep = 0.02;
inline constexpr double kMinClipDuration = 1.0;
inline constexpr double kMaxClipDuration = 15.0;

// A multi-channel keyframed expression animation.
class AnimationClip {
public:
    // Throws StructuralError when a name is not file-safe, the duration is
    // not finite and non-negative, two tracks share a channel, a channel
    // index is out of range, or a keyframe lies past the end of the clip.
    AnimationClip(std::string name, double duration, std::vector<Track> tracks,
                  std::map<std::string, std::string> metadata = {});

    const std::string& name() const { return name_; }
    double duration() const { return duration_; }
    const std::vector<Track>& tracks() const { return tracks_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }

    // Authored clips run between 1 and 15 seconds; others are accepted but
    // callers should warn.
    bool in_duration_regime() const {
        return duration_ >= kMinClipDuration && duration_ <= kMaxClipDuration;
    }
    std::size_t clamped_handles() const;
    // Track for the channel, or nullptr if the channel is untracked.
    const Track* track_for(std::size_t channel) const;

    bool operator==(const AnimationClip&) const = default;

private:
    std::string name_;
    double duration_;
    std::vector<Track> tracks_;
    std::map<std::string, std::string> metadata_;
    std::vector<int> track_of_channel_;
};

struct Sample {
    double timestamp = 0.0;
    ControlVector vector;
    bool operator==(const Sample&) const = default;
};

struct SampledSequence {
    std::string clip_name;
    double timestep = kDefaultTimestep;
    std::vector<Sample> samples;
    // Control values pulled back into their legal range while sampling.
    std::size_t clamped_values = 0;
};

// floor(duration / s) + 1, with a relative guard of 1e-9 so that durations
// that are whole multiples of s are not lost to representation error.
std::size_t sample_count(double duration, double timestep);

// The k-th sampling instant. Frames and control vectors both use this value.
inline double sample_timestamp(std::size_t k, double timestep) {
    return static_cast<double>(k) * timestep;
}

// Control vector of the clip at time t: tracked channels are evaluated,
// untracked channels hold neutral, and everything is clamped to range.
ControlVector sample_at(const AnimationClip& clip, double t, const ControlRegistry& registry,
                        std::size_t* clamped = nullptr);

// Throws ParameterError unless timestep > 0.
SampledSequence sample_clip(const AnimationClip& clip, double timestep, const ControlRegistry& registry);

nlohmann::json clip_to_json(const AnimationClip& clip, const ControlRegistry& registry);
// Throws ParseError naming the offending JSON path.
AnimationClip clip_from_json(const nlohmann::json& doc, const ControlRegistry& registry);

AnimationClip load_clip(const std::filesystem::path& path, const ControlRegistry& registry = registry_default());
void save_clip(const AnimationClip& clip, const std::filesystem::path& path,
               const ControlRegistry& registry = registry_default());

// Loads every *.json clip in a directory, sorted by file name.
std::vector<AnimationClip> load_clip_dir(const std::filesystem::path& dir,
                                         const ControlRegistry& registry = registry_default());

// Seeded random clips for tests and desk-scale builds: 1-15 s durations,
// 2-8 keys per track, random interpolation modes, values that reach the ends
// of each range, and independent left/right tracks in most clips.
std::vector<AnimationClip> make_synthetic_clips(std::size_t n, std::uint64_t seed,
                                                const ControlRegistry& registry = registry_default());

}  // namespace facectl
