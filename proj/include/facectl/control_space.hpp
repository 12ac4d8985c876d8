#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace facectl {

inline constexpr std::size_t kNumControls = 30;

enum class ControlGroup { Brows, Lids, Gaze, Nose, Mouth, Head, Neck };

std::string_view to_string(ControlGroup group);
ControlGroup control_group_from_string(std::string_view name);

struct ControlChannel {
    std::string name;    // e.g. "Jaw Pitch"
    std::string abbrev;  // e.g. "JP"
    double range_min = 0.0;
    double range_max = 1.0;
    double neutral = 0.0;
    ControlGroup group = ControlGroup::Mouth;

    double span() const { return range_max - range_min; }
    bool operator==(const ControlChannel&) const = default;
};

// A full expression configuration: one value per registry channel, in
// registry order.
class ControlVector {
public:
    using Storage = std::array<double, kNumControls>;

    ControlVector() { values_.fill(0.0); }
    explicit ControlVector(const Storage& values) : values_(values) {}

    // Throws DimensionError unless values.size() == kNumControls.
    static ControlVector from_span(std::span<const double> values);

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    static constexpr std::size_t size() { return kNumControls; }

    std::span<const double, kNumControls> values() const { return values_; }
    std::span<double, kNumControls> values() { return values_; }
    const Storage& storage() const { return values_; }

    bool operator==(const ControlVector&) const = default;

private:
    Storage values_;
};

// The 30-channel control vocabulary. Immutable after construction, so a
// single instance may be shared freely across threads.
class ControlRegistry {
public:
    // Throws StructuralError if the channel list violates the registry
    // invariants (count, unique names/abbrevs, ordered ranges, legal neutral).
    explicit ControlRegistry(std::vector<ControlChannel> channels);

    std::size_t size() const { return channels_.size(); }
    const ControlChannel& operator[](std::size_t i) const { return channels_[i]; }
    const std::vector<ControlChannel>& channels() const { return channels_; }

    std::optional<std::size_t> find(std::string_view name) const;
    std::optional<std::size_t> find_abbrev(std::string_view abbrev) const;
    // Throws RangeError for unknown names.
    std::size_t index_of(std::string_view name) const;

    bool operator==(const ControlRegistry&) const = default;

private:
    std::vector<ControlChannel> channels_;
};

// Channel table of the humanoid face: ranges per control and the rest pose.
// Order is the row-major reading order of the reference control table
// (Jaw Pitch ... Neck Roll).
const ControlRegistry& registry_default();

ControlVector neutral_vector(const ControlRegistry& registry);

ControlVector clamp(const ControlVector& v, const ControlRegistry& registry);
// Throws DimensionError for inputs that are not 30 long.
ControlVector clamp(std::span<const double> values, const ControlRegistry& registry);

// Clamps in place and returns the number of entries that were out of range.
std::size_t clamp_counting(ControlVector& v, const ControlRegistry& registry);

bool is_legal(const ControlVector& v, const ControlRegistry& registry);

// Left/right channel pairs (left index, right index).
std::vector<std::pair<std::size_t, std::size_t>> mirrored_pairs(const ControlRegistry& registry);

nlohmann::json registry_to_json(const ControlRegistry& registry);
ControlRegistry registry_from_json(const nlohmann::json& doc);

}  // namespace facectl
