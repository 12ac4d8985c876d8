#include "facectl/control_space.hpp"

#include <algorithm>
#include <set>

#include "facectl/error.hpp"

namespace facectl {

std::string_view to_string(ControlGroup group) {
    switch (group) {
        case ControlGroup::Brows: return "Brows";
        case ControlGroup::Lids: return "Lids";
        case ControlGroup::Gaze: return "Gaze";
        case ControlGroup::Nose: return "Nose";
        case ControlGroup::Mouth: return "Mouth";
        case ControlGroup::Head: return "Head";
        case ControlGroup::Neck: return "Neck";
    }
    return "";
}

ControlGroup control_group_from_string(std::string_view name) {
    for (auto g : {ControlGroup::Brows, ControlGroup::Lids, ControlGroup::Gaze, ControlGroup::Nose,
                   ControlGroup::Mouth, ControlGroup::Head, ControlGroup::Neck}) {
        if (to_string(g) == name) return g;
    }
    throw ParseError("unknown control group '" + std::string(name) + "'");
}

ControlVector ControlVector::from_span(std::span<const double> values) {
    if (values.size() != kNumControls) {
        throw DimensionError("control vector must have " + std::to_string(kNumControls) +
                             " entries, got " + std::to_string(values.size()));
    }
    Storage s;
    std::copy(values.begin(), values.end(), s.begin());
    return ControlVector(s);
}

ControlRegistry::ControlRegistry(std::vector<ControlChannel> channels) : channels_(std::move(channels)) {
    if (channels_.size() != kNumControls) {
        throw StructuralError("registry must hold exactly " + std::to_string(kNumControls) +
                              " channels, got " + std::to_string(channels_.size()));
    }
    std::set<std::string> names, abbrevs;
    for (const auto& c : channels_) {
        if (!names.insert(c.name).second) throw StructuralError("duplicate channel name '" + c.name + "'");
        if (!abbrevs.insert(c.abbrev).second) throw StructuralError("duplicate channel abbrev '" + c.abbrev + "'");
        if (!(c.range_min < c.range_max)) throw StructuralError("channel '" + c.name + "' has empty range");
        if (!(c.range_min <= c.neutral && c.neutral <= c.range_max)) {
            throw StructuralError("channel '" + c.name + "' neutral value outside its range");
        }
    }
}

std::optional<std::size_t> ControlRegistry::find(std::string_view name) const {
    for (std::size_t i = 0; i < channels_.size(); ++i) {
        if (channels_[i].name == name) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> ControlRegistry::find_abbrev(std::string_view abbrev) const {
    for (std::size_t i = 0; i < channels_.size(); ++i) {
        if (channels_[i].abbrev == abbrev) return i;
    }
    return std::nullopt;
}

std::size_t ControlRegistry::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw RangeError("unknown control channel '" + std::string(name) + "'");
}

const ControlRegistry& registry_default() {
    using G = ControlGroup;
    // Ranges per control from the reference control table; neutral values
    // from the rest-pose row of the summary statistics. Jaw Pitch rests at
    // 1.0 (top of its range); kept verbatim.
    static const ControlRegistry registry(std::vector<ControlChannel>{
        {"Jaw Pitch", "JP", 0.0, 1.0, 1.000, G::Mouth},
        {"Jaw Yaw", "JY", 0.0, 1.0, 0.500, G::Mouth},
        {"Lip Bottom Curl", "LBC", 0.0, 1.0, 0.460, G::Mouth},
        {"Lip Bottom Depress Left", "LBDL", 0.0, 1.0, 0.560, G::Mouth},
        {"Lip Bottom Depress Middle", "LBDM", 0.0, 1.0, 0.430, G::Mouth},
        {"Lip Bottom Depress Right", "LBDR", 0.0, 1.0, 0.540, G::Mouth},
        {"Lip Corner Raise Left", "LCRL", 0.0, 1.0, 0.470, G::Mouth},
        {"Lip Corner Raise Right", "LCRR", 0.0, 1.0, 0.620, G::Mouth},
        {"Lip Corner Stretch Left", "LCSL", 0.0, 1.0, 0.640, G::Mouth},
        {"Lip Corner Stretch Right", "LCSR", 0.0, 1.0, 0.310, G::Mouth},
        {"Lip Top Curl", "LTC", 0.0, 1.0, 0.410, G::Mouth},
        {"Lip Top Raise Left", "LTRL", 0.0, 1.0, 0.480, G::Mouth},
        {"Lip Top Raise Middle", "LTRM", 0.0, 1.0, 0.300, G::Mouth},
        {"Lip Top Raise Right", "LTRR", 0.0, 1.0, 0.450, G::Mouth},
        {"Nose Wrinkle", "NW", 0.0, 1.0, 0.000, G::Nose},
        {"Brow Inner Left", "BIL", 0.0, 1.0, 0.500, G::Brows},
        {"Brow Inner Right", "BIR", 0.0, 1.0, 0.500, G::Brows},
        {"Brow Outer Left", "BOL", 0.0, 1.0, 0.500, G::Brows},
        {"Brow Outer Right", "BOR", 0.0, 1.0, 0.500, G::Brows},
        {"Eyelid Lower Left", "ELL", -1.0, 2.0, 1.000, G::Lids},
        {"Eyelid Lower Right", "ELR", -1.0, 2.0, 1.000, G::Lids},
        {"Eyelid Upper Left", "EUL", -1.0, 2.0, 1.000, G::Lids},
        {"Eyelid Upper Right", "EUR", -1.0, 2.0, 1.000, G::Lids},
        {"Gaze Target Phi", "GTP", -2.3, 2.3, 0.000, G::Gaze},
        {"Gaze Target Theta", "GTT", -1.1, 1.1, 0.000, G::Gaze},
        {"Head Pitch", "HP", -0.5, 0.3, 0.000, G::Head},
        {"Head Roll", "HR", -0.3, 0.3, 0.000, G::Head},
        {"Head Yaw", "HY", -0.5, 0.5, 0.000, G::Head},
        {"Neck Pitch", "NP", -0.3, 0.5, 0.000, G::Neck},
        {"Neck Roll", "NR", -0.3, 0.3, 0.000, G::Neck},
    });
    return registry;
}

ControlVector neutral_vector(const ControlRegistry& registry) {
    ControlVector v;
    for (std::size_t i = 0; i < registry.size(); ++i) v[i] = registry[i].neutral;
    return v;
}

std::size_t clamp_counting(ControlVector& v, const ControlRegistry& registry) {
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < registry.size(); ++i) {
        const auto& c = registry[i];
        const double x = std::min(c.range_max, std::max(c.range_min, v[i]));
        if (x != v[i]) ++clamped;
        v[i] = x;
    }
    return clamped;
}

ControlVector clamp(const ControlVector& v, const ControlRegistry& registry) {
    ControlVector out = v;
    clamp_counting(out, registry);
    return out;
}

ControlVector clamp(std::span<const double> values, const ControlRegistry& registry) {
    return clamp(ControlVector::from_span(values), registry);
}

bool is_legal(const ControlVector& v, const ControlRegistry& registry) {
    for (std::size_t i = 0; i < registry.size(); ++i) {
        if (!(v[i] >= registry[i].range_min && v[i] <= registry[i].range_max)) return false;
    }
    return true;
}

std::vector<std::pair<std::size_t, std::size_t>> mirrored_pairs(const ControlRegistry& registry) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < registry.size(); ++i) {
        const auto& name = registry[i].name;
        constexpr std::string_view kLeft = " Left";
        if (name.size() > kLeft.size() && name.ends_with(kLeft)) {
            auto right = name.substr(0, name.size() - kLeft.size()) + " Right";
            if (auto j = registry.find(right)) pairs.emplace_back(i, *j);
        }
    }
    return pairs;
}

nlohmann::json registry_to_json(const ControlRegistry& registry) {
    auto doc = nlohmann::json::array();
    for (const auto& c : registry.channels()) {
        doc.push_back({{"name", c.name},
                       {"abbrev", c.abbrev},
                       {"min", c.range_min},
                       {"max", c.range_max},
                       {"neutral", c.neutral},
                       {"group", std::string(to_string(c.group))}});
    }
    return doc;
}

ControlRegistry registry_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) throw ParseError("registry: expected an array of channels");
    std::vector<ControlChannel> channels;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& c = doc[i];
        try {
            channels.push_back({c.at("name").get<std::string>(), c.at("abbrev").get<std::string>(),
                                c.at("min").get<double>(), c.at("max").get<double>(),
                                c.at("neutral").get<double>(),
                                control_group_from_string(c.at("group").get<std::string>())});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("registry[" + std::to_string(i) + "]: " + e.what());
        }
    }
    try {
        return ControlRegistry(std::move(channels));
    } catch (const StructuralError& e) {
        throw ParseError(std::string("registry: ") + e.what());
    }
}

}  // namespace facectl
