#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "facectl/face_render.hpp"

namespace facectl {

inline constexpr double kDefaultDedupThreshold = 0.99;

struct GlobalWindow {
    bool operator==(const GlobalWindow&) const = default;
};

struct SlidingWindow {
    int size = 8;
    int stride = 8;
    bool operator==(const SlidingWindow&) const = default;
};

using SsimWindow = std::variant<GlobalWindow, SlidingWindow>;

struct SsimParams {
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;  // L
    SsimWindow window = SlidingWindow{};

    // Derived on every call so edits to k1/k2/L are always reflected.
    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

nlohmann::json window_to_json(const SsimWindow& window);
SsimWindow window_from_json(const nlohmann::json& doc);
// "global" or "sliding:<size>:<stride>" (e.g. "sliding:8:8").
SsimWindow parse_window(std::string_view text);

// Structural similarity with population moments. Global mode evaluates one
// window covering the whole image; sliding mode averages the index over all
// size x size windows placed every `stride` pixels.
// Throws DimensionError for mismatched frames, ParameterError for windows
// larger than the image.
double ssim(const Frame& x, const Frame& y, const SsimParams& params = {});

struct PairScore {
    std::size_t anchor;     // index of the last kept frame
    std::size_t candidate;  // index of the frame compared against it
    double ssim;
    bool operator==(const PairScore&) const = default;
};

struct DedupReport {
    std::vector<std::size_t> kept_indices;
    std::vector<std::size_t> removed_indices;
    std::vector<PairScore> pairwise_scores;
    double threshold = kDefaultDedupThreshold;
};

nlohmann::json dedup_report_to_json(const DedupReport& report);

// Streaming near-duplicate filter: the first frame is always kept; each
// further frame is compared with the most recently kept frame and dropped
// iff ssim > threshold.
class Deduplicator {
public:
    // Throws ParameterError unless threshold is in (0, 1].
    explicit Deduplicator(double threshold = kDefaultDedupThreshold, SsimParams params = {});

    bool offer(const Frame& frame);

    const DedupReport& report() const { return report_; }
    DedupReport take_report() { return std::move(report_); }

private:
    SsimParams params_;
    DedupReport report_;
    std::optional<Frame> anchor_;
    std::size_t next_index_ = 0;
};

DedupReport dedup(std::span<const Frame> frames, double threshold = kDefaultDedupThreshold,
                  const SsimParams& params = {});

}  // namespace facectl
