#include "facectl/similarity.hpp"

#include <charconv>
#include <cstdint>
#include <string>

#include "facectl/error.hpp"

namespace facectl {

nlohmann::json window_to_json(const SsimWindow& window) {
    if (const auto* s = std::get_if<SlidingWindow>(&window)) {
        return {{"mode", "sliding"}, {"size", s->size}, {"stride", s->stride}};
    }
    return {{"mode", "global"}};
}

SsimWindow window_from_json(const nlohmann::json& doc) {
    try {
        const auto mode = doc.at("mode").get<std::string>();
        if (mode == "global") return GlobalWindow{};
        if (mode == "sliding") return SlidingWindow{doc.at("size").get<int>(), doc.at("stride").get<int>()};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("ssim window: ") + e.what());
    }
    throw ParseError("ssim window: mode must be 'global' or 'sliding'");
}

SsimWindow parse_window(std::string_view text) {
    if (text == "global") return GlobalWindow{};
    constexpr std::string_view prefix = "sliding:";
    if (text.starts_with(prefix)) {
        text.remove_prefix(prefix.size());
        const auto colon = text.find(':');
        SlidingWindow w;
        const auto size_part = text.substr(0, colon);
        auto [p1, e1] = std::from_chars(size_part.data(), size_part.data() + size_part.size(), w.size);
        bool ok = e1 == std::errc{} && p1 == size_part.data() + size_part.size();
        if (colon == std::string_view::npos) {
            w.stride = w.size;
        } else {
            const auto stride_part = text.substr(colon + 1);
            auto [p2, e2] = std::from_chars(stride_part.data(), stride_part.data() + stride_part.size(), w.stride);
            ok = ok && e2 == std::errc{} && p2 == stride_part.data() + stride_part.size();
        }
        if (ok && w.size > 0 && w.stride > 0) return w;
    }
    throw ParameterError("ssim window must be 'global' or 'sliding:<size>[:<stride>]', got '" + std::string(text) + "'");
}

namespace {

// Exact integer moments of one window; converted to floating point only when
// forming the index, so ssim(x, x) is exactly 1 and ssim is exactly
// symmetric.
double window_ssim(const Frame& x, const Frame& y, int x0, int y0, int w, int h, double c1, double c2) {
    std::int64_t sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int r = y0; r < y0 + h; ++r) {
        const std::uint8_t* px = x.pixels.data() + static_cast<std::size_t>(r) * x.width + x0;
        const std::uint8_t* py = y.pixels.data() + static_cast<std::size_t>(r) * y.width + x0;
        for (int c = 0; c < w; ++c) {
            const std::int64_t a = px[c], b = py[c];
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
    }
    using Wide = __int128;
    const Wide n = static_cast<Wide>(w) * h;
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    const double mx = static_cast<double>(sx) / static_cast<double>(n);
    const double my = static_cast<double>(sy) / static_cast<double>(n);
    const double vx = static_cast<double>(n * sxx - static_cast<Wide>(sx) * sx) / n2;
    const double vy = static_cast<double>(n * syy - static_cast<Wide>(sy) * sy) / n2;
    const double cxy = static_cast<double>(n * sxy - static_cast<Wide>(sx) * sy) / n2;
    return ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

}  // namespace

double ssim(const Frame& x, const Frame& y, const SsimParams& params) {
    if (x.width != y.width || x.height != y.height) {
        throw DimensionError("ssim needs equal frame sizes, got " + std::to_string(x.width) + "x" +
                             std::to_string(x.height) + " and " + std::to_string(y.width) + "x" +
                             std::to_string(y.height));
    }
    if (x.width <= 0 || x.height <= 0) throw DimensionError("ssim needs non-empty frames");
    const double c1 = params.c1(), c2 = params.c2();
    if (!(c1 > 0.0 && c2 > 0.0)) throw ParameterError("ssim stability constants must be positive");

    if (std::holds_alternative<GlobalWindow>(params.window)) {
        return window_ssim(x, y, 0, 0, x.width, x.height, c1, c2);
    }
    const auto& win = std::get<SlidingWindow>(params.window);
    if (win.size <= 0 || win.stride <= 0) throw ParameterError("ssim window size and stride must be positive");
    if (win.size > x.width || win.size > x.height) {
        throw ParameterError("ssim window of " + std::to_string(win.size) + " px exceeds the image");
    }
    double total = 0.0;
    std::size_t count = 0;
    for (int r = 0; r + win.size <= x.height; r += win.stride) {
        for (int c = 0; c + win.size <= x.width; c += win.stride) {
            total += window_ssim(x, y, c, r, win.size, win.size, c1, c2);
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

nlohmann::json dedup_report_to_json(const DedupReport& report) {
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& s : report.pairwise_scores) scores.push_back({s.anchor, s.candidate, s.ssim});
    return {{"threshold", report.threshold},
            {"kept_indices", report.kept_indices},
            {"removed_indices", report.removed_indices},
            {"pairwise_scores", scores}};
}

Deduplicator::Deduplicator(double threshold, SsimParams params) : params_(std::move(params)) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ParameterError("dedup threshold must be in (0, 1], got " + std::to_string(threshold));
    }
    report_.threshold = threshold;
}

bool Deduplicator::offer(const Frame& frame) {
    const std::size_t index = next_index_++;
    if (!anchor_) {
        anchor_ = frame;
        report_.kept_indices.push_back(index);
        return true;
    }
    const double score = ssim(*anchor_, frame, params_);
    report_.pairwise_scores.push_back({report_.kept_indices.back(), index, score});
    if (score > report_.threshold) {
        report_.removed_indices.push_back(index);
        return false;
    }
    anchor_ = frame;
    report_.kept_indices.push_back(index);
    return true;
}

DedupReport dedup(std::span<const Frame> frames, double threshold, const SsimParams& params) {
    Deduplicator d(threshold, params);
    for (const auto& f : frames) d.offer(f);
    return d.take_report();
}

}  // namespace facectl
