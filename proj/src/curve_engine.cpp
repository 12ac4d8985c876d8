#include "facectl/curve_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "facectl/error.hpp"

namespace facectl {

std::string_view to_string(Interpolation mode) {
    switch (mode) {
        case Interpolation::CubicBezier: return "cubic_bezier";
        case Interpolation::Linear: return "linear";
        case Interpolation::Step: return "step";
    }
    return "";
}

std::optional<Interpolation> interpolation_from_string(std::string_view name) {
    if (name == "cubic_bezier") return Interpolation::CubicBezier;
    if (name == "linear") return Interpolation::Linear;
    if (name == "step") return Interpolation::Step;
    return std::nullopt;
}

namespace {

double bernstein(double a, double b, double c, double d, double u) {
    const double v = 1.0 - u;
    return v * v * v * a + 3.0 * v * v * u * b + 3.0 * v * u * u * c + u * u * u * d;
}

double bernstein_derivative(double a, double b, double c, double d, double u) {
    const double v = 1.0 - u;
    return 3.0 * (v * v * (b - a) + 2.0 * v * u * (c - b) + u * u * (d - c));
}

}  // namespace

bool BezierSegment::is_time_monotone() const {
    const auto inside = [&](double x) { return x >= p0.time && x <= p3.time; };
    return p0.time < p3.time && inside(p1.time) && inside(p2.time);
}

CurvePoint eval_bezier_param(const BezierSegment& seg, double u) {
    if (!(u >= 0.0 && u <= 1.0)) {
        throw ParameterError("bezier parameter u=" + std::to_string(u) + " outside [0, 1]");
    }
    return {bernstein(seg.p0.time, seg.p1.time, seg.p2.time, seg.p3.time, u),
            bernstein(seg.p0.value, seg.p1.value, seg.p2.value, seg.p3.value, u)};
}

double solve_bezier_time(const BezierSegment& seg, double t, double tol) {
    if (!seg.is_time_monotone()) {
        throw ParameterError("bezier segment handles must lie inside the segment time span");
    }
    if (!(t >= seg.p0.time && t <= seg.p3.time)) {
        throw RangeError("time " + std::to_string(t) + " outside bezier segment [" +
                         std::to_string(seg.p0.time) + ", " + std::to_string(seg.p3.time) + "]");
    }
    if (t == seg.p0.time) return 0.0;
    if (t == seg.p3.time) return 1.0;

    const double a = seg.p0.time, b = seg.p1.time, c = seg.p2.time, d = seg.p3.time;
    double lo = 0.0, hi = 1.0;
    double u = (t - a) / (d - a);
    for (int iter = 0; iter < kBezierMaxIterations; ++iter) {
        const double f = bernstein(a, b, c, d, u) - t;
        const double slope = bernstein_derivative(a, b, c, d, u);
        if (std::abs(f) <= tol) {
            // Polish once; the value error is the time error times the slope.
            if (f != 0.0 && slope > 0.0) {
                const double polished = u - f / slope;
                if (polished >= 0.0 && polished <= 1.0 &&
                    std::abs(bernstein(a, b, c, d, polished) - t) <= std::abs(f)) {
                    return polished;
                }
            }
            return u;
        }
        // Bx is non-decreasing, so the sign of f tells which side the root is on.
        (f < 0.0 ? lo : hi) = u;
        const double next = slope > 0.0 ? u - f / slope : lo;
        u = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
    }
    throw NumericError("bezier time inversion did not converge for t=" + std::to_string(t));
}

double eval_bezier_at_time(const BezierSegment& seg, double t, double tol) {
    if (t == seg.p3.time) return seg.p3.value;
    return eval_bezier_param(seg, solve_bezier_time(seg, t, tol)).value;
}

double eval_linear(CurvePoint p0, CurvePoint p1, double t) {
    if (!(p0.time < p1.time)) throw ParameterError("linear segment has a degenerate time span");
    if (!(t >= p0.time && t <= p1.time)) throw RangeError("time outside linear segment");
    if (t == p1.time) return p1.value;
    return p0.value + (p1.value - p0.value) * (t - p0.time) / (p1.time - p0.time);
}

double eval_step(CurvePoint p0, CurvePoint p1, double t) {
    if (!(t >= p0.time && t <= p1.time)) throw RangeError("time outside step segment");
    return t == p1.time ? p1.value : p0.value;
}

Track::Track(std::size_t channel_index, std::vector<Keyframe> keys)
    : channel_(channel_index), keys_(std::move(keys)) {
    if (keys_.empty()) throw StructuralError("track needs at least one keyframe");
    for (std::size_t i = 0; i < keys_.size(); ++i) {
        const auto& k = keys_[i];
        if (!std::isfinite(k.time) || !std::isfinite(k.value)) {
            throw StructuralError("keyframe " + std::to_string(i) + " is not finite");
        }
        if (k.time < 0.0) throw StructuralError("keyframe " + std::to_string(i) + " has negative time");
        if (i > 0 && !(keys_[i - 1].time < k.time)) {
            throw StructuralError("keyframe times must be strictly increasing (key " + std::to_string(i) + ")");
        }
    }
    for (std::size_t i = 0; i + 1 < keys_.size(); ++i) {
        auto& k = keys_[i];
        if (k.mode != Interpolation::CubicBezier) continue;
        if (!k.out_handle || !k.in_handle_of_next) {
            throw StructuralError("cubic_bezier keyframe " + std::to_string(i) + " is missing a handle");
        }
        const double lo = k.time, hi = keys_[i + 1].time;
        for (auto* h : {&*k.out_handle, &*k.in_handle_of_next}) {
            if (!std::isfinite(h->time) || !std::isfinite(h->value)) {
                throw StructuralError("keyframe " + std::to_string(i) + " has a non-finite handle");
            }
            const double clamped = std::clamp(h->time, lo, hi);
            if (clamped != h->time) {
                h->time = clamped;
                ++clamped_handles_;
            }
        }
    }
}

BezierSegment Track::bezier_segment(std::size_t i) const {
    const auto& k = keys_.at(i);
    const auto& next = keys_.at(i + 1);
    if (k.mode != Interpolation::CubicBezier) throw ParameterError("segment is not cubic_bezier");
    return {{k.time, k.value}, *k.out_handle, *k.in_handle_of_next, {next.time, next.value}};
}

double eval_track(const Track& track, double t) {
    if (!(t >= 0.0)) throw RangeError("track evaluated at negative or NaN time");
    const auto& keys = track.keys();
    if (t <= keys.front().time) return keys.front().value;
    if (t >= keys.back().time) return keys.back().value;

    const auto next = std::upper_bound(keys.begin(), keys.end(), t,
                                       [](double x, const Keyframe& k) { return x < k.time; });
    const auto i = static_cast<std::size_t>(std::distance(keys.begin(), next)) - 1;
    const auto& k0 = keys[i];
    const auto& k1 = keys[i + 1];
    if (t == k0.time) return k0.value;

    const CurvePoint p0{k0.time, k0.value}, p1{k1.time, k1.value};
    switch (k0.mode) {
        case Interpolation::Linear: return eval_linear(p0, p1, t);
        case Interpolation::Step: return eval_step(p0, p1, t);
        case Interpolation::CubicBezier: return eval_bezier_at_time(track.bezier_segment(i), t);
    }
    throw StructuralError("unknown interpolation mode");
}

}  // namespace facectl
