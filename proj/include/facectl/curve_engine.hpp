#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace facectl {

// A point in the (time, value) plane of a control curve.
struct CurvePoint {
    double time = 0.0;
    double value = 0.0;
    bool operator==(const CurvePoint&) const = default;
};

enum class Interpolation { CubicBezier, Linear, Step };

std::string_view to_string(Interpolation mode);
// Accepts the clip-file spellings "cubic_bezier", "linear", "step".
std::optional<Interpolation> interpolation_from_string(std::string_view name);

// A keyframe owns the segment that starts at it. For CubicBezier segments the
// two inner control points live here: `out_handle` leaves this key and
// `in_handle_of_next` enters the following one.
struct Keyframe {
    double time = 0.0;
    double value = 0.0;
    Interpolation mode = Interpolation::Linear;
    std::optional<CurvePoint> out_handle;
    std::optional<CurvePoint> in_handle_of_next;

    bool operator==(const Keyframe&) const = default;
};

struct BezierSegment {
    CurvePoint p0, p1, p2, p3;

    // p0.time < p3.time and both handle times inside [p0.time, p3.time].
    bool is_time_monotone() const;
};

inline constexpr double kBezierTimeTolerance = 1e-9;
inline constexpr int kBezierMaxIterations = 100;

// Cubic Bernstein blend of the four control points, component-wise.
// Throws ParameterError for u outside [0, 1].
CurvePoint eval_bezier_param(const BezierSegment& seg, double u);

// Inverts the time component: returns u in [0, 1] with |Bx(u) - t| <= tol.
// Newton iteration safeguarded by a shrinking bisection bracket.
// Throws RangeError for t outside the segment span, ParameterError for a
// segment whose time component is not monotone, NumericError when the
// iteration cap is hit.
double solve_bezier_time(const BezierSegment& seg, double t, double tol = kBezierTimeTolerance);

// Value of the segment at playback time t.
double eval_bezier_at_time(const BezierSegment& seg, double t, double tol = kBezierTimeTolerance);

// Straight-line transition between (t0, P0) and (t1, P1).
double eval_linear(CurvePoint p0, CurvePoint p1, double t);

// Holds P0 on [t0, t1), jumps to P1 at exactly t1.
double eval_step(CurvePoint p0, CurvePoint p1, double t);

// Keyframe track of one control channel.
class Track {
public:
    // Validates ordering (strictly increasing times, time >= 0, at least one
    // key) and Bezier handle presence; throws StructuralError otherwise.
    // Handle times that fall outside their segment span are clamped into it;
    // the number of clamped handle coordinates is reported by
    // clamped_handles().
    Track(std::size_t channel_index, std::vector<Keyframe> keys);

    std::size_t channel_index() const { return channel_; }
    const std::vector<Keyframe>& keys() const { return keys_; }
    std::size_t clamped_handles() const { return clamped_handles_; }

    // Bezier segment starting at key i (requires key i to be CubicBezier and
    // i + 1 < keys().size()).
    BezierSegment bezier_segment(std::size_t i) const;

    bool operator==(const Track& other) const {
        return channel_ == other.channel_ && keys_ == other.keys_;
    }

private:
    std::size_t channel_;
    std::vector<Keyframe> keys_;
    std::size_t clamped_handles_ = 0;
};

// Value of the track at time t >= 0. Before the first key and after the last
// key the nearest key's value is held. Throws RangeError for t < 0.
double eval_track(const Track& track, double t);

}  // namespace facectl
