#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <optional>
#include <random>

#include "facectl/curve_engine.hpp"
#include "facectl/error.hpp"
#include "oracles.hpp"

using namespace facectl;

namespace {

BezierSegment random_segment(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> start(0.0, 10.0), span(0.02, 5.0), val(-2.5, 2.5), frac(0.0, 1.0);
    const double t0 = start(rng), t1 = t0 + span(rng);
    return {{t0, val(rng)},
            {t0 + frac(rng) * (t1 - t0), val(rng)},
            {t0 + frac(rng) * (t1 - t0), val(rng)},
            {t1, val(rng)}};
}

Keyframe key(double t, double v, Interpolation mode = Interpolation::Linear) {
    Keyframe k;
    k.time = t;
    k.value = v;
    k.mode = mode;
    return k;
}

Keyframe bezier_key(double t, double v, CurvePoint out, CurvePoint in_next) {
    Keyframe k = key(t, v, Interpolation::CubicBezier);
    k.out_handle = out;
    k.in_handle_of_next = in_next;
    return k;
}

}  // namespace

TEST(Bezier, EndpointsAreExact) {
    const BezierSegment seg{{0.5, 0.1}, {0.7, 0.9}, {1.1, -0.3}, {2.0, 0.4}};
    EXPECT_EQ(eval_bezier_param(seg, 0.0), seg.p0);
    EXPECT_EQ(eval_bezier_param(seg, 1.0), seg.p3);
}

TEST(Bezier, MidpointIdentity) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto s = random_segment(rng);
        const auto m = eval_bezier_param(s, 0.5);
        EXPECT_NEAR(m.time, (s.p0.time + 3 * s.p1.time + 3 * s.p2.time + s.p3.time) / 8, 1e-12);
        EXPECT_NEAR(m.value, (s.p0.value + 3 * s.p1.value + 3 * s.p2.value + s.p3.value) / 8, 1e-12);
    }
}

TEST(Bezier, ParameterOutsideUnitIntervalRejected) {
    const BezierSegment seg{{0, 0}, {0.3, 0}, {0.6, 1}, {1, 1}};
    EXPECT_THROW(eval_bezier_param(seg, -0.01), ParameterError);
    EXPECT_THROW(eval_bezier_param(seg, 1.01), ParameterError);
    EXPECT_THROW(eval_bezier_param(seg, std::nan("")), ParameterError);
}

TEST(Bezier, SolveEndpoints) {
    const BezierSegment seg{{1, 0}, {1.2, 2}, {1.9, -1}, {3, 1}};
    EXPECT_EQ(solve_bezier_time(seg, 1.0), 0.0);
    EXPECT_EQ(solve_bezier_time(seg, 3.0), 1.0);
}

TEST(Bezier, UniformHandlesInvertAffinely) {
    // Handles at 1/3 and 2/3 of the span make Bx(u) = t0 + u (t1 - t0).
    const BezierSegment seg{{2, 0}, {2 + 4.0 / 3, 5}, {2 + 8.0 / 3, -5}, {6, 1}};
    EXPECT_NEAR(solve_bezier_time(seg, 4.0), 0.5, 1e-9);
}

TEST(Bezier, SolveRejectsBadInput) {
    const BezierSegment seg{{0, 0}, {0.3, 0}, {0.6, 1}, {1, 1}};
    EXPECT_THROW(solve_bezier_time(seg, -0.1), RangeError);
    EXPECT_THROW(solve_bezier_time(seg, 1.1), RangeError);
    const BezierSegment loop{{0, 0}, {1.5, 0}, {0.6, 1}, {1, 1}};
    EXPECT_THROW(solve_bezier_time(loop, 0.5), ParameterError);
}

TEST(Bezier, InversionResidualOnRandomSegments) {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_segment(rng);
        const double t = s.p0.time + frac(rng) * (s.p3.time - s.p0.time);
        const double u = solve_bezier_time(s, t);
        ASSERT_GE(u, 0.0);
        ASSERT_LE(u, 1.0);
        EXPECT_LE(std::abs(eval_bezier_param(s, u).time - t), 1e-9) << "segment " << i;
    }
}

TEST(Bezier, DegenerateHandlesStillConverge) {
    // Both handles on the start time: Bx'(0) = 0 and the curve is flat there.
    const BezierSegment seg{{0, 0}, {0, 1}, {0, 1}, {1, 1}};
    for (double t : {1e-12, 1e-6, 0.001, 0.5, 0.999999}) {
        const double u = solve_bezier_time(seg, t);
        EXPECT_LE(std::abs(eval_bezier_param(seg, u).time - t), 1e-9);
    }
}

TEST(Bezier, MatchesDensePolylineOracle) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> frac(0.01, 0.99);
    for (int i = 0; i < 20; ++i) {
        const auto s = random_segment(rng);
        const oracle::DenseBezier ref({s.p0.time, s.p0.value}, {s.p1.time, s.p1.value}, {s.p2.time, s.p2.value},
                                      {s.p3.time, s.p3.value});
        for (int j = 0; j < 50; ++j) {
            const double t = s.p0.time + frac(rng) * (s.p3.time - s.p0.time);
            EXPECT_NEAR(eval_bezier_at_time(s, t), ref.value_at(t), 1e-9) << "segment " << i << " t " << t;
        }
    }
}

TEST(Linear, Examples) {
    EXPECT_EQ(eval_linear({0, 0}, {2, 1}, 0.5), 0.25);
    EXPECT_EQ(eval_linear({1, 0.3}, {2, 0.9}, 1.0), 0.3);
    EXPECT_EQ(eval_linear({1, 0.3}, {2, 0.9}, 2.0), 0.9);
    EXPECT_THROW(eval_linear({1, 0}, {1, 1}, 1.0), ParameterError);
    EXPECT_THROW(eval_linear({0, 0}, {1, 1}, 1.5), RangeError);
}

TEST(Linear, EqualsBezierWithThirdHandles) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> val(-2, 2), frac(0, 1);
    for (int i = 0; i < 500; ++i) {
        const CurvePoint a{frac(rng) * 3, val(rng)};
        const CurvePoint b{a.time + 0.05 + frac(rng) * 4, val(rng)};
        const BezierSegment seg{a,
                                {a.time + (b.time - a.time) / 3, a.value + (b.value - a.value) / 3},
                                {a.time + 2 * (b.time - a.time) / 3, a.value + 2 * (b.value - a.value) / 3},
                                b};
        const double t = a.time + frac(rng) * (b.time - a.time);
        EXPECT_NEAR(eval_bezier_at_time(seg, t), eval_linear(a, b, t), 1e-9);
    }
}

TEST(Step, HoldsUntilEnd) {
    const CurvePoint a{1.0, 0.2}, b{2.0, 0.8};
    EXPECT_EQ(eval_step(a, b, 1.0), 0.2);
    EXPECT_EQ(eval_step(a, b, std::nextafter(2.0, 0.0)), 0.2);
    EXPECT_EQ(eval_step(a, b, 1.5), 0.2);
    EXPECT_EQ(eval_step(a, b, 2.0), 0.8);
    EXPECT_THROW(eval_step(a, b, 2.5), RangeError);
}

TEST(Track, ValidatesKeys) {
    EXPECT_THROW(Track(0, {}), StructuralError);
    EXPECT_THROW(Track(0, {key(1, 0), key(1, 1)}), StructuralError);
    EXPECT_THROW(Track(0, {key(1, 0), key(0.5, 1)}), StructuralError);
    EXPECT_THROW(Track(0, {key(-1, 0)}), StructuralError);
    Keyframe missing = key(0, 0, Interpolation::CubicBezier);
    missing.out_handle = CurvePoint{0.2, 0};
    EXPECT_THROW(Track(0, {missing, key(1, 1)}), StructuralError);
    // The last key's mode has no segment, so handles are not required there.
    EXPECT_NO_THROW(Track(0, {key(0, 0), key(1, 1, Interpolation::CubicBezier)}));
}

TEST(Track, ClampsHandleTimesIntoSpan) {
    const Track tr(0, {bezier_key(0, 0, {-0.5, 0.2}, {1.7, 0.8}), key(1, 1)});
    EXPECT_EQ(tr.clamped_handles(), 2u);
    EXPECT_EQ(tr.keys()[0].out_handle->time, 0.0);
    EXPECT_EQ(tr.keys()[0].in_handle_of_next->time, 1.0);
    EXPECT_TRUE(tr.bezier_segment(0).is_time_monotone());
}

TEST(Track, ConstantExtrapolation) {
    const Track single(3, {key(0, 0.3, Interpolation::Step)});
    for (double t : {0.0, 0.5, 7.0, 1e6}) EXPECT_EQ(eval_track(single, t), 0.3);
    const Track late(3, {key(1, 0.1), key(2, 0.9)});
    EXPECT_EQ(eval_track(late, 0.0), 0.1);
    EXPECT_EQ(eval_track(late, 5.0), 0.9);
    EXPECT_THROW(eval_track(late, -0.01), RangeError);
}

TEST(Track, LinearExample) {
    const Track tr(0, {key(0, 0), key(1, 1)});
    EXPECT_EQ(eval_track(tr, 0.25), 0.25);
}

TEST(Track, KnotHitsReturnKeyValue) {
    const Track tr(0, {bezier_key(0, 0.1, {0.2, 0.9}, {0.8, -0.4}), key(1, 0.6, Interpolation::Step),
                       key(2, 0.3, Interpolation::Linear), key(3, 0.9)});
    EXPECT_EQ(eval_track(tr, 0.0), 0.1);
    EXPECT_EQ(eval_track(tr, 1.0), 0.6);
    EXPECT_EQ(eval_track(tr, 2.0), 0.3);
    EXPECT_EQ(eval_track(tr, 3.0), 0.9);
    EXPECT_EQ(eval_track(tr, 1.5), 0.6);
}

TEST(Track, AgreesWithDenseOracleAcrossModes) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> frac(0.0, 1.0), val(-1.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Keyframe> keys;
        double t = 0.0;
        for (int k = 0; k < 5; ++k) {
            const auto mode = static_cast<Interpolation>(k % 3);
            Keyframe kf = key(t, val(rng), mode);
            keys.push_back(kf);
            t += 0.1 + frac(rng);
        }
        for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
            if (keys[k].mode != Interpolation::CubicBezier) continue;
            const double a = keys[k].time, b = keys[k + 1].time;
            keys[k].out_handle = CurvePoint{a + frac(rng) * (b - a), val(rng)};
            keys[k].in_handle_of_next = CurvePoint{a + frac(rng) * (b - a), val(rng)};
        }
        const Track tr(0, keys);
        for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
            const oracle::Pt p0{keys[k].time, keys[k].value}, p3{keys[k + 1].time, keys[k + 1].value};
            std::optional<oracle::DenseBezier> curve;
            if (keys[k].mode == Interpolation::CubicBezier) {
                const auto& h1 = *keys[k].out_handle;
                const auto& h2 = *keys[k].in_handle_of_next;
                curve.emplace(p0, oracle::Pt{h1.time, h1.value}, oracle::Pt{h2.time, h2.value}, p3);
            }
            for (int j = 0; j < 20; ++j) {
                const double q = p0.t + (0.001 + 0.998 * frac(rng)) * (p3.t - p0.t);
                double want = 0.0;
                switch (keys[k].mode) {
                    case Interpolation::Linear: want = oracle::dense_linear(p0, p3, q); break;
                    case Interpolation::Step: want = oracle::dense_step(p0, p3, q); break;
                    case Interpolation::CubicBezier: want = curve->value_at(q); break;
                }
                EXPECT_NEAR(eval_track(tr, q), want, 1e-9) << "trial " << trial << " segment " << k;
            }
        }
    }
}

TEST(Track, Deterministic) {
    const Track tr(0, {bezier_key(0, 0.1, {0.3, 0.9}, {0.6, -0.4}), key(1, 0.6)});
    for (double t = 0; t < 1; t += 0.013) {
        const double a = eval_track(tr, t), b = eval_track(tr, t);
        EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
    }
}
