#include "facectl/face_render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string_view>

#include "facectl/error.hpp"
#include "facectl/parallel.hpp"
#include "facectl/random.hpp"

namespace facectl {

Frame mirror_horizontal(const Frame& frame) {
    Frame out = frame;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) out.at(x, y) = frame.at(frame.width - 1 - x, y);
    }
    return out;
}

std::uint64_t frame_checksum(const Frame& frame) {
    std::uint64_t h = fnv1a64(std::string_view(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size()));
    return splitmix64(h ^ (static_cast<std::uint64_t>(frame.width) << 32 | static_cast<std::uint64_t>(frame.height)));
}

// ---------------------------------------------------------------------------
// Geometry configuration

namespace {

struct ParamSpec {
    std::string_view abbrev;
    std::string_view param;
    double FaceParams::*scalar;
    std::array<double, 2> FaceParams::*pair;
    Side side;
    bool positive;  // size-like parameter that must stay > 0 over the range
};

constexpr double FaceParams::*kNoScalar = nullptr;
constexpr std::array<double, 2> FaceParams::*kNoPair = nullptr;

// Which shape parameter each channel drives, grouped by expression unit.
const std::array<ParamSpec, kNumControls>& param_specs() {
    using P = FaceParams;
    static const std::array<ParamSpec, kNumControls> specs{{
        {"JP", "jaw_open", &P::jaw_open, kNoPair, kLeft, false},
        {"JY", "jaw_shift", &P::jaw_shift, kNoPair, kLeft, false},
        {"LBC", "lower_lip_thickness", &P::lower_lip_thickness, kNoPair, kLeft, true},
        {"LBDL", "lip_depress_left", kNoScalar, &P::lip_depress, kLeft, false},
        {"LBDM", "lip_depress_mid", &P::lip_depress_mid, kNoPair, kLeft, false},
        {"LBDR", "lip_depress_right", kNoScalar, &P::lip_depress, kRight, false},
        {"LCRL", "corner_raise_left", kNoScalar, &P::corner_raise, kLeft, false},
        {"LCRR", "corner_raise_right", kNoScalar, &P::corner_raise, kRight, false},
        {"LCSL", "corner_stretch_left", kNoScalar, &P::corner_stretch, kLeft, true},
        {"LCSR", "corner_stretch_right", kNoScalar, &P::corner_stretch, kRight, true},
        {"LTC", "upper_lip_thickness", &P::upper_lip_thickness, kNoPair, kLeft, true},
        {"LTRL", "lip_raise_left", kNoScalar, &P::lip_raise, kLeft, false},
        {"LTRM", "lip_raise_mid", &P::lip_raise_mid, kNoPair, kLeft, false},
        {"LTRR", "lip_raise_right", kNoScalar, &P::lip_raise, kRight, false},
        {"NW", "wrinkle_frequency", &P::wrinkle_frequency, kNoPair, kLeft, true},
        {"BIL", "brow_inner_left", kNoScalar, &P::brow_inner, kLeft, false},
        {"BIR", "brow_inner_right", kNoScalar, &P::brow_inner, kRight, false},
        {"BOL", "brow_outer_left", kNoScalar, &P::brow_outer, kLeft, false},
        {"BOR", "brow_outer_right", kNoScalar, &P::brow_outer, kRight, false},
        {"ELL", "lid_lower_left", kNoScalar, &P::lid_lower, kLeft, true},
        {"ELR", "lid_lower_right", kNoScalar, &P::lid_lower, kRight, true},
        {"EUL", "lid_upper_left", kNoScalar, &P::lid_upper, kLeft, true},
        {"EUR", "lid_upper_right", kNoScalar, &P::lid_upper, kRight, true},
        {"GTP", "gaze_dx", &P::gaze_dx, kNoPair, kLeft, false},
        {"GTT", "gaze_dy", &P::gaze_dy, kNoPair, kLeft, false},
        {"HP", "head_scale_y", &P::head_scale_y, kNoPair, kLeft, true},
        {"HR", "head_roll", &P::head_roll, kNoPair, kLeft, false},
        {"HY", "head_shear", &P::head_shear, kNoPair, kLeft, false},
        {"NP", "neck_dy", &P::neck_dy, kNoPair, kLeft, false},
        {"NR", "neck_roll", &P::neck_roll, kNoPair, kLeft, false},
    }};
    return specs;
}

const ParamSpec* spec_for(std::string_view abbrev) {
    for (const auto& s : param_specs()) {
        if (s.abbrev == abbrev) return &s;
    }
    return nullptr;
}

nlohmann::json layout_to_json(const FaceLayout& l) {
    return {
        {"canvas_scale", l.canvas_scale},
        {"face_half_width", l.face_half_width},
        {"face_half_height", l.face_half_height},
        {"chin_center_y", l.chin_center_y},
        {"chin_half_width", l.chin_half_width},
        {"chin_half_height", l.chin_half_height},
        {"chin_drop_gain", l.chin_drop_gain},
        {"brow_y", l.brow_y},
        {"brow_inner_x", l.brow_inner_x},
        {"brow_outer_x", l.brow_outer_x},
        {"brow_outer_dy", l.brow_outer_dy},
        {"brow_half_thickness", l.brow_half_thickness},
        {"eye_x", l.eye_x},
        {"eye_y", l.eye_y},
        {"eye_half_width", l.eye_half_width},
        {"pupil_radius", l.pupil_radius},
        {"nose_band_half_width", l.nose_band_half_width},
        {"nose_band_top", l.nose_band_top},
        {"nose_band_bottom", l.nose_band_bottom},
        {"hatch_duty", l.hatch_duty},
        {"nose_tip_y", l.nose_tip_y},
        {"nose_tip_half_width", l.nose_tip_half_width},
        {"nose_tip_half_height", l.nose_tip_half_height},
        {"mouth_y", l.mouth_y},
        {"lip_line_half_thickness", l.lip_line_half_thickness},
        {"neck_pivot_y", l.neck_pivot_y},
        {"intensity",
         {{"background", l.background},
          {"skin", l.skin},
          {"chin", l.chin},
          {"hatch", l.hatch},
          {"nose", l.nose},
          {"brow", l.brow},
          {"sclera", l.sclera},
          {"pupil", l.pupil},
          {"lip", l.lip},
          {"mouth", l.mouth},
          {"lip_line", l.lip_line}}},
    };
}

FaceLayout layout_from_json(const nlohmann::json& doc) {
    FaceLayout l;
    auto num = [&](const char* key, double& out) {
        if (!doc.contains(key) || !doc[key].is_number()) throw ParseError(std::string("$.layout.") + key + ": expected a number");
        out = doc[key].get<double>();
    };
    num("canvas_scale", l.canvas_scale);
    num("face_half_width", l.face_half_width);
    num("face_half_height", l.face_half_height);
    num("chin_center_y", l.chin_center_y);
    num("chin_half_width", l.chin_half_width);
    num("chin_half_height", l.chin_half_height);
    num("chin_drop_gain", l.chin_drop_gain);
    num("brow_y", l.brow_y);
    num("brow_inner_x", l.brow_inner_x);
    num("brow_outer_x", l.brow_outer_x);
    num("brow_outer_dy", l.brow_outer_dy);
    num("brow_half_thickness", l.brow_half_thickness);
    num("eye_x", l.eye_x);
    num("eye_y", l.eye_y);
    num("eye_half_width", l.eye_half_width);
    num("pupil_radius", l.pupil_radius);
    num("nose_band_half_width", l.nose_band_half_width);
    num("nose_band_top", l.nose_band_top);
    num("nose_band_bottom", l.nose_band_bottom);
    num("hatch_duty", l.hatch_duty);
    num("nose_tip_y", l.nose_tip_y);
    num("nose_tip_half_width", l.nose_tip_half_width);
    num("nose_tip_half_height", l.nose_tip_half_height);
    num("mouth_y", l.mouth_y);
    num("lip_line_half_thickness", l.lip_line_half_thickness);
    num("neck_pivot_y", l.neck_pivot_y);

    if (!doc.contains("intensity") || !doc["intensity"].is_object()) throw ParseError("$.layout.intensity: expected an object");
    const auto& in = doc["intensity"];
    auto level = [&](const char* key, int& out) {
        if (!in.contains(key) || !in[key].is_number_integer()) throw ParseError(std::string("$.layout.intensity.") + key + ": expected an integer");
        out = in[key].get<int>();
        if (out < 0 || out > 255) throw ParseError(std::string("$.layout.intensity.") + key + ": outside [0, 255]");
    };
    level("background", l.background);
    level("skin", l.skin);
    level("chin", l.chin);
    level("hatch", l.hatch);
    level("nose", l.nose);
    level("brow", l.brow);
    level("sclera", l.sclera);
    level("pupil", l.pupil);
    level("lip", l.lip);
    level("mouth", l.mouth);
    level("lip_line", l.lip_line);
    if (!(l.canvas_scale > 0.0)) throw ParseError("$.layout.canvas_scale: must be positive");
    return l;
}

}  // namespace

const FaceGeometry& default_geometry() {
    static const FaceGeometry geo = [] {
        FaceGeometry g;
        g.version = "schematic-v1";
        g.maps = {
            {"jaw_open", 0.0, -0.14},
            {"jaw_shift", 0.0, 0.10},
            {"lower_lip_thickness", 0.055, 0.04},
            {"lip_depress_left", 0.0, 0.06},
            {"lip_depress_mid", 0.0, 0.06},
            {"lip_depress_right", 0.0, 0.06},
            {"corner_raise_left", 0.0, 0.08},
            {"corner_raise_right", 0.0, 0.08},
            {"corner_stretch_left", 0.24, 0.08},
            {"corner_stretch_right", 0.24, 0.08},
            {"upper_lip_thickness", 0.045, 0.04},
            {"lip_raise_left", 0.0, 0.05},
            {"lip_raise_mid", 0.0, 0.05},
            {"lip_raise_right", 0.0, 0.05},
            {"wrinkle_frequency", 9.0, 45.0},
            {"brow_inner_left", 0.0, 0.12},
            {"brow_inner_right", 0.0, 0.12},
            {"brow_outer_left", 0.0, 0.12},
            {"brow_outer_right", 0.0, 0.12},
            {"lid_lower_left", 0.055, 0.02},
            {"lid_lower_right", 0.055, 0.02},
            {"lid_upper_left", 0.09, 0.035},
            {"lid_upper_right", 0.09, 0.035},
            {"gaze_dx", 0.0, 0.03},
            {"gaze_dy", 0.0, -0.03},
            {"head_scale_y", 1.0, 0.3},
            {"head_roll", 0.0, 0.9},
            {"head_shear", 0.0, 0.5},
            {"neck_dy", 0.0, -0.25},
            {"neck_roll", 0.0, 0.6},
        };
        return g;
    }();
    return geo;
}

nlohmann::json geometry_to_json(const FaceGeometry& geo, const ControlRegistry& registry) {
    nlohmann::json maps = nlohmann::json::object();
    for (std::size_t i = 0; i < registry.size(); ++i) {
        const auto& m = geo.maps.at(i);
        maps[registry[i].abbrev] = {{"param", m.param}, {"base", m.base}, {"gain", m.gain}};
    }
    return {{"version", geo.version}, {"layout", layout_to_json(geo.layout)}, {"maps", maps}};
}

FaceGeometry geometry_from_json(const nlohmann::json& doc, const ControlRegistry& registry) {
    if (!doc.is_object()) throw ParseError("$: expected a geometry object");
    FaceGeometry geo;
    if (!doc.contains("version") || !doc["version"].is_string()) throw ParseError("$.version: expected a string");
    geo.version = doc["version"].get<std::string>();
    if (!doc.contains("layout")) throw ParseError("$.layout: missing");
    geo.layout = layout_from_json(doc["layout"]);
    if (!doc.contains("maps") || !doc["maps"].is_object()) throw ParseError("$.maps: expected an object");
    const auto& maps = doc["maps"];
    if (maps.size() != registry.size()) throw ParseError("$.maps: expected one entry per control channel");
    for (std::size_t i = 0; i < registry.size(); ++i) {
        const auto& ch = registry[i];
        const auto path = "$.maps." + ch.abbrev;
        if (!maps.contains(ch.abbrev)) throw ParseError(path + ": missing");
        const auto& m = maps[ch.abbrev];
        const auto* spec = spec_for(ch.abbrev);
        if (!spec) throw ParseError(path + ": channel has no shape parameter");
        ChannelMap cm;
        try {
            cm.param = m.at("param").get<std::string>();
            cm.base = m.at("base").get<double>();
            cm.gain = m.at("gain").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ": " + e.what());
        }
        if (cm.param != spec->param) throw ParseError(path + ".param: expected '" + std::string(spec->param) + "'");
        if (!std::isfinite(cm.base) || !std::isfinite(cm.gain) || cm.gain == 0.0) {
            throw ParseError(path + ": map must be finite with a non-zero gain");
        }
        if (spec->positive) {
            for (double v : {ch.range_min, ch.range_max}) {
                if (!(cm.base + cm.gain * (v - ch.neutral) > 0.0)) {
                    throw ParseError(path + ": parameter must stay positive over the channel range");
                }
            }
        }
        geo.maps.push_back(std::move(cm));
    }
    return geo;
}

FaceGeometry load_geometry(const std::filesystem::path& path, const ControlRegistry& registry) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open geometry file " + path.string());
    try {
        return geometry_from_json(nlohmann::json::parse(in), registry);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

FaceParams face_params(const ControlVector& v, const FaceGeometry& geo, const ControlRegistry& registry) {
    if (geo.maps.size() != registry.size()) throw StructuralError("geometry does not match the registry");
    FaceParams p;
    for (std::size_t i = 0; i < registry.size(); ++i) {
        const auto* spec = spec_for(registry[i].abbrev);
        if (!spec) throw StructuralError("no shape parameter for channel " + registry[i].abbrev);
        const auto& m = geo.maps[i];
        const double value = m.base + m.gain * (v[i] - registry[i].neutral);
        if (spec->scalar) {
            p.*(spec->scalar) = value;
        } else {
            (p.*(spec->pair))[spec->side] = value;
        }
    }
    return p;
}

std::array<Point2, 2> pupil_centers(const FaceParams& params, const FaceLayout& layout) {
    return {Point2{layout.eye_x + params.gaze_dx, layout.eye_y + params.gaze_dy},
            Point2{-layout.eye_x + params.gaze_dx, layout.eye_y + params.gaze_dy}};
}

// ---------------------------------------------------------------------------
// Rasterizer

namespace {

// (x, y) -> (a x + b y + c, d x + e y + f)
struct Affine {
    double a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;

    Point2 apply(Point2 p) const { return {a * p.x + b * p.y + c, d * p.x + e * p.y + f}; }

    // this ∘ inner
    Affine after(const Affine& in) const {
        return {a * in.a + b * in.d, a * in.b + b * in.e, a * in.c + b * in.f + c,
                d * in.a + e * in.d, d * in.b + e * in.e, d * in.c + e * in.f + f};
    }

    Affine inverse() const {
        const double det = a * e - b * d;
        return {e / det, -b / det, (b * f - e * c) / det, -d / det, a / det, (d * c - a * f) / det};
    }

    static Affine translate(double tx, double ty) { return {1, 0, tx, 0, 1, ty}; }
    static Affine rotate(double theta) {
        const double cs = std::cos(theta), sn = std::sin(theta);
        return {cs, -sn, 0, sn, cs, 0};
    }
};

struct Box {
    double x0, y0, x1, y1;
};

class Raster {
public:
    Raster(Frame& frame, const Affine& face_to_canvas, double scale_px)
        : frame_(frame), forward_(face_to_canvas), inverse_(face_to_canvas.inverse()), scale_px_(scale_px) {}

    // Calls shade(face_point) for every pixel whose center may fall inside
    // `box` (face units); a non-negative return value is written.
    template <typename Shade>
    void paint(const Box& box, Shade&& shade) {
        const double half_w = 0.5 * frame_.width, half_h = 0.5 * frame_.height;
        double px0 = std::numeric_limits<double>::infinity(), py0 = px0;
        double px1 = -px0, py1 = -px0;
        for (Point2 corner : {Point2{box.x0, box.y0}, Point2{box.x1, box.y0}, Point2{box.x0, box.y1},
                              Point2{box.x1, box.y1}}) {
            const Point2 q = forward_.apply(corner);
            const double X = half_w + scale_px_ * q.x, Y = half_h + scale_px_ * q.y;
            px0 = std::min(px0, X), px1 = std::max(px1, X);
            py0 = std::min(py0, Y), py1 = std::max(py1, Y);
        }
        const int xs = std::max(0, static_cast<int>(std::floor(px0)) - 1);
        const int xe = std::min(frame_.width - 1, static_cast<int>(std::ceil(px1)) + 1);
        const int ys = std::max(0, static_cast<int>(std::floor(py0)) - 1);
        const int ye = std::min(frame_.height - 1, static_cast<int>(std::ceil(py1)) + 1);
        for (int py = ys; py <= ye; ++py) {
            const double Y = (py + 0.5 - half_h) / scale_px_;
            std::uint8_t* row = frame_.pixels.data() + static_cast<std::size_t>(py) * frame_.width;
            for (int px = xs; px <= xe; ++px) {
                const double X = (px + 0.5 - half_w) / scale_px_;
                const int level = shade(inverse_.apply({X, Y}));
                if (level >= 0) row[px] = static_cast<std::uint8_t>(level);
            }
        }
    }

private:
    Frame& frame_;
    Affine forward_;
    Affine inverse_;
    double scale_px_;
};

constexpr std::array<Side, 2> kSides{kLeft, kRight};

// Image-space x sign of a side: the subject's left is drawn at x > 0.
double side_sign(Side s) { return s == kLeft ? 1.0 : -1.0; }

struct LipProfile {
    bool inside = false;
    double line = 0, inner = 0, outer = 0;
};

// Half-mouth profile on the side of x. Weights are cubic in the normalized
// distance q from the mouth center: corner blend w, center blend m = 1 - w,
// and a lobe peaking at q = 1/3 for the left/right raise and depress channels.
LipProfile lip_profile(const FaceParams& p, const FaceLayout& l, double x, bool lower) {
    const Side side = x >= 0.0 ? kLeft : kRight;
    const double q = std::abs(x) / p.corner_stretch[side];
    LipProfile out;
    if (q > 1.0) return out;
    out.inside = true;
    const double w = q * q * (3.0 - 2.0 * q);
    const double m = 1.0 - w;
    const double lobe = 6.75 * q * (1.0 - q) * (1.0 - q);
    const double taper = 1.0 - q * q;
    out.line = l.mouth_y - p.corner_raise[side] * w;
    if (lower) {
        out.inner = out.line + (p.jaw_open + p.lip_depress_mid) * m + p.lip_depress[side] * lobe;
        out.outer = out.inner + p.lower_lip_thickness * taper;
    } else {
        out.inner = out.line - (p.lip_raise_mid * m + p.lip_raise[side] * lobe);
        out.outer = out.inner - p.upper_lip_thickness * taper;
    }
    return out;
}

void draw_face(Frame& frame, const FaceParams& p, const FaceLayout& l) {
    // Head: pitch scales vertically, yaw shears horizontally, roll rotates.
    const Affine head = Affine::rotate(p.head_roll)
                            .after(Affine{1, p.head_shear, 0, 0, 1, 0})
                            .after(Affine{1, 0, 0, 0, p.head_scale_y, 0});
    // Neck: roll about a pivot below the chin, pitch translates vertically.
    const Affine neck = Affine::translate(0, p.neck_dy)
                            .after(Affine::translate(0, l.neck_pivot_y))
                            .after(Affine::rotate(p.neck_roll))
                            .after(Affine::translate(0, -l.neck_pivot_y));
    const double scale_px = l.canvas_scale * std::min(frame.width, frame.height);
    Raster r(frame, neck.after(head), scale_px);

    const auto in_ellipse = [](Point2 q, double cx, double cy, double ax, double ay) {
        const double u = (q.x - cx) / ax, v = (q.y - cy) / ay;
        return u * u + v * v <= 1.0;
    };

    r.paint({-l.face_half_width, -l.face_half_height, l.face_half_width, l.face_half_height}, [&](Point2 q) {
        return in_ellipse(q, 0.0, 0.0, l.face_half_width, l.face_half_height) ? l.skin : -1;
    });

    const double chin_y = l.chin_center_y + l.chin_drop_gain * p.jaw_open;
    r.paint({p.jaw_shift - l.chin_half_width, chin_y - l.chin_half_height, p.jaw_shift + l.chin_half_width,
             chin_y + l.chin_half_height},
            [&](Point2 q) {
                return in_ellipse(q, p.jaw_shift, chin_y, l.chin_half_width, l.chin_half_height) ? l.chin : -1;
            });

    // Nose: wrinkle hatching on the bridge, density set by Nose Wrinkle.
    r.paint({-l.nose_band_half_width, l.nose_band_top, l.nose_band_half_width, l.nose_band_bottom}, [&](Point2 q) {
        if (std::abs(q.x) > l.nose_band_half_width || q.y < l.nose_band_top || q.y > l.nose_band_bottom) return -1;
        const double phase = (q.y - l.nose_band_top) * p.wrinkle_frequency;
        return phase - std::floor(phase) < l.hatch_duty ? l.hatch : -1;
    });
    r.paint({-l.nose_tip_half_width, l.nose_tip_y - l.nose_tip_half_height, l.nose_tip_half_width,
             l.nose_tip_y + l.nose_tip_half_height},
            [&](Point2 q) {
                return in_ellipse(q, 0.0, l.nose_tip_y, l.nose_tip_half_width, l.nose_tip_half_height) ? l.nose : -1;
            });

    for (Side s : kSides) {
        const double sg = side_sign(s);
        const Point2 a{sg * l.brow_inner_x, l.brow_y - p.brow_inner[s]};
        const Point2 b{sg * l.brow_outer_x, l.brow_y + l.brow_outer_dy - p.brow_outer[s]};
        const double th = l.brow_half_thickness;
        r.paint({std::min(a.x, b.x) - th, std::min(a.y, b.y) - th, std::max(a.x, b.x) + th, std::max(a.y, b.y) + th},
                [&](Point2 q) {
                    const double ex = b.x - a.x, ey = b.y - a.y;
                    const double dx = q.x - a.x, dy = q.y - a.y;
                    const double t = std::clamp((dx * ex + dy * ey) / (ex * ex + ey * ey), 0.0, 1.0);
                    const double rx = dx - t * ex, ry = dy - t * ey;
                    return rx * rx + ry * ry <= th * th ? l.brow : -1;
                });
    }

    const auto pupils = pupil_centers(p, l);
    for (Side s : kSides) {
        const double cx = side_sign(s) * l.eye_x;
        const double up = p.lid_upper[s], low = p.lid_lower[s];
        const Point2 pc = pupils[s];
        r.paint({cx - l.eye_half_width, l.eye_y - up, cx + l.eye_half_width, l.eye_y + low}, [&](Point2 q) {
            const double u = (q.x - cx) / l.eye_half_width;
            if (std::abs(u) > 1.0) return -1;
            const double open = 1.0 - u * u;
            if (q.y < l.eye_y - up * open || q.y > l.eye_y + low * open) return -1;
            const double dx = q.x - pc.x, dy = q.y - pc.y;
            return dx * dx + dy * dy <= l.pupil_radius * l.pupil_radius ? l.pupil : l.sclera;
        });
    }

    const double reach = std::max(p.corner_stretch[kLeft], p.corner_stretch[kRight]) + std::abs(p.jaw_shift);
    r.paint({-reach, l.mouth_y - 0.3, reach, l.mouth_y + 0.45}, [&](Point2 q) {
        const LipProfile upper = lip_profile(p, l, q.x, false);
        const LipProfile lower = lip_profile(p, l, q.x - p.jaw_shift, true);
        const bool open = upper.inside && lower.inside && q.y > upper.inner && q.y < lower.inner;
        if (open) return l.mouth;
        if (upper.inside && std::abs(q.y - upper.line) <= l.lip_line_half_thickness) return l.lip_line;
        if (lower.inside && q.y >= lower.inner && q.y <= lower.outer) return l.lip;
        if (upper.inside && q.y >= upper.outer && q.y <= upper.inner) return l.lip;
        return -1;
    });
}

}  // namespace

Frame render(const ControlVector& v, const FaceGeometry& geo, int resolution, const ControlRegistry& registry) {
    if (resolution < 8) throw ParameterError("render resolution must be at least 8 pixels");
    if (!is_legal(v, registry)) throw ContractError("render requires a registry-legal control vector");
    Frame frame(resolution, resolution, static_cast<std::uint8_t>(geo.layout.background));
    draw_face(frame, face_params(v, geo, registry), geo.layout);
    return frame;
}

std::vector<Frame> render_batch(const SampledSequence& seq, const FaceGeometry& geo, int resolution,
                                std::size_t threads, const ControlRegistry& registry) {
    std::vector<Frame> frames(seq.samples.size());
    parallel_for(frames.size(), threads, [&](std::size_t i) {
        frames[i] = render(seq.samples[i].vector, geo, resolution, registry);
        frames[i].source_timestamp = seq.samples[i].timestamp;
    });
    return frames;
}

}  // namespace facectl
