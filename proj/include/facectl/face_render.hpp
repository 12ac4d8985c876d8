#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facectl/animation.hpp"
#include "facectl/control_space.hpp"

namespace facectl {

inline constexpr int kDefaultResolution = 512;

// 8-bit grayscale image, row-major.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
    double source_timestamp = 0.0;

    Frame() = default;
    Frame(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    // Pixel content only; the timestamp is provenance.
    bool same_pixels(const Frame& o) const {
        return width == o.width && height == o.height && pixels == o.pixels;
    }
};

Frame mirror_horizontal(const Frame& frame);
std::uint64_t frame_checksum(const Frame& frame);

// Control value -> shape parameter: param = base + gain * (value - neutral).
// Measuring from the channel's neutral makes every parameter equal its base
// at the rest pose, so the rest-pose face is mirror symmetric even though the
// neutral control values of paired channels differ.
struct ChannelMap {
    std::string param;
    double base = 0.0;
    double gain = 0.0;
};

// Fixed shape constants, in face units (the face is about two units tall,
// y pointing down, origin at the face center) plus fill intensities.
struct FaceLayout {
    double canvas_scale = 0.40;  // face units -> fraction of canvas size
    double face_half_width = 0.78;
    double face_half_height = 0.98;
    double chin_center_y = 0.74;
    double chin_half_width = 0.36;
    double chin_half_height = 0.22;
    double chin_drop_gain = 0.8;
    double brow_y = -0.46;
    double brow_inner_x = 0.12;
    double brow_outer_x = 0.46;
    double brow_outer_dy = 0.03;
    double brow_half_thickness = 0.028;
    double eye_x = 0.29;
    double eye_y = -0.20;
    double eye_half_width = 0.15;
    double pupil_radius = 0.05;
    double nose_band_half_width = 0.07;
    double nose_band_top = -0.16;
    double nose_band_bottom = 0.06;
    double hatch_duty = 0.3;
    double nose_tip_y = 0.17;
    double nose_tip_half_width = 0.11;
    double nose_tip_half_height = 0.055;
    double mouth_y = 0.50;
    double lip_line_half_thickness = 0.008;
    double neck_pivot_y = 1.4;

    int background = 30;
    int skin = 200;
    int chin = 184;
    int hatch = 150;
    int nose = 165;
    int brow = 55;
    int sclera = 245;
    int pupil = 20;
    int lip = 115;
    int mouth = 35;
    int lip_line = 60;
};

// Parametric schematic face: one affine map per control channel (registry
// order) plus the fixed layout. Versioned so datasets record which geometry
// produced their images.
struct FaceGeometry {
    std::string version;
    FaceLayout layout;
    std::vector<ChannelMap> maps;
};

// The built-in geometry, identical to config/face_geometry.json.
const FaceGeometry& default_geometry();

nlohmann::json geometry_to_json(const FaceGeometry& geo, const ControlRegistry& registry = registry_default());
// Throws ParseError on missing channels, unknown parameters, zero gains, or
// maps that drive a size parameter non-positive anywhere in range.
FaceGeometry geometry_from_json(const nlohmann::json& doc, const ControlRegistry& registry = registry_default());
FaceGeometry load_geometry(const std::filesystem::path& path, const ControlRegistry& registry = registry_default());

enum Side : std::size_t { kLeft = 0, kRight = 1 };

// Shape parameters evaluated from a control vector. "Left" is the subject's
// left, drawn on the image's right half (x > 0).
struct FaceParams {
    double jaw_open = 0, jaw_shift = 0;
    double lower_lip_thickness = 0, upper_lip_thickness = 0;
    double lip_depress_mid = 0, lip_raise_mid = 0;
    std::array<double, 2> lip_depress{}, lip_raise{}, corner_raise{}, corner_stretch{};
    double wrinkle_frequency = 0;
    std::array<double, 2> brow_inner{}, brow_outer{}, lid_lower{}, lid_upper{};
    double gaze_dx = 0, gaze_dy = 0;
    double head_scale_y = 1, head_roll = 0, head_shear = 0;
    double neck_dy = 0, neck_roll = 0;
};

FaceParams face_params(const ControlVector& v, const FaceGeometry& geo,
                       const ControlRegistry& registry = registry_default());

struct Point2 {
    double x = 0, y = 0;
};

// Pupil centers in face coordinates; both eyes receive the same gaze offset.
std::array<Point2, 2> pupil_centers(const FaceParams& params, const FaceLayout& layout);

// Rasterizes a registry-legal control vector into a square frame. Throws
// ContractError for vectors outside the registry ranges.
Frame render(const ControlVector& v, const FaceGeometry& geo = default_geometry(),
             int resolution = kDefaultResolution, const ControlRegistry& registry = registry_default());

// One frame per sample, in sample order, stamped with the sample timestamp.
std::vector<Frame> render_batch(const SampledSequence& seq, const FaceGeometry& geo = default_geometry(),
                                int resolution = kDefaultResolution, std::size_t threads = 1,
                                const ControlRegistry& registry = registry_default());

}  // namespace facectl
