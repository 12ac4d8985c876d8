#pragma once

#include <filesystem>

#include "facectl/face_render.hpp"

namespace facectl {

// 8-bit grayscale PNG. Output carries no time chunk, so identical frames
// produce identical files.
void write_png(const std::filesystem::path& path, const Frame& frame);

// Throws IoError when the file is missing or not decodable.
Frame read_png(const std::filesystem::path& path);

}  // namespace facectl
