#pragma once

#include "probeforge/core/codec.hpp"
#include "probeforge/preprocess/image.hpp"

#include <filesystem>

namespace probeforge::preprocess {

/// Decodes PNG or JPEG (sniffed from the leading bytes) to 8-bit RGB.
/// Alpha is composited over black; grayscale is expanded to RGB.
ImageBuffer decode_image(std::span<const std::uint8_t> data);
ImageBuffer read_image(const std::filesystem::path& path);

/// Lossless 8-bit RGB PNG; output bytes are deterministic for equal input.
Bytes encode_png(const ImageBuffer& image);
void write_png(const std::filesystem::path& path, const ImageBuffer& image);

} // namespace probeforge::preprocess
