#pragma once

#include "probeforge/core/codec.hpp"
#include "probeforge/preprocess/image.hpp"

namespace probeforge::preprocess {

/// Baseline JPEG, 4:2:0 chroma subsampling, integer DCT. Requires an 8-bit
/// image and quality in [1, 100] (ErrorCode::Parameter otherwise).
Bytes encode_jpeg(const ImageBuffer& image, int quality);
/// Decodes to 8-bit RGB. Throws ErrorCode::Format on corrupt data.
ImageBuffer decode_jpeg(std::span<const std::uint8_t> data);

/// Encode at `quality`, decode, return the degraded image (same size).
ImageBuffer apply_jpeg(const ImageBuffer& image, int quality);

} // namespace probeforge::preprocess
