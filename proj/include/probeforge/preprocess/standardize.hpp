#pragma once

#include "probeforge/preprocess/image.hpp"
#include "probeforge/store/archive.hpp"

#include <vector>

namespace probeforge::preprocess {

/// Backbone input: size x size x 3 floats, row-major HWC.
struct InputTensor {
    int size = 0;
    std::vector<float> data;

    float at(int x, int y, int c) const noexcept {
        return data[(static_cast<std::size_t>(y) * size + x) * 3 + c];
    }
};

/// Separable convolution resampling (antialiased when shrinking) to an
/// exact output size. Works in float; the input is converted if needed.
ImageBuffer resize(const ImageBuffer& image, int out_width, int out_height, store::Interpolation interpolation);

/// Shorter side resized to rec.input_size, center square crop, then
/// per-channel (x - mean) / std. Deterministic for identical inputs.
InputTensor standardize(const ImageBuffer& image, const store::PreprocessRecord& rec);

} // namespace probeforge::preprocess
