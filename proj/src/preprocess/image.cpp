#include "probeforge/preprocess/image.hpp"

#include "probeforge/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace probeforge::preprocess {

namespace {

void check_shape(int width, int height, std::size_t length) {
    if (width <= 0 || height <= 0) {
        fail(ErrorCode::Input, "image dimensions must be positive, got " + std::to_string(width) + "x" +
                                   std::to_string(height));
    }
    if (length != static_cast<std::size_t>(width) * height * ImageBuffer::kChannels) {
        fail(ErrorCode::Input, "pixel array length " + std::to_string(length) + " != width*height*3");
    }
}

} // namespace

ImageBuffer ImageBuffer::from_u8(int width, int height, std::vector<std::uint8_t> pixels) {
    check_shape(width, height, pixels.size());
    return ImageBuffer(width, height, std::move(pixels));
}

ImageBuffer ImageBuffer::from_f32(int width, int height, std::vector<float> pixels) {
    check_shape(width, height, pixels.size());
    return ImageBuffer(width, height, std::move(pixels));
}

ImageBuffer ImageBuffer::filled_u8(int width, int height, std::uint8_t value) {
    const auto n = static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) * kChannels;
    return from_u8(width, height, std::vector<std::uint8_t>(n, value));
}

ImageBuffer ImageBuffer::filled_f32(int width, int height, float value) {
    const auto n = static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) * kChannels;
    return from_f32(width, height, std::vector<float>(n, value));
}

std::span<const std::uint8_t> ImageBuffer::u8() const {
    const auto* p = std::get_if<std::vector<std::uint8_t>>(&pixels_);
    if (!p) {
        fail(ErrorCode::Input, "image is not in 8-bit mode");
    }
    return *p;
}

std::span<std::uint8_t> ImageBuffer::u8() {
    auto* p = std::get_if<std::vector<std::uint8_t>>(&pixels_);
    if (!p) {
        fail(ErrorCode::Input, "image is not in 8-bit mode");
    }
    return *p;
}

std::span<const float> ImageBuffer::f32() const {
    const auto* p = std::get_if<std::vector<float>>(&pixels_);
    if (!p) {
        fail(ErrorCode::Input, "image is not in float mode");
    }
    return *p;
}

std::span<float> ImageBuffer::f32() {
    auto* p = std::get_if<std::vector<float>>(&pixels_);
    if (!p) {
        fail(ErrorCode::Input, "image is not in float mode");
    }
    return *p;
}

float ImageBuffer::at(int x, int y, int c) const noexcept {
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
    if (const auto* p = std::get_if<std::vector<std::uint8_t>>(&pixels_)) {
        return static_cast<float>((*p)[i]) / 255.0f;
    }
    return std::get<std::vector<float>>(pixels_)[i];
}

ImageBuffer ImageBuffer::to_f32() const {
    if (mode() == PixelMode::F32) {
        return *this;
    }
    const auto src = u8();
    std::vector<float> out(src.size());
    std::transform(src.begin(), src.end(), out.begin(), [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
    return from_f32(width_, height_, std::move(out));
}

ImageBuffer ImageBuffer::to_u8() const {
    if (mode() == PixelMode::U8) {
        return *this;
    }
    const auto src = f32();
    std::vector<std::uint8_t> out(src.size());
    std::transform(src.begin(), src.end(), out.begin(), [](float v) {
        const double scaled = std::nearbyint(static_cast<double>(v) * 255.0);
        return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
    });
    return from_u8(width_, height_, std::move(out));
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        fail(ErrorCode::Dimension, "psnr needs images of equal shape");
    }
    const auto pa = a.u8();
    const auto pb = b.u8();
    double sse = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = static_cast<double>(pa[i]) - pb[i];
        sse += d * d;
    }
    if (sse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double mse = sse / static_cast<double>(pa.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

} // namespace probeforge::preprocess
