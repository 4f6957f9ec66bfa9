#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace probeforge::preprocess {

enum class PixelMode { U8, F32 };

/// Interleaved RGB image, either 8-bit or float in [0, 1].
class ImageBuffer {
public:
    static constexpr int kChannels = 3;

    ImageBuffer() = default;
    /// Throws ErrorCode::Input unless pixels.size() == width * height * 3
    /// and both dimensions are positive.
    static ImageBuffer from_u8(int width, int height, std::vector<std::uint8_t> pixels);
    static ImageBuffer from_f32(int width, int height, std::vector<float> pixels);
    static ImageBuffer filled_u8(int width, int height, std::uint8_t value);
    static ImageBuffer filled_f32(int width, int height, float value);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    PixelMode mode() const noexcept { return std::holds_alternative<std::vector<std::uint8_t>>(pixels_) ? PixelMode::U8 : PixelMode::F32; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(width_) * height_ * kChannels; }

    /// Throw ErrorCode::Input when the image is in the other mode.
    std::span<const std::uint8_t> u8() const;
    std::span<std::uint8_t> u8();
    std::span<const float> f32() const;
    std::span<float> f32();

    /// Value at (x, y, c) as float in [0, 1] regardless of mode.
    float at(int x, int y, int c) const noexcept;

    ImageBuffer to_f32() const;
    /// Rounds to nearest and clamps to [0, 255].
    ImageBuffer to_u8() const;

    bool operator==(const ImageBuffer&) const = default;

private:
    ImageBuffer(int w, int h, std::variant<std::vector<std::uint8_t>, std::vector<float>> px)
        : width_(w), height_(h), pixels_(std::move(px)) {}

    int width_ = 0;
    int height_ = 0;
    std::variant<std::vector<std::uint8_t>, std::vector<float>> pixels_;
};

/// Peak signal-to-noise ratio over 8-bit images of equal shape, in dB.
/// Identical images give +infinity.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

} // namespace probeforge::preprocess
