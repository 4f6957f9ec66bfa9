#include "probeforge/preprocess/blur.hpp"

#include "probeforge/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace probeforge::preprocess {

int blur_radius(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        fail(ErrorCode::Parameter, "blur sigma must be positive");
    }
    return static_cast<int>(std::ceil(3.0 * sigma));
}

std::vector<double> gaussian_kernel(double sigma) {
    const int r = blur_radius(sigma);
    std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
    double total = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double v = std::exp(-static_cast<double>(i) * i / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + r)] = v;
        total += v;
    }
    for (double& v : k) {
        v /= total;
    }
    return k;
}

int reflect_index(int i, int n) noexcept {
    if (n == 1) {
        return 0;
    }
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) {
        i += period;
    }
    return i < n ? i : period - i;
}

ImageBuffer apply_blur(const ImageBuffer& image, double sigma) {
    const std::vector<double> k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    const int w = image.width();
    const int h = image.height();
    const std::size_t n = image.size();

    std::vector<double> src(n);
    if (image.mode() == PixelMode::U8) {
        const auto px = image.u8();
        std::copy(px.begin(), px.end(), src.begin());
    } else {
        const auto px = image.f32();
        std::copy(px.begin(), px.end(), src.begin());
    }

    std::vector<double> tmp(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int t = -r; t <= r; ++t) {
                    const int xs = reflect_index(x + t, w);
                    acc += k[static_cast<std::size_t>(t + r)] * src[(static_cast<std::size_t>(y) * w + xs) * 3 + c];
                }
                tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c] = acc;
            }
        }
    }
    std::vector<double> out(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int t = -r; t <= r; ++t) {
                    const int ys = reflect_index(y + t, h);
                    acc += k[static_cast<std::size_t>(t + r)] * tmp[(static_cast<std::size_t>(ys) * w + x) * 3 + c];
                }
                out[(static_cast<std::size_t>(y) * w + x) * 3 + c] = acc;
            }
        }
    }

    if (image.mode() == PixelMode::U8) {
        std::vector<std::uint8_t> px(n);
        std::transform(out.begin(), out.end(), px.begin(), [](double v) {
            return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0));
        });
        return ImageBuffer::from_u8(w, h, std::move(px));
    }
    std::vector<float> px(n);
    std::transform(out.begin(), out.end(), px.begin(), [](double v) { return static_cast<float>(v); });
    return ImageBuffer::from_f32(w, h, std::move(px));
}

} // namespace probeforge::preprocess
