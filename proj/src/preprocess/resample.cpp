#include "probeforge/preprocess/standardize.hpp"

#include "probeforge/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace probeforge::preprocess {

namespace {

// Keys cubic convolution kernel with a = -0.5.
double cubic(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x < 1.0) {
        return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    }
    if (x < 2.0) {
        return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    }
    return 0.0;
}

double triangle(double x) {
    x = std::abs(x);
    return x < 1.0 ? 1.0 - x : 0.0;
}

struct AxisWeights {
    std::vector<int> first;          // first source index per output
    std::vector<int> taps;           // number of taps per output
    std::vector<std::vector<double>> weights;
};

AxisWeights axis_weights(int in_size, int out_size, store::Interpolation interpolation) {
    const bool bicubic = interpolation == store::Interpolation::Bicubic;
    const double support_base = bicubic ? 2.0 : 1.0;
    const double scale = static_cast<double>(in_size) / out_size;
    const double filter_scale = std::max(scale, 1.0);
    const double support = support_base * filter_scale;

    AxisWeights aw;
    aw.first.resize(out_size);
    aw.taps.resize(out_size);
    aw.weights.resize(out_size);
    for (int i = 0; i < out_size; ++i) {
        const double center = (i + 0.5) * scale;
        const int lo = std::max(0, static_cast<int>(std::floor(center - support + 0.5)));
        const int hi = std::min(in_size, static_cast<int>(std::floor(center + support + 0.5)));
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(std::max(hi - lo, 0)));
        double total = 0.0;
        for (int j = lo; j < hi; ++j) {
            const double arg = (j - center + 0.5) / filter_scale;
            const double v = bicubic ? cubic(arg) : triangle(arg);
            w.push_back(v);
            total += v;
        }
        if (total != 0.0) {
            for (double& v : w) {
                v /= total;
            }
        }
        aw.first[i] = lo;
        aw.taps[i] = hi - lo;
        aw.weights[i] = std::move(w);
    }
    return aw;
}

} // namespace

ImageBuffer resize(const ImageBuffer& image, int out_width, int out_height, store::Interpolation interpolation) {
    if (out_width <= 0 || out_height <= 0) {
        fail(ErrorCode::Parameter, "resize target must be positive");
    }
    const ImageBuffer src = image.to_f32();
    if (out_width == src.width() && out_height == src.height()) {
        return src;
    }
    const int w = src.width();
    const int h = src.height();
    const auto in = src.f32();

    // Horizontal pass into a double buffer, then vertical.
    const AxisWeights hx = axis_weights(w, out_width, interpolation);
    std::vector<double> tmp(static_cast<std::size_t>(out_width) * h * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < out_width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int t = 0; t < hx.taps[x]; ++t) {
                    acc += hx.weights[x][t] * in[(static_cast<std::size_t>(y) * w + hx.first[x] + t) * 3 + c];
                }
                tmp[(static_cast<std::size_t>(y) * out_width + x) * 3 + c] = acc;
            }
        }
    }
    const AxisWeights vy = axis_weights(h, out_height, interpolation);
    std::vector<float> out(static_cast<std::size_t>(out_width) * out_height * 3);
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int t = 0; t < vy.taps[y]; ++t) {
                    acc += vy.weights[y][t] * tmp[(static_cast<std::size_t>(vy.first[y] + t) * out_width + x) * 3 + c];
                }
                out[(static_cast<std::size_t>(y) * out_width + x) * 3 + c] = static_cast<float>(acc);
            }
        }
    }
    return ImageBuffer::from_f32(out_width, out_height, std::move(out));
}

InputTensor standardize(const ImageBuffer& image, const store::PreprocessRecord& rec) {
    rec.validate();
    if (image.width() <= 0 || image.height() <= 0) {
        fail(ErrorCode::Input, "zero-area image");
    }
    const int target = rec.input_size;
    const long long w = image.width();
    const long long h = image.height();
    int new_w = target;
    int new_h = target;
    if (w <= h) {
        new_h = static_cast<int>(std::max<long long>(target, h * target / w));
    } else {
        new_w = static_cast<int>(std::max<long long>(target, w * target / h));
    }
    const ImageBuffer resized = resize(image, new_w, new_h, rec.interpolation);
    const int left = (new_w - target) / 2;
    const int top = (new_h - target) / 2;

    InputTensor tensor;
    tensor.size = target;
    tensor.data.resize(static_cast<std::size_t>(target) * target * 3);
    const auto px = resized.f32();
    for (int y = 0; y < target; ++y) {
        for (int x = 0; x < target; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = px[(static_cast<std::size_t>(y + top) * new_w + (x + left)) * 3 + c];
                tensor.data[(static_cast<std::size_t>(y) * target + x) * 3 + c] =
                    static_cast<float>((v - rec.channel_mean[c]) / rec.channel_std[c]);
            }
        }
    }
    return tensor;
}

} // namespace probeforge::preprocess
