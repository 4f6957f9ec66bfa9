#pragma once

#include "probeforge/preprocess/image.hpp"

#include <vector>

namespace probeforge::preprocess {

/// Truncation radius of the Gaussian kernel: ceil(3 sigma).
int blur_radius(double sigma);

/// Normalized 1-D Gaussian taps k(i) ~ exp(-i^2 / (2 sigma^2)) for
/// i in [-r, r]. Throws ErrorCode::Parameter for sigma <= 0.
std::vector<double> gaussian_kernel(double sigma);

/// Index into [0, n) for an out-of-range coordinate using mirror
/// reflection without repeating the edge sample (dcb|abcd|cba).
int reflect_index(int i, int n) noexcept;

/// Separable Gaussian blur with reflected borders, per channel. 8-bit
/// input is rounded back to 8-bit; float input stays float.
ImageBuffer apply_blur(const ImageBuffer& image, double sigma);

} // namespace probeforge::preprocess
