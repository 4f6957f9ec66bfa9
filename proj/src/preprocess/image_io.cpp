#include "probeforge/preprocess/image_io.hpp"

#include "probeforge/core/error.hpp"
#include "probeforge/preprocess/jpeg.hpp"

#include <png.h>

#include <cstring>

namespace probeforge::preprocess {

namespace {

bool is_png(std::span<const std::uint8_t> d) {
    static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    return d.size() >= 8 && std::memcmp(d.data(), kSig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> d) { return d.size() >= 3 && d[0] == 0xFF && d[1] == 0xD8 && d[2] == 0xFF; }

ImageBuffer decode_png(std::span<const std::uint8_t> data) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, data.data(), data.size())) {
        fail(ErrorCode::Format, std::string("png decode failed: ") + img.message);
    }
    img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
    png_color black{0, 0, 0};
    if (!png_image_finish_read(&img, &black, pixels.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        fail(ErrorCode::Format, "png decode failed: " + msg);
    }
    return ImageBuffer::from_u8(static_cast<int>(img.width), static_cast<int>(img.height), std::move(pixels));
}

} // namespace

ImageBuffer decode_image(std::span<const std::uint8_t> data) {
    if (is_png(data)) {
        return decode_png(data);
    }
    if (is_jpeg(data)) {
        return decode_jpeg(data);
    }
    fail(ErrorCode::Format, "unsupported image format (expected PNG or JPEG)");
}

ImageBuffer read_image(const std::filesystem::path& path) {
    const Bytes data = read_file_bytes(path);
    try {
        return decode_image(data);
    } catch (const Error& e) {
        fail(e.code(), path.string() + ": " + e.what());
    }
}

Bytes encode_png(const ImageBuffer& image) {
    const ImageBuffer u8 = image.to_u8();
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(u8.width());
    img.height = static_cast<png_uint_32>(u8.height());
    img.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, u8.u8().data(), 0, nullptr)) {
        fail(ErrorCode::Format, std::string("png encode failed: ") + img.message);
    }
    Bytes out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, u8.u8().data(), 0, nullptr)) {
        fail(ErrorCode::Format, std::string("png encode failed: ") + img.message);
    }
    out.resize(size);
    return out;
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
    write_file_bytes(path, encode_png(image));
}

} // namespace probeforge::preprocess
