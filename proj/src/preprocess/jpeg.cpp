#include "probeforge/preprocess/jpeg.hpp"

#include "probeforge/core/error.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <jpeglib.h>

namespace probeforge::preprocess {

namespace {

struct ErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void on_error(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<ErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

void on_message(j_common_ptr) {}

// The libjpeg calls below run between setjmp and a possible longjmp, so
// these helpers only touch trivially destructible state.
bool encode_raw(const std::uint8_t* pixels, int width, int height, int quality, unsigned char** out,
                unsigned long* out_size, char* message) {
    jpeg_compress_struct cinfo{};
    ErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = on_error;
    err.base.output_message = on_message;
    if (setjmp(err.jump)) {
        std::snprintf(message, JMSG_LENGTH_MAX, "%s", err.message);
        jpeg_destroy_compress(&cinfo);
        return false;
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, out, out_size);
    cinfo.image_width = static_cast<JDIMENSION>(width);
    cinfo.image_height = static_cast<JDIMENSION>(height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    cinfo.dct_method = JDCT_ISLOW;
    cinfo.optimize_coding = FALSE;
    // 4:2:0: luma 2x2, chroma 1x1.
    cinfo.comp_info[0].h_samp_factor = 2;
    cinfo.comp_info[0].v_samp_factor = 2;
    cinfo.comp_info[1].h_samp_factor = 1;
    cinfo.comp_info[1].v_samp_factor = 1;
    cinfo.comp_info[2].h_samp_factor = 1;
    cinfo.comp_info[2].v_samp_factor = 1;
    jpeg_start_compress(&cinfo, TRUE);
    const std::size_t stride = static_cast<std::size_t>(width) * 3;
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(pixels + cinfo.next_scanline * stride);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    return true;
}

bool decode_raw(const std::uint8_t* data, std::size_t size, std::uint8_t* (*alloc)(void*, int, int), void* ctx,
                char* message) {
    jpeg_decompress_struct cinfo{};
    ErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = on_error;
    err.base.output_message = on_message;
    if (setjmp(err.jump)) {
        std::snprintf(message, JMSG_LENGTH_MAX, "%s", err.message);
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    cinfo.dct_method = JDCT_ISLOW;
    jpeg_start_decompress(&cinfo);
    std::uint8_t* pixels = alloc(ctx, static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
    const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * 3;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

struct DecodeTarget {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

std::uint8_t* allocate_target(void* ctx, int width, int height) {
    auto* target = static_cast<DecodeTarget*>(ctx);
    target->width = width;
    target->height = height;
    target->pixels.assign(static_cast<std::size_t>(width) * height * 3, 0);
    return target->pixels.data();
}

} // namespace

Bytes encode_jpeg(const ImageBuffer& image, int quality) {
    if (quality < 1 || quality > 100) {
        fail(ErrorCode::Parameter, "jpeg quality " + std::to_string(quality) + " outside [1, 100]");
    }
    if (image.mode() != PixelMode::U8) {
        fail(ErrorCode::Parameter, "jpeg perturbation needs an 8-bit image");
    }
    unsigned char* buffer = nullptr;
    unsigned long size = 0;
    char message[JMSG_LENGTH_MAX] = {};
    const bool ok = encode_raw(image.u8().data(), image.width(), image.height(), quality, &buffer, &size, message);
    Bytes out;
    if (ok && buffer) {
        out.assign(buffer, buffer + size);
    }
    std::free(buffer);
    if (!ok) {
        fail(ErrorCode::Format, std::string("jpeg encode failed: ") + message);
    }
    return out;
}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> data) {
    if (data.empty()) {
        fail(ErrorCode::Format, "empty jpeg stream");
    }
    DecodeTarget target;
    char message[JMSG_LENGTH_MAX] = {};
    if (!decode_raw(data.data(), data.size(), allocate_target, &target, message)) {
        fail(ErrorCode::Format, std::string("jpeg decode failed: ") + message);
    }
    return ImageBuffer::from_u8(target.width, target.height, std::move(target.pixels));
}

ImageBuffer apply_jpeg(const ImageBuffer& image, int quality) {
    const Bytes encoded = encode_jpeg(image, quality);
    return decode_jpeg(encoded);
}

} // namespace probeforge::preprocess
