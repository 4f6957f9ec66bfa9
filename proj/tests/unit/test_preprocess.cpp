#include "probeforge/core/codec.hpp"
#include "probeforge/preprocess/blur.hpp"
#include "probeforge/preprocess/corpus.hpp"
#include "probeforge/preprocess/image_io.hpp"
#include "probeforge/preprocess/jpeg.hpp"
#include "probeforge/preprocess/standardize.hpp"

#include "image_support.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace probeforge;
using namespace probeforge::preprocess;
using pftest::error_of;

TEST_CASE("image buffer construction and conversion") {
    CHECK(error_of([] { ImageBuffer::from_u8(2, 2, std::vector<std::uint8_t>(11)); }) == ErrorCode::Input);
    CHECK(error_of([] { ImageBuffer::from_f32(0, 2, {}); }) == ErrorCode::Input);
    const auto img = ImageBuffer::from_f32(1, 1, {0.0F, 0.5F, 1.2F});
    CHECK(error_of([&] { img.u8(); }) == ErrorCode::Input);
    const auto u = img.to_u8();
    CHECK(u.u8()[0] == 0);
    CHECK(u.u8()[1] == 128);
    CHECK(u.u8()[2] == 255);
    CHECK(u.at(0, 0, 2) == 1.0F);
    std::mt19937_64 rng(3);
    const auto r = pftest::random_u8_image(rng, 5, 4);
    CHECK(r.to_f32().to_u8() == r);
}

TEST_CASE("psnr") {
    auto a = ImageBuffer::filled_u8(4, 4, 100);
    CHECK(std::isinf(psnr(a, a)));
    auto b = a;
    b.u8()[0] = 110;
    const double mse = 100.0 / 48.0;
    CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(255.0 * 255.0 / mse)).epsilon(1e-12));
    CHECK(error_of([&] { psnr(a, ImageBuffer::filled_u8(4, 3, 0)); }) == ErrorCode::Dimension);
}

TEST_CASE("gaussian kernel") {
    CHECK(blur_radius(0.5) == 2);
    CHECK(gaussian_kernel(0.5).size() == 5);
    CHECK(blur_radius(1.5) == 5);
    for (double s = 0.05; s <= 8.0; s += 0.05) {
        const auto k = gaussian_kernel(s);
        CHECK(std::abs(std::accumulate(k.begin(), k.end(), 0.0) - 1.0) <= 1e-9);
        for (std::size_t i = 0; i < k.size() / 2; ++i) {
            CHECK(k[i] == k[k.size() - 1 - i]);
            CHECK(k[i] < k[i + 1]);
        }
    }
    CHECK(error_of([] { gaussian_kernel(0.0); }) == ErrorCode::Parameter);
    CHECK(error_of([] { gaussian_kernel(-1.0); }) == ErrorCode::Parameter);
    CHECK(error_of([] { apply_blur(ImageBuffer::filled_u8(2, 2, 0), std::nan("")); }) == ErrorCode::Parameter);
}

TEST_CASE("reflect index mirrors without repeating the edge") {
    CHECK(reflect_index(-1, 5) == 1);
    CHECK(reflect_index(-2, 5) == 2);
    CHECK(reflect_index(5, 5) == 3);
    CHECK(reflect_index(6, 5) == 2);
    CHECK(reflect_index(3, 5) == 3);
    CHECK(reflect_index(-7, 1) == 0);
    CHECK(reflect_index(-3, 2) == 1);
    for (int i = -40; i < 40; ++i) {
        const int j = reflect_index(i, 3);
        CHECK(j >= 0);
        CHECK(j < 3);
    }
}

TEST_CASE("separable blur equals dense convolution") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> side(1, 40);
    for (double sigma : {0.5, 1.0, 1.5, 2.0}) {
        for (int trial = 0; trial < 4; ++trial) {
            const auto img = pftest::random_f32_image(rng, side(rng), side(rng));
            const auto out = apply_blur(img, sigma);
            double worst = 0.0;
            for (int y = 0; y < img.height(); ++y) {
                for (int x = 0; x < img.width(); ++x) {
                    for (int c = 0; c < 3; ++c) {
                        worst = std::max(worst, std::abs(out.at(x, y, c) - pftest::dense_blur_at(img, sigma, x, y, c)));
                    }
                }
            }
            CHECK(worst <= 1e-5);
        }
    }
}

TEST_CASE("blur of a constant image is exact") {
    for (double sigma : {0.3, 0.5, 1.0, 2.0, 7.5}) {
        const auto u = ImageBuffer::filled_u8(9, 13, 77);
        CHECK(apply_blur(u, sigma) == u);
        const auto f = ImageBuffer::filled_f32(9, 13, 0.3F);
        CHECK(apply_blur(f, sigma) == f);
    }
}

TEST_CASE("jpeg quality properties") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const auto img = pftest::random_jpeg_image(rng, 64, 64);
        const auto q95 = apply_jpeg(img, 95);
        CHECK(q95.width() == 64);
        CHECK(q95.height() == 64);
        CHECK(psnr(img, q95) >= 40.0);
        std::size_t previous = SIZE_MAX;
        for (int q : {95, 85, 75, 65}) {
            const std::size_t size = encode_jpeg(img, q).size();
            CHECK(size <= previous);
            previous = size;
        }
        const double once = psnr(img, apply_jpeg(img, 75));
        const double twice = psnr(img, apply_jpeg(apply_jpeg(img, 75), 75));
        CHECK(std::abs(once - twice) < 3.0);
    }
    const auto img = ImageBuffer::filled_u8(8, 8, 10);
    CHECK(error_of([&] { apply_jpeg(img, 101); }) == ErrorCode::Parameter);
    CHECK(error_of([&] { apply_jpeg(img, 0); }) == ErrorCode::Parameter);
    CHECK(error_of([&] { apply_jpeg(ImageBuffer::filled_f32(8, 8, 0.1F), 90); }) == ErrorCode::Parameter);
}

TEST_CASE("jpeg is deterministic and handles odd sizes") {
    std::mt19937_64 rng(8);
    const auto img = pftest::random_jpeg_image(rng, 17, 9);
    CHECK(encode_jpeg(img, 80) == encode_jpeg(img, 80));
    const auto out = apply_jpeg(img, 80);
    CHECK(out.width() == 17);
    CHECK(out.height() == 9);
    const Bytes garbage{0xFF, 0xD8, 0xFF, 0x00, 0x01};
    CHECK(error_of([&] { decode_jpeg(garbage); }) == ErrorCode::Format);
}

TEST_CASE("png roundtrip and sniffing") {
    pftest::TempDir dir;
    std::mt19937_64 rng(2);
    const auto img = pftest::random_u8_image(rng, 13, 7);
    const Bytes png = encode_png(img);
    CHECK(png == encode_png(img));
    CHECK(decode_image(png) == img);
    write_png(dir / "x.png", img);
    CHECK(read_image(dir / "x.png") == img);
    const Bytes jpg = encode_jpeg(img, 90);
    CHECK(decode_image(jpg) == decode_jpeg(jpg));
    const Bytes junk{'n', 'o', 'p', 'e'};
    CHECK(error_of([&] { decode_image(junk); }) == ErrorCode::Format);
    CHECK(error_of([&] { read_image(dir / "missing.png"); }) == ErrorCode::Io);
}

TEST_CASE("resize") {
    std::mt19937_64 rng(4);
    const auto img = pftest::random_f32_image(rng, 12, 10);
    CHECK(resize(img, 12, 10, store::Interpolation::Bicubic) == img);
    CHECK(error_of([&] { resize(img, 0, 3, store::Interpolation::Bicubic); }) == ErrorCode::Parameter);

    const auto grey = ImageBuffer::filled_f32(7, 5, 0.25F);
    for (auto interp : {store::Interpolation::Bicubic, store::Interpolation::Bilinear}) {
        for (const auto& [w, h] : {std::pair{3, 2}, std::pair{19, 11}, std::pair{7, 1}}) {
            const auto out = resize(grey, w, h, interp);
            for (float v : out.f32()) {
                CHECK(v == doctest::Approx(0.25).epsilon(1e-6));
            }
        }
    }

    // Bilinear halving uses the antialiased triangle taps 1/8, 3/8, 3/8, 1/8.
    const auto half = resize(img, 6, 5, store::Interpolation::Bilinear);
    const double taps[4] = {0.125, 0.375, 0.375, 0.125};
    for (int y = 1; y < 4; ++y) {
        for (int x = 1; x < 5; ++x) {
            for (int c = 0; c < 3; ++c) {
                double expect = 0.0;
                for (int j = 0; j < 4; ++j) {
                    for (int i = 0; i < 4; ++i) {
                        expect += taps[j] * taps[i] * img.at(2 * x - 1 + i, 2 * y - 1 + j, c);
                    }
                }
                CHECK(half.at(x, y, c) == doctest::Approx(expect).epsilon(1e-6));
            }
        }
    }

    // Bicubic doubling reproduces a linear ramp away from the borders.
    std::vector<float> ramp(16 * 4 * 3);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 16; ++x) {
            for (int c = 0; c < 3; ++c) {
                ramp[(y * 16 + x) * 3 + c] = static_cast<float>(x) / 16.0F;
            }
        }
    }
    const auto up = resize(ImageBuffer::from_f32(16, 4, ramp), 32, 8, store::Interpolation::Bicubic);
    for (int x = 4; x < 28; ++x) {
        const double source_x = (x + 0.5) / 2.0 - 0.5;
        CHECK(up.at(x, 3, 1) == doctest::Approx(source_x / 16.0).epsilon(1e-6));
    }
}

TEST_CASE("standardize") {
    store::PreprocessRecord rec;
    rec.input_size = 224;
    std::mt19937_64 rng(6);
    const auto wide = pftest::random_f32_image(rng, 448, 224);
    const auto t = standardize(wide, rec);
    REQUIRE(t.size == 224);
    REQUIRE(t.data.size() == 224 * 224 * 3);
    for (int y = 0; y < 224; y += 37) {
        for (int x = 0; x < 224; x += 29) {
            CHECK(t.at(x, y, 1) == doctest::Approx((wide.at(x + 112, y, 1) - 0.5) / 0.5).epsilon(1e-6));
        }
    }

    const auto grey = ImageBuffer::filled_f32(50, 30, 0.5F);
    for (float v : standardize(grey, rec).data) {
        CHECK(std::abs(v) <= 1e-6F);
    }

    rec.input_size = 336;
    const auto photo = pftest::random_u8_image(rng, 640, 480);
    const auto pe = standardize(photo, rec);
    CHECK(pe.size == 336);
    CHECK(pe.data.size() == 336u * 336u * 3u);
    CHECK(standardize(photo, rec).data == pe.data);

    rec.channel_std = {0.5, 0.0, 0.5};
    CHECK(error_of([&] { standardize(photo, rec); }) == ErrorCode::Parameter);
}

TEST_CASE("perturbation chain applies steps in order") {
    std::mt19937_64 rng(12);
    const auto img = pftest::random_jpeg_image(rng, 24, 24);
    const PerturbationSpec jb{{JpegStep{75}, BlurStep{1.0}}};
    const PerturbationSpec bj{{BlurStep{1.0}, JpegStep{75}}};
    CHECK(apply_perturbations(img, jb) == apply_blur(apply_jpeg(img, 75), 1.0));
    CHECK(apply_perturbations(img, bj) == apply_jpeg(apply_blur(img, 1.0), 75));
    CHECK(apply_perturbations(img, PerturbationSpec{}) == img);
    CHECK(apply_perturbations(img.to_f32(), PerturbationSpec{}) == img);
    CHECK(error_of([&] { apply_perturbations(img, PerturbationSpec{{JpegStep{0}}}); }) == ErrorCode::Parameter);
}

TEST_CASE("perturbed corpus is deterministic") {
    pftest::TempDir dir;
    std::mt19937_64 rng(1);
    write_png(dir / "src/real/a.png", pftest::random_jpeg_image(rng, 20, 16));
    write_file_bytes(dir / "src/fake/b.jpg", encode_jpeg(pftest::random_jpeg_image(rng, 16, 20), 90));
    write_text_file(dir / "src/m.csv", "id,relative_path,label,generator,split\n"
                                       "a,real/a.png,real,,test\n"
                                       "b,fake/b.jpg,fake,adm,test\n");
    const auto manifest = store::load_manifest(dir / "src/m.csv");
    const PerturbationSpec spec{{JpegStep{75}}};
    const auto derived = emit_perturbed_corpus(manifest, manifest.root, spec, dir / "o1", 2);
    emit_perturbed_corpus(manifest, manifest.root, spec, dir / "o2", 1);
    REQUIRE(derived.entries.size() == 2);
    CHECK(derived.entries[1].relative_path == "fake/b.png");
    for (const char* f : {"manifest.csv", "perturbation.json", "real/a.png", "fake/b.png"}) {
        CHECK(sha256_file(dir / (std::string("o1/") + f)) == sha256_file(dir / (std::string("o2/") + f)));
    }
    CHECK(read_image(dir / "o1/real/a.png") == apply_jpeg(read_image(dir / "src/real/a.png"), 75));
    const auto reread = store::load_manifest(dir / "o1/manifest.csv");
    CHECK(reread.entries == derived.entries);

    write_text_file(dir / "src/bad.csv", "id,relative_path,label,generator,split\n"
                                         "z,real/zz.png,real,,test\n");
    const auto bad = store::load_manifest(dir / "src/bad.csv");
    CHECK(error_of([&] { emit_perturbed_corpus(bad, bad.root, spec, dir / "o3", 1); }) == ErrorCode::Io);
}
