#include "probeforge/video/video.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace probeforge;
using namespace probeforge::video;
using pftest::error_of;

TEST_CASE("frame selection") {
    VideoConfig cfg;
    CHECK(select_frames(5, cfg) == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(select_frames(100, cfg) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7});
    cfg.sampling = Sampling::Uniform;
    cfg.max_frames = 4;
    CHECK(select_frames(100, cfg) == std::vector<std::size_t>{0, 25, 50, 75});
    CHECK(select_frames(3, cfg) == std::vector<std::size_t>{0, 1, 2});
    cfg.max_frames = 3;
    CHECK(select_frames(7, cfg) == std::vector<std::size_t>{0, 2, 4});
    cfg.max_frames = 0;
    CHECK(error_of([&] { cfg.validate(); }) == ErrorCode::Parameter);
    CHECK(parse_sampling("uniform") == Sampling::Uniform);
    CHECK(parse_sampling("contiguous_prefix") == Sampling::ContiguousPrefix);
    CHECK(error_of([] { parse_sampling("random"); }) == ErrorCode::Parameter);
}

TEST_CASE("aggregation examples") {
    const VideoConfig cfg;
    const std::vector<double> one{2.0};
    CHECK(aggregate_video(one, cfg).logit == 2.0);
    const std::vector<double> sym{1.0, -1.0};
    const auto d = aggregate_video(sym, cfg);
    CHECK(d.logit == 0.0);
    CHECK(d.score == 0.5);
    CHECK(d.label == store::Label::Real);
    CHECK(d.n_frames_used == 2);
    const std::vector<double> ten{1, 2, 3, 4, 5, 6, 7, 8, 100, -100};
    CHECK(aggregate_video(ten, cfg).logit == 4.5);
    CHECK(aggregate_video(ten, cfg).n_frames_used == 8);
    CHECK(error_of([&] { aggregate_video({}, cfg); }) == ErrorCode::Input);
    CHECK(aggregate_video(sym, cfg, 0.4).label == store::Label::Fake);
}

TEST_CASE("aggregation properties") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    const VideoConfig cfg;
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 1 + rng() % 20;
        std::vector<double> logits(n);
        for (auto& x : logits) {
            x = u(rng);
        }
        const double c = u(rng);
        const std::vector<double> constant(n, c);
        CHECK(aggregate_video(constant, cfg).logit == c);

        const auto base = aggregate_video(logits, cfg);
        auto permuted = logits;
        if (n > 9) {
            std::swap(permuted[8], permuted[n - 1]);
            CHECK(aggregate_video(permuted, cfg).logit == base.logit);
        }
        auto raised = logits;
        raised[rng() % std::min<std::size_t>(n, 8)] += 0.5;
        CHECK(aggregate_video(raised, cfg).logit > base.logit);
    }
}

TEST_CASE("frame ids") {
    CHECK(format_frame_id("clip", 7) == "clip#0007");
    const auto f = parse_frame_id("a#b#0012");
    CHECK(f.video_id == "a#b");
    CHECK(f.frame_index == 12);
    CHECK(error_of([] { parse_frame_id("noframe"); }) == ErrorCode::Parse);
    CHECK(error_of([] { parse_frame_id("v#"); }) == ErrorCode::Parse);
    CHECK(error_of([] { parse_frame_id("v#12x"); }) == ErrorCode::Parse);
}

TEST_CASE("scoring videos from a frame archive") {
    probe::ProbeModel model;
    model.backbone_id = "s";
    model.feature_dim = 1;
    model.weights = {1.0F};
    std::vector<store::ArchiveRecord> records;
    // Video b: frames out of order, logits 0..9; video a: two frames.
    for (int i = 9; i >= 0; --i) {
        records.push_back({format_frame_id("b", static_cast<std::size_t>(i)), 1, "gen", {static_cast<float>(i)}});
    }
    records.push_back({"a#0001", 0, "real", {-3.0F}});
    records.push_back({"a#0000", 0, "real", {-1.0F}});
    store::ArchiveMeta meta;
    meta.backbone_id = "s";
    const auto frames = store::build_archive(records, meta);
    const auto rows = score_videos(model, frames, VideoConfig{}, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].video_id == "a");
    CHECK(rows[0].decision.logit == -2.0);
    CHECK(rows[1].video_id == "b");
    CHECK(rows[1].decision.logit == 3.5);
    CHECK(rows[1].decision.n_frames_used == 8);
    CHECK(render_video_csv(rows) == "video_id,n_frames_used,logit,score,label\n"
                                    "a,2,-2.000000,0.119203,real\n"
                                    "b,8,3.500000,0.970688,fake\n");

    records.push_back({"a#01", 0, "real", {0.0F}});
    const auto dup = store::build_archive(records, meta);
    CHECK(error_of([&] { score_videos(model, dup, VideoConfig{}); }) == ErrorCode::Integrity);
}
