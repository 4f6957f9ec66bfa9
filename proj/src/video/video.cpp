#include "probeforge/video/video.hpp"

#include "probeforge/core/error.hpp"
#include "probeforge/core/parallel.hpp"
#include "probeforge/store/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>

namespace probeforge::video {

std::string_view to_string(Sampling s) noexcept {
    return s == Sampling::Uniform ? "uniform" : "contiguous_prefix";
}

Sampling parse_sampling(std::string_view text) {
    if (text == "contiguous_prefix" || text == "prefix") {
        return Sampling::ContiguousPrefix;
    }
    if (text == "uniform") {
        return Sampling::Uniform;
    }
    fail(ErrorCode::Parameter, "unknown frame sampling '" + std::string(text) + "'");
}

void VideoConfig::validate() const {
    if (max_frames == 0) {
        fail(ErrorCode::Parameter, "max_frames must be >= 1");
    }
}

std::vector<std::size_t> select_frames(std::size_t frame_count, const VideoConfig& cfg) {
    cfg.validate();
    std::vector<std::size_t> out;
    if (cfg.sampling == Sampling::ContiguousPrefix) {
        for (std::size_t i = 0; i < std::min(frame_count, cfg.max_frames); ++i) {
            out.push_back(i);
        }
        return out;
    }
    for (std::size_t i = 0; i < cfg.max_frames; ++i) {
        const std::size_t idx = i * frame_count / cfg.max_frames;
        if (idx < frame_count && (out.empty() || out.back() != idx)) {
            out.push_back(idx);
        }
    }
    return out;
}

VideoDecision aggregate_video(std::span<const double> frame_logits, const VideoConfig& cfg, double threshold) {
    if (frame_logits.empty()) {
        fail(ErrorCode::Input, "video has no frame logits");
    }
    const auto picked = select_frames(frame_logits.size(), cfg);
    // Running mean keeps constant inputs exact.
    double mean = 0.0;
    double k = 0.0;
    for (std::size_t i : picked) {
        k += 1.0;
        mean += (frame_logits[i] - mean) / k;
    }
    VideoDecision d;
    d.n_frames_used = picked.size();
    d.logit = mean;
    d.score = probe::sigmoid(d.logit);
    d.label = probe::decide(d.score, threshold);
    return d;
}

FrameId parse_frame_id(std::string_view id) {
    const auto hash = id.rfind('#');
    if (hash == std::string_view::npos || hash == 0 || hash + 1 == id.size()) {
        fail(ErrorCode::Parse, "frame id '" + std::string(id) + "' is not of the form videoid#NNNN");
    }
    FrameId out;
    out.video_id = std::string(id.substr(0, hash));
    const auto digits = id.substr(hash + 1);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out.frame_index);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        fail(ErrorCode::Parse, "frame id '" + std::string(id) + "' has a bad frame index");
    }
    return out;
}

std::string format_frame_id(std::string_view video_id, std::size_t frame_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "#%04zu", frame_index);
    return std::string(video_id) + buf;
}

std::vector<VideoRow> score_videos(const probe::ProbeModel& model, const store::EmbeddingArchive& frames,
                                   const VideoConfig& cfg, std::size_t jobs) {
    cfg.validate();
    probe::check_compatible(model, frames);
    std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> videos;
    for (std::size_t i = 0; i < frames.count(); ++i) {
        FrameId f = parse_frame_id(frames.ids[i]);
        videos[f.video_id].emplace_back(f.frame_index, i);
    }
    std::vector<VideoRow> rows;
    std::vector<std::vector<std::size_t>> members;
    for (auto& [id, list] : videos) {
        std::sort(list.begin(), list.end());
        for (std::size_t j = 1; j < list.size(); ++j) {
            if (list[j].first == list[j - 1].first) {
                fail(ErrorCode::Integrity, "video '" + id + "' repeats frame " + std::to_string(list[j].first));
            }
        }
        std::vector<std::size_t> order;
        for (const auto& [frame, row] : list) {
            order.push_back(row);
        }
        rows.push_back({id, {}});
        members.push_back(std::move(order));
    }
    parallel_for(rows.size(), jobs, [&](std::size_t v) {
        std::vector<double> logits;
        for (std::size_t row : members[v]) {
            logits.push_back(probe::logit(model, frames.row(row)));
        }
        rows[v].decision = aggregate_video(logits, cfg, model.threshold);
    });
    return rows;
}

std::string render_video_csv(const std::vector<VideoRow>& rows) {
    std::string out(kVideoCsvHeader);
    out += '\n';
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f,", r.decision.n_frames_used, r.decision.logit,
                      r.decision.score);
        out += r.video_id + buf + std::string(store::to_string(r.decision.label)) + '\n';
    }
    return out;
}

} // namespace probeforge::video
