#pragma once

#include "probeforge/probe/model.hpp"
#include "probeforge/store/archive.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace probeforge::video {

enum class Sampling { ContiguousPrefix, Uniform };

std::string_view to_string(Sampling s) noexcept;
Sampling parse_sampling(std::string_view text);

struct VideoConfig {
    std::size_t max_frames = 8;
    Sampling sampling = Sampling::ContiguousPrefix;

    /// Throws ErrorCode::Parameter when max_frames is 0.
    void validate() const;
};

/// Contiguous prefix: [0, min(n, S)). Uniform: floor(i n / S) for i < S,
/// deduplicated and sorted.
std::vector<std::size_t> select_frames(std::size_t frame_count, const VideoConfig& cfg);

struct VideoDecision {
    double logit = 0.0;
    double score = 0.5;
    store::Label label = store::Label::Real;
    std::size_t n_frames_used = 0;
};

/// Mean of the selected frame logits, then the probe's sigmoid/threshold.
/// An empty list raises ErrorCode::Input.
VideoDecision aggregate_video(std::span<const double> frame_logits, const VideoConfig& cfg,
                              double threshold = 0.5);

struct FrameId {
    std::string video_id;
    std::size_t frame_index = 0;
};

/// Splits `videoid#NNNN` at the last '#'. Raises ErrorCode::Parse.
FrameId parse_frame_id(std::string_view id);
std::string format_frame_id(std::string_view video_id, std::size_t frame_index);

struct VideoRow {
    std::string video_id;
    VideoDecision decision;
};

/// Groups frame rows by video, orders frames by index and aggregates.
/// Rows come out sorted by video id. A repeated frame is an integrity error.
std::vector<VideoRow> score_videos(const probe::ProbeModel& model, const store::EmbeddingArchive& frames,
                                   const VideoConfig& cfg, std::size_t jobs = 1);

inline constexpr std::string_view kVideoCsvHeader = "video_id,n_frames_used,logit,score,label";
std::string render_video_csv(const std::vector<VideoRow>& rows);

} // namespace probeforge::video
