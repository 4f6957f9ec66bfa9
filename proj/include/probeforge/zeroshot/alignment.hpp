#pragma once

#include "probeforge/store/archive.hpp"
#include "probeforge/zeroshot/text_pool.hpp"

#include <span>
#include <string>
#include <vector>

namespace probeforge::zeroshot {

/// u.v / (|u| |v|) accumulated in double and clamped to [-1, 1].
/// A zero vector raises ErrorCode::UndefinedSimilarity.
double cosine(std::span<const float> u, std::span<const float> v);

struct TextMatch {
    std::size_t index = 0;  ///< position in the pool
    std::string text;
    Category category = Category::Forgery;
    double similarity = 0.0;
};

/// Pool entries by descending similarity, ties kept in pool order,
/// truncated to k (k larger than the pool returns everything).
std::vector<TextMatch> rank_texts(std::span<const float> image, const TextPool& pool, std::size_t k);

struct AlignedText {
    std::string text;
    Category category = Category::Forgery;
    double mean_similarity = 0.0;  ///< over every used image
    double vote_fraction = 0.0;    ///< share of images ranking this text at the slot
};

struct AlignmentResult {
    std::string dataset;
    std::size_t n_images = 0;
    /// Texts by top-1 vote share, then mean similarity, descending; length <= k.
    std::vector<AlignedText> top_k;
    /// slots[r] is the text most often ranked at position r (r < k).
    std::vector<AlignedText> slots;
};

/// Uses rows labelled fake or unlabelled. No usable row raises ErrorCode::Input;
/// a pool from another backbone raises ErrorCode::Compatibility.
AlignmentResult aggregate_alignment(const store::EmbeddingArchive& archive, const TextPool& pool, std::size_t k,
                                    std::string dataset = {}, std::size_t jobs = 1);

std::string render_alignment_markdown(const AlignmentResult& result);
std::string render_alignment_json(const AlignmentResult& result);

} // namespace probeforge::zeroshot
