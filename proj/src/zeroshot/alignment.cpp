#include "probeforge/zeroshot/alignment.hpp"

#include "probeforge/core/error.hpp"
#include "probeforge/core/parallel.hpp"
#include "probeforge/eval/render.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace probeforge::zeroshot {

double cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        fail(ErrorCode::Dimension, "cosine: dims " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
    }
    double dot = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * v[i];
        uu += static_cast<double>(u[i]) * u[i];
        vv += static_cast<double>(v[i]) * v[i];
    }
    if (uu == 0.0 || vv == 0.0) {
        fail(ErrorCode::UndefinedSimilarity, "cosine of a zero vector");
    }
    return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

namespace {

std::vector<double> similarities(std::span<const float> image, const TextPool& pool) {
    if (image.size() != pool.dim) {
        fail(ErrorCode::Dimension, "image dim " + std::to_string(image.size()) + " != pool dim " +
                                       std::to_string(pool.dim));
    }
    std::vector<double> sims(pool.entries.size());
    for (std::size_t t = 0; t < sims.size(); ++t) {
        sims[t] = cosine(image, pool.entries[t].embedding);
    }
    return sims;
}

std::vector<std::size_t> order_by(const std::vector<double>& sims) {
    std::vector<std::size_t> order(sims.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
    return order;
}

} // namespace

std::vector<TextMatch> rank_texts(std::span<const float> image, const TextPool& pool, std::size_t k) {
    const auto sims = similarities(image, pool);
    const auto order = order_by(sims);
    std::vector<TextMatch> out;
    for (std::size_t r = 0; r < std::min(k, order.size()); ++r) {
        const std::size_t t = order[r];
        out.push_back({t, pool.entries[t].text, pool.entries[t].category, sims[t]});
    }
    return out;
}

AlignmentResult aggregate_alignment(const store::EmbeddingArchive& archive, const TextPool& pool, std::size_t k,
                                    std::string dataset, std::size_t jobs) {
    if (!pool.backbone_id.empty() && pool.backbone_id != archive.backbone_id) {
        fail(ErrorCode::Compatibility,
             "text pool from '" + pool.backbone_id + "' but archive is '" + archive.backbone_id + "'");
    }
    if (archive.feature_dim != pool.dim) {
        fail(ErrorCode::Dimension, "archive dim " + std::to_string(archive.feature_dim) + " != pool dim " +
                                       std::to_string(pool.dim));
    }
    if (pool.entries.empty()) {
        fail(ErrorCode::Input, "text pool is empty");
    }
    if (k == 0) {
        fail(ErrorCode::Parameter, "k must be positive");
    }
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < archive.count(); ++i) {
        if (archive.labels[i] != store::kLabelReal) {
            used.push_back(i);
        }
    }
    if (used.empty()) {
        fail(ErrorCode::Input, "no fake or unlabelled rows to align");
    }

    const std::size_t n_texts = pool.entries.size();
    const std::size_t slots = std::min(k, n_texts);
    std::vector<std::vector<double>> sims(used.size());
    std::vector<std::vector<std::size_t>> ranks(used.size());
    parallel_for(used.size(), jobs, [&](std::size_t i) {
        sims[i] = similarities(archive.row(used[i]), pool);
        ranks[i] = order_by(sims[i]);
    });

    // Sequential reduce keeps the sums independent of the job count.
    std::vector<double> mean(n_texts, 0.0);
    std::vector<std::vector<std::size_t>> votes(slots, std::vector<std::size_t>(n_texts, 0));
    for (std::size_t i = 0; i < used.size(); ++i) {
        for (std::size_t t = 0; t < n_texts; ++t) {
            mean[t] += sims[i][t];
        }
        for (std::size_t r = 0; r < slots; ++r) {
            ++votes[r][ranks[i][r]];
        }
    }
    const double n = static_cast<double>(used.size());
    for (double& m : mean) {
        m = std::clamp(m / n, -1.0, 1.0);
    }

    auto aligned = [&](std::size_t t, std::size_t slot) {
        return AlignedText{pool.entries[t].text, pool.entries[t].category, mean[t],
                           static_cast<double>(votes[slot][t]) / n};
    };
    auto ranked = [&](std::size_t slot) {
        std::vector<std::size_t> order(n_texts);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (votes[slot][a] != votes[slot][b]) {
                return votes[slot][a] > votes[slot][b];
            }
            return mean[a] > mean[b];
        });
        return order;
    };

    AlignmentResult result;
    result.dataset = std::move(dataset);
    result.n_images = used.size();
    const auto top = ranked(0);
    for (std::size_t r = 0; r < slots; ++r) {
        result.top_k.push_back(aligned(top[r], 0));
    }
    for (std::size_t r = 0; r < slots; ++r) {
        result.slots.push_back(aligned(ranked(r).front(), r));
    }
    return result;
}

std::string render_alignment_markdown(const AlignmentResult& result) {
    std::ostringstream os;
    os << "| rank | Matched Text | category | Similarity Score | votes |\n|---:|---|---|---:|---:|\n";
    for (std::size_t r = 0; r < result.slots.size(); ++r) {
        const auto& s = result.slots[r];
        os << "| " << r + 1 << " | " << s.text << " | " << to_string(s.category) << " | "
           << eval::format_fixed3(s.mean_similarity) << " | " << eval::format_fixed3(s.vote_fraction) << " |\n";
    }
    return os.str();
}

std::string render_alignment_json(const AlignmentResult& result) {
    using nlohmann::json;
    auto to_json = [](const std::vector<AlignedText>& list) {
        json arr = json::array();
        for (const auto& a : list) {
            arr.push_back({{"text", a.text},
                           {"category", to_string(a.category)},
                           {"mean_similarity", a.mean_similarity},
                           {"vote_fraction", a.vote_fraction}});
        }
        return arr;
    };
    return json{{"dataset", result.dataset},
                {"n_images", result.n_images},
                {"top_k", to_json(result.top_k)},
                {"slots", to_json(result.slots)}}
               .dump(2) +
           "\n";
}

} // namespace probeforge::zeroshot
