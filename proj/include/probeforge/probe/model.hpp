#pragma once

#include "probeforge/store/archive.hpp"
#include "probeforge/store/manifest.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace probeforge::probe {

inline constexpr int kModelFormatVersion = 1;

/// Single affine layer over frozen features.
struct ProbeModel {
    std::vector<float> weights;
    float bias = 0.0F;
    std::string backbone_id;
    std::size_t feature_dim = 0;
    bool normalize_input = false;
    double threshold = 0.5;
    std::string train_log_digest;

    /// Throws ErrorCode::Dimension or ErrorCode::Parameter.
    void validate() const;
    bool operator==(const ProbeModel&) const = default;
};

struct Prediction {
    double logit = 0.0;
    double score = 0.5;
    store::Label label = store::Label::Real;
};

/// Logistic function without overflow for large |z|.
double sigmoid(double z) noexcept;

/// Label rule shared by frame- and video-level scoring: fake iff score > threshold.
store::Label decide(double score, double threshold) noexcept;

/// w.x + b in double. x is L2-normalised first when the model asks for it
/// (a zero vector is left as is). Length mismatch is a dimension error.
double logit(const ProbeModel& model, std::span<const float> x);
Prediction predict(const ProbeModel& model, std::span<const float> x);

/// Logits for every archive row. `jobs` > 1 scores rows in parallel.
std::vector<double> score_archive(const ProbeModel& model, const store::EmbeddingArchive& archive,
                                  std::size_t jobs = 1);

/// Backbone mismatch raises ErrorCode::Compatibility, dim mismatch ErrorCode::Dimension.
void check_compatible(const ProbeModel& model, const store::EmbeddingArchive& archive);

std::string serialize_model(const ProbeModel& model);
/// Malformed or truncated text raises ErrorCode::Parse; an unknown
/// format_version raises ErrorCode::Compatibility.
ProbeModel parse_model(std::string_view text);
void save_model(const std::filesystem::path& path, const ProbeModel& model);
ProbeModel load_model(const std::filesystem::path& path);

} // namespace probeforge::probe
