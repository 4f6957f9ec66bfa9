#pragma once

#include "probeforge/core/codec.hpp"
#include "probeforge/core/perturbation.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace probeforge::store {

enum class Interpolation { Bicubic, Bilinear };
enum class CropMode { Center };

/// How pixels were turned into backbone input before embedding.
struct PreprocessRecord {
    int input_size = 224;
    Interpolation interpolation = Interpolation::Bicubic;
    CropMode crop = CropMode::Center;
    std::array<double, 3> channel_mean{0.5, 0.5, 0.5};
    std::array<double, 3> channel_std{0.5, 0.5, 0.5};
    std::optional<PerturbationSpec> perturbation;

    /// Throws ErrorCode::Parameter on non-positive input_size or std.
    void validate() const;
    bool operator==(const PreprocessRecord&) const = default;
};

void to_json(nlohmann::json& j, const PreprocessRecord& rec);
void from_json(const nlohmann::json& j, PreprocessRecord& rec);

constexpr int kLabelUnlabeled = -1;
constexpr int kLabelReal = 0;
constexpr int kLabelFake = 1;

constexpr std::uint32_t kArchiveVersion = 1;
constexpr std::array<char, 4> kArchiveMagic{'V', 'F', 'M', 'E'};
/// Accepted deviation of a row norm from 1 when `normalized` is set.
constexpr double kNormTolerance = 1e-4;

/// Frozen pooled backbone features with per-row id, label and group.
/// Immutable after load; rows are count x feature_dim, row-major.
struct EmbeddingArchive {
    std::string backbone_id;
    std::size_t feature_dim = 0;
    bool normalized = false;
    PreprocessRecord preprocessing;
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<std::string> groups;
    std::vector<float> rows;

    std::size_t count() const noexcept { return ids.size(); }
    std::span<const float> row(std::size_t i) const noexcept {
        return {rows.data() + i * feature_dim, feature_dim};
    }

    /// Checks every archive invariant (lengths, labels, unique ids, row norms,
    /// registry dim). Throws the matching error class on violation.
    void validate() const;

    /// Bitwise equality, including f32 payloads.
    friend bool operator==(const EmbeddingArchive& a, const EmbeddingArchive& b);
};

struct ArchiveRecord {
    std::string id;
    int label = kLabelUnlabeled;
    std::string group;
    std::vector<float> row;
};

struct ArchiveMeta {
    std::string backbone_id;
    PreprocessRecord preprocessing;
    bool normalized = false;
    /// Required when there are no records; otherwise must match the rows.
    std::optional<std::size_t> feature_dim;
};

/// Assembles and validates an archive. Ragged rows raise a dimension error,
/// duplicate ids an integrity error.
EmbeddingArchive build_archive(std::span<const ArchiveRecord> records, const ArchiveMeta& meta);

Bytes encode_archive(const EmbeddingArchive& archive);
EmbeddingArchive decode_archive(std::span<const std::uint8_t> bytes);

void write_archive(const std::filesystem::path& path, const EmbeddingArchive& archive);
void write_archive(const std::filesystem::path& path, std::span<const ArchiveRecord> records, const ArchiveMeta& meta);
EmbeddingArchive read_archive(const std::filesystem::path& path);

/// Rows whose index is listed, in the listed order.
EmbeddingArchive subset(const EmbeddingArchive& archive, std::span<const std::size_t> indices);

} // namespace probeforge::store
