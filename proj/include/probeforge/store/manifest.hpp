#pragma once

#include "probeforge/store/archive.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace probeforge::store {

enum class Label { Real = 0, Fake = 1 };
enum class Split { Train, Test };

std::string_view to_string(Label label) noexcept;
std::string_view to_string(Split split) noexcept;

struct ManifestEntry {
    std::string id;
    std::string relative_path;
    Label label = Label::Real;
    std::string generator;
    Split split = Split::Test;

    bool operator==(const ManifestEntry&) const = default;
};

/// Image inventory. The CSV header is fixed:
/// `id,relative_path,label,generator,split`.
struct DatasetManifest {
    std::string name;
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;
};

inline constexpr std::string_view kManifestHeader = "id,relative_path,label,generator,split";

/// Throws ErrorCode::Traversal for absolute paths or any `..` component.
void check_relative_path(std::string_view path);

/// Parses CSV text. Row-level problems raise ErrorCode::Parse with the
/// 1-based line number; unsafe paths raise ErrorCode::Traversal.
DatasetManifest parse_manifest(std::string_view csv, std::string name = {}, std::filesystem::path root = {});
/// Reads a manifest file; root defaults to the file's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string render_manifest(const DatasetManifest& manifest);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

struct LabelCounts {
    std::size_t real = 0;
    std::size_t fake = 0;
    bool operator==(const LabelCounts&) const = default;
};

struct ValidationReport {
    std::vector<std::string> missing_files;  ///< relative paths not found under root
    std::vector<std::string> duplicate_ids;
    std::map<std::string, LabelCounts> per_generator;
    LabelCounts totals;

    bool valid() const noexcept { return missing_files.empty() && duplicate_ids.empty(); }
    /// Duplicate ids raise ErrorCode::Integrity, missing files ErrorCode::Io.
    void throw_if_invalid() const;
};

/// With `check_files` false only structural checks run (no filesystem access).
ValidationReport validate_manifest(const DatasetManifest& manifest, const std::filesystem::path& root,
                                   bool check_files = true);

/// Joins archive rows to the manifest entries of one split, in manifest order.
/// Labels and groups come from the manifest; an archive row that disagrees
/// with a manifest label, or a manifest id with no row, is an integrity error.
EmbeddingArchive select_split(const EmbeddingArchive& archive, const DatasetManifest& manifest, Split split);

} // namespace probeforge::store
