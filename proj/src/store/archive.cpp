#include "probeforge/store/archive.hpp"

#include "probeforge/core/error.hpp"
#include "probeforge/store/registry.hpp"

#include <cmath>
#include <cstring>
#include <unordered_set>

namespace probeforge::store {

using nlohmann::json;

namespace {

std::string_view interpolation_name(Interpolation i) {
    return i == Interpolation::Bicubic ? "bicubic" : "bilinear";
}

} // namespace

void PreprocessRecord::validate() const {
    if (input_size <= 0) {
        fail(ErrorCode::Parameter, "input_size must be positive");
    }
    for (double s : channel_std) {
        if (!(s > 0.0)) {
            fail(ErrorCode::Parameter, "channel_std components must be strictly positive");
        }
    }
    if (perturbation) {
        perturbation->validate();
    }
}

void to_json(json& j, const PreprocessRecord& rec) {
    j = json{{"input_size", rec.input_size},
             {"interpolation", interpolation_name(rec.interpolation)},
             {"crop", "center"},
             {"channel_mean", rec.channel_mean},
             {"channel_std", rec.channel_std},
             {"perturbation", nullptr}};
    if (rec.perturbation) {
        j["perturbation"] = *rec.perturbation;
    }
}

void from_json(const json& j, PreprocessRecord& rec) {
    rec.input_size = j.at("input_size").get<int>();
    const auto interp = j.at("interpolation").get<std::string>();
    if (interp == "bicubic") {
        rec.interpolation = Interpolation::Bicubic;
    } else if (interp == "bilinear") {
        rec.interpolation = Interpolation::Bilinear;
    } else {
        fail(ErrorCode::Format, "unknown interpolation '" + interp + "'");
    }
    if (j.value("crop", std::string("center")) != "center") {
        fail(ErrorCode::Format, "only center crop is supported");
    }
    rec.crop = CropMode::Center;
    rec.channel_mean = j.at("channel_mean").get<std::array<double, 3>>();
    rec.channel_std = j.at("channel_std").get<std::array<double, 3>>();
    rec.perturbation.reset();
    if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
        rec.perturbation = j.at("perturbation").get<PerturbationSpec>();
    }
    rec.validate();
}

void EmbeddingArchive::validate() const {
    if (feature_dim == 0) {
        fail(ErrorCode::Dimension, "feature_dim must be positive");
    }
    if (labels.size() != ids.size() || groups.size() != ids.size()) {
        fail(ErrorCode::Integrity, "ids/labels/groups lengths differ");
    }
    if (rows.size() != ids.size() * feature_dim) {
        fail(ErrorCode::Dimension, "payload holds " + std::to_string(rows.size()) + " values, expected " +
                                       std::to_string(ids.size()) + " x " + std::to_string(feature_dim));
    }
    check_registry_dim(backbone_id, static_cast<long long>(feature_dim));
    preprocessing.validate();

    std::unordered_set<std::string_view> seen;
    seen.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!seen.insert(ids[i]).second) {
            fail(ErrorCode::Integrity, "duplicate id '" + ids[i] + "'");
        }
        if (labels[i] < kLabelUnlabeled || labels[i] > kLabelFake) {
            fail(ErrorCode::Integrity, "label " + std::to_string(labels[i]) + " of '" + ids[i] + "' not in {-1,0,1}");
        }
        if (normalized) {
            double sq = 0.0;
            for (float v : row(i)) {
                sq += static_cast<double>(v) * v;
            }
            const double norm = std::sqrt(sq);
            if (!(std::abs(norm - 1.0) <= kNormTolerance)) {
                fail(ErrorCode::Integrity, "row '" + ids[i] + "' has L2 norm " + std::to_string(norm) +
                                               " but archive is marked normalized");
            }
        }
    }
}

bool operator==(const EmbeddingArchive& a, const EmbeddingArchive& b) {
    return a.backbone_id == b.backbone_id && a.feature_dim == b.feature_dim && a.normalized == b.normalized &&
           a.preprocessing == b.preprocessing && a.ids == b.ids && a.labels == b.labels && a.groups == b.groups &&
           a.rows.size() == b.rows.size() &&
           (a.rows.empty() || std::memcmp(a.rows.data(), b.rows.data(), a.rows.size() * sizeof(float)) == 0);
}

EmbeddingArchive build_archive(std::span<const ArchiveRecord> records, const ArchiveMeta& meta) {
    EmbeddingArchive archive;
    archive.backbone_id = meta.backbone_id;
    archive.normalized = meta.normalized;
    archive.preprocessing = meta.preprocessing;

    std::size_t dim = 0;
    if (!records.empty()) {
        dim = records.front().row.size();
    } else if (meta.feature_dim) {
        dim = *meta.feature_dim;
    } else {
        fail(ErrorCode::Dimension, "feature_dim is required for an empty archive");
    }
    if (meta.feature_dim && *meta.feature_dim != dim) {
        fail(ErrorCode::Dimension, "rows have length " + std::to_string(dim) + ", declared feature_dim " +
                                       std::to_string(*meta.feature_dim));
    }
    archive.feature_dim = dim;
    archive.ids.reserve(records.size());
    archive.labels.reserve(records.size());
    archive.groups.reserve(records.size());
    archive.rows.reserve(records.size() * dim);
    for (const auto& rec : records) {
        if (rec.row.size() != dim) {
            fail(ErrorCode::Dimension, "row '" + rec.id + "' has length " + std::to_string(rec.row.size()) +
                                           ", expected " + std::to_string(dim));
        }
        archive.ids.push_back(rec.id);
        archive.labels.push_back(rec.label);
        archive.groups.push_back(rec.group);
        archive.rows.insert(archive.rows.end(), rec.row.begin(), rec.row.end());
    }
    archive.validate();
    return archive;
}

Bytes encode_archive(const EmbeddingArchive& archive) {
    archive.validate();
    const json header{{"backbone_id", archive.backbone_id},
                      {"feature_dim", archive.feature_dim},
                      {"count", archive.count()},
                      {"dtype", "f32"},
                      {"normalized", archive.normalized},
                      {"preprocessing", archive.preprocessing},
                      {"ids", archive.ids},
                      {"labels", archive.labels},
                      {"groups", archive.groups}};
    const std::string text = header.dump();

    Bytes out;
    out.reserve(16 + text.size() + archive.rows.size() * 4);
    out.insert(out.end(), kArchiveMagic.begin(), kArchiveMagic.end());
    append_u32_le(out, kArchiveVersion);
    append_u64_le(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    for (float v : archive.rows) {
        append_f32_le(out, v);
    }
    return out;
}

EmbeddingArchive decode_archive(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kArchiveMagic.data(), 4) != 0) {
        fail(ErrorCode::Format, "missing VFME magic");
    }
    const std::uint32_t version = load_u32_le(bytes.data() + 4);
    if (version != kArchiveVersion) {
        fail(ErrorCode::Format, "unsupported archive version " + std::to_string(version));
    }
    const std::uint64_t header_len = load_u64_le(bytes.data() + 8);
    if (header_len > bytes.size() - 16) {
        fail(ErrorCode::Format, "header length exceeds file size");
    }
    const auto* header_begin = reinterpret_cast<const char*>(bytes.data() + 16);
    json header;
    try {
        header = json::parse(header_begin, header_begin + header_len);
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("malformed archive header: ") + e.what());
    }

    EmbeddingArchive archive;
    std::size_t count = 0;
    try {
        if (header.at("dtype").get<std::string>() != "f32") {
            fail(ErrorCode::Format, "unsupported dtype '" + header.at("dtype").get<std::string>() + "'");
        }
        archive.backbone_id = header.at("backbone_id").get<std::string>();
        archive.feature_dim = header.at("feature_dim").get<std::size_t>();
        count = header.at("count").get<std::size_t>();
        archive.normalized = header.at("normalized").get<bool>();
        archive.preprocessing = header.at("preprocessing").get<PreprocessRecord>();
        archive.ids = header.at("ids").get<std::vector<std::string>>();
        archive.labels = header.at("labels").get<std::vector<int>>();
        archive.groups = header.at("groups").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("archive header field error: ") + e.what());
    }
    if (archive.ids.size() != count) {
        fail(ErrorCode::Integrity, "header count " + std::to_string(count) + " but " +
                                       std::to_string(archive.ids.size()) + " ids");
    }
    check_registry_dim(archive.backbone_id, static_cast<long long>(archive.feature_dim));

    const std::uint64_t payload = bytes.size() - 16 - header_len;
    if (archive.feature_dim == 0 || payload != static_cast<std::uint64_t>(count) * archive.feature_dim * 4) {
        fail(ErrorCode::Format, "payload of " + std::to_string(payload) + " bytes does not match count x feature_dim");
    }
    const std::uint8_t* p = bytes.data() + 16 + header_len;
    archive.rows.resize(count * archive.feature_dim);
    for (std::size_t i = 0; i < archive.rows.size(); ++i) {
        archive.rows[i] = load_f32_le(p + 4 * i);
    }
    archive.validate();
    return archive;
}

void write_archive(const std::filesystem::path& path, const EmbeddingArchive& archive) {
    write_file_bytes(path, encode_archive(archive));
}

void write_archive(const std::filesystem::path& path, std::span<const ArchiveRecord> records, const ArchiveMeta& meta) {
    write_archive(path, build_archive(records, meta));
}

EmbeddingArchive read_archive(const std::filesystem::path& path) { return decode_archive(read_file_bytes(path)); }

EmbeddingArchive subset(const EmbeddingArchive& archive, std::span<const std::size_t> indices) {
    EmbeddingArchive out;
    out.backbone_id = archive.backbone_id;
    out.feature_dim = archive.feature_dim;
    out.normalized = archive.normalized;
    out.preprocessing = archive.preprocessing;
    out.rows.reserve(indices.size() * archive.feature_dim);
    for (std::size_t i : indices) {
        if (i >= archive.count()) {
            fail(ErrorCode::Input, "row index out of range");
        }
        out.ids.push_back(archive.ids[i]);
        out.labels.push_back(archive.labels[i]);
        out.groups.push_back(archive.groups[i]);
        const auto r = archive.row(i);
        out.rows.insert(out.rows.end(), r.begin(), r.end());
    }
    return out;
}

} // namespace probeforge::store
