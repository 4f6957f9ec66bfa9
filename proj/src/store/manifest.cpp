#include "probeforge/store/manifest.hpp"

#include "probeforge/core/codec.hpp"
#include "probeforge/core/error.hpp"

#include <set>
#include <sstream>
#include <unordered_map>

namespace probeforge::store {

namespace fs = std::filesystem;

std::string_view to_string(Label label) noexcept { return label == Label::Real ? "real" : "fake"; }
std::string_view to_string(Split split) noexcept { return split == Split::Train ? "train" : "test"; }

namespace {

// RFC 4180 field splitting for one physical line (no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool field_started_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty() && !field_started_quoted) {
            quoted = true;
            field_started_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            field_started_quoted = false;
        } else {
            field.push_back(c);
        }
    }
    if (quoted) {
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": unterminated quoted field");
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"") == std::string::npos) {
        return value;
    }
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

void check_relative_path(std::string_view path) {
    if (path.empty()) {
        fail(ErrorCode::Traversal, "empty relative_path");
    }
    const fs::path p{std::string(path)};
    if (p.is_absolute() || path.front() == '/' || path.front() == '\\') {
        fail(ErrorCode::Traversal, "absolute path '" + std::string(path) + "'");
    }
    for (const auto& part : p) {
        if (part == "..") {
            fail(ErrorCode::Traversal, "path '" + std::string(path) + "' escapes the dataset root");
        }
    }
    if (path.find("\\..") != std::string_view::npos || path.find("..\\") != std::string_view::npos) {
        fail(ErrorCode::Traversal, "path '" + std::string(path) + "' escapes the dataset root");
    }
}

DatasetManifest parse_manifest(std::string_view csv, std::string name, fs::path root) {
    DatasetManifest manifest;
    manifest.name = std::move(name);
    manifest.root = std::move(root);

    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t end = csv.find('\n', pos);
        if (end == std::string_view::npos) {
            end = csv.size();
        }
        std::string_view line = csv.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            if (end == csv.size()) {
                break;
            }
            continue;
        }
        if (!header_seen) {
            if (line != kManifestHeader) {
                fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected header '" +
                                           std::string(kManifestHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        auto fields = split_csv_line(line, line_no);
        if (fields.size() != 5) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 5 fields, got " +
                                       std::to_string(fields.size()));
        }
        ManifestEntry entry;
        entry.id = std::move(fields[0]);
        if (entry.id.empty()) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": empty id");
        }
        entry.relative_path = std::move(fields[1]);
        check_relative_path(entry.relative_path);
        if (fields[2] == "real" || fields[2] == "0") {
            entry.label = Label::Real;
        } else if (fields[2] == "fake" || fields[2] == "1") {
            entry.label = Label::Fake;
        } else {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": label '" + fields[2] +
                                       "' is not real/fake");
        }
        entry.generator = std::move(fields[3]);
        if (fields[4] == "train") {
            entry.split = Split::Train;
        } else if (fields[4] == "test") {
            entry.split = Split::Test;
        } else {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": split '" + fields[4] +
                                       "' is not train/test");
        }
        manifest.entries.push_back(std::move(entry));
        if (end == csv.size()) {
            break;
        }
    }
    if (!header_seen) {
        fail(ErrorCode::Parse, "line 1: missing header");
    }
    return manifest;
}

DatasetManifest load_manifest(const fs::path& path) {
    const std::string text = read_text_file(path);
    return parse_manifest(text, path.stem().string(), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

std::string render_manifest(const DatasetManifest& manifest) {
    std::ostringstream os;
    os << kManifestHeader << '\n';
    for (const auto& e : manifest.entries) {
        os << csv_escape(e.id) << ',' << csv_escape(e.relative_path) << ',' << to_string(e.label) << ','
           << csv_escape(e.generator) << ',' << to_string(e.split) << '\n';
    }
    return os.str();
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
    write_text_file(path, render_manifest(manifest));
}

void ValidationReport::throw_if_invalid() const {
    if (!duplicate_ids.empty()) {
        std::string list;
        for (const auto& id : duplicate_ids) {
            list += (list.empty() ? "" : ", ") + id;
        }
        fail(ErrorCode::Integrity, "duplicate ids: " + list);
    }
    if (!missing_files.empty()) {
        std::string list;
        for (const auto& p : missing_files) {
            list += (list.empty() ? "" : ", ") + p;
        }
        fail(ErrorCode::Io, "missing files: " + list);
    }
}

ValidationReport validate_manifest(const DatasetManifest& manifest, const fs::path& root, bool check_files) {
    ValidationReport report;
    std::set<std::string> seen;
    std::set<std::string> dups;
    for (const auto& e : manifest.entries) {
        if (!seen.insert(e.id).second) {
            dups.insert(e.id);
        }
        auto& counts = report.per_generator[e.generator];
        if (e.label == Label::Real) {
            ++counts.real;
            ++report.totals.real;
        } else {
            ++counts.fake;
            ++report.totals.fake;
        }
        if (check_files) {
            std::error_code ec;
            if (!fs::is_regular_file(root / e.relative_path, ec)) {
                report.missing_files.push_back(e.relative_path);
            }
        }
    }
    report.duplicate_ids.assign(dups.begin(), dups.end());
    return report;
}

EmbeddingArchive select_split(const EmbeddingArchive& archive, const DatasetManifest& manifest, Split split) {
    std::unordered_map<std::string_view, std::size_t> index;
    index.reserve(archive.count());
    for (std::size_t i = 0; i < archive.count(); ++i) {
        index.emplace(archive.ids[i], i);
    }
    std::vector<std::size_t> picked;
    std::vector<const ManifestEntry*> entries;
    std::string missing;
    std::unordered_map<std::string_view, bool> used;
    for (const auto& e : manifest.entries) {
        if (e.split != split) {
            continue;
        }
        if (!used.emplace(e.id, true).second) {
            fail(ErrorCode::Integrity, "duplicate id '" + e.id + "' in manifest");
        }
        const auto it = index.find(e.id);
        if (it == index.end()) {
            missing += (missing.empty() ? "" : ", ") + e.id;
            continue;
        }
        const int manifest_label = static_cast<int>(e.label);
        const int archive_label = archive.labels[it->second];
        if (archive_label != kLabelUnlabeled && archive_label != manifest_label) {
            fail(ErrorCode::Integrity, "label of '" + e.id + "' disagrees between archive and manifest");
        }
        picked.push_back(it->second);
        entries.push_back(&e);
    }
    if (!missing.empty()) {
        fail(ErrorCode::Integrity, "manifest ids missing from archive: " + missing);
    }
    EmbeddingArchive out = subset(archive, picked);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out.labels[i] = static_cast<int>(entries[i]->label);
        out.groups[i] = entries[i]->generator;
    }
    return out;
}

} // namespace probeforge::store
