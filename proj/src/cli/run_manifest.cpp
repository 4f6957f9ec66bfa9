#include "probeforge/cli/run_manifest.hpp"

#include "probeforge/core/codec.hpp"

#include <algorithm>

namespace probeforge::cli {

FileDigest digest_path(std::string role, const std::filesystem::path& path, const std::vector<std::string>& exclude) {
    FileDigest d{std::move(role), path.generic_string(), {}};
    if (!std::filesystem::is_directory(path)) {
        d.sha256 = sha256_file(path);
        return d;
    }
    std::vector<std::string> lines;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const auto rel = std::filesystem::relative(entry.path(), path);
        if (std::find(exclude.begin(), exclude.end(), rel.generic_string()) != exclude.end()) {
            continue;
        }
        lines.push_back(rel.generic_string() + "  " + sha256_file(entry.path()));
    }
    std::sort(lines.begin(), lines.end());
    std::string joined;
    for (const auto& line : lines) {
        joined += line + '\n';
    }
    d.sha256 = sha256_hex(std::string_view(joined));
    return d;
}

nlohmann::json RunManifest::to_json() const {
    auto files = [](const std::vector<FileDigest>& list) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& f : list) {
            arr.push_back({{"role", f.role}, {"path", f.path}, {"sha256", f.sha256}});
        }
        return arr;
    };
    return {{"tool", "probeforge"},  {"version", kToolVersion}, {"subcommand", subcommand},
            {"global", global},      {"config", config},        {"inputs", files(inputs)},
            {"outputs", files(outputs)}, {"results", results}};
}

void write_run_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    write_text_file(path, manifest.to_json().dump(2) + "\n");
}

std::filesystem::path manifest_path_for(const std::filesystem::path& out, bool out_is_directory) {
    if (out_is_directory) {
        return out / "run.json";
    }
    auto p = out;
    p += ".run.json";
    return p;
}

} // namespace probeforge::cli
