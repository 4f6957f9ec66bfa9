#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace probeforge::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct FileDigest {
    std::string role;
    std::string path;
    std::string sha256;
};

/// sha256 of a file, or for a directory the sha256 over its sorted
/// `relative_path  file_sha256` lines. `exclude` names are skipped at the top level.
FileDigest digest_path(std::string role, const std::filesystem::path& path,
                       const std::vector<std::string>& exclude = {});

/// Machine-readable record of one run. The `global` and `config` objects
/// use long option names, so a manifest doubles as a `--config` file.
struct RunManifest {
    std::string subcommand;
    nlohmann::json global = nlohmann::json::object();
    nlohmann::json config = nlohmann::json::object();
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
    nlohmann::json results = nlohmann::json::object();

    nlohmann::json to_json() const;
};

void write_run_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// `<out>.run.json` beside a file output, `<out>/run.json` inside a directory output.
std::filesystem::path manifest_path_for(const std::filesystem::path& out, bool out_is_directory);

} // namespace probeforge::cli
