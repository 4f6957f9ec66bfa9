#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace probeforge::cctrend {

/// Content store under one directory; entries are addressed by the
/// sha256 of their key and written atomically (temp file + rename).
class DiskCache {
public:
    explicit DiskCache(std::filesystem::path dir);

    std::optional<std::string> get(std::string_view key) const;
    void put(std::string_view key, std::string_view value) const;
    const std::filesystem::path& dir() const noexcept { return dir_; }

    /// $PROBEFORGE_CACHE_DIR, else $XDG_CACHE_HOME/probeforge, else ~/.cache/probeforge.
    static std::filesystem::path default_dir();

private:
    std::filesystem::path entry_path(std::string_view key) const;

    std::filesystem::path dir_;
};

} // namespace probeforge::cctrend
