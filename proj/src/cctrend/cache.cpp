#include "probeforge/cctrend/cache.hpp"

#include "probeforge/core/codec.hpp"
#include "probeforge/core/error.hpp"

#include <atomic>
#include <cstdlib>
#include <system_error>
#include <thread>

namespace probeforge::cctrend {

DiskCache::DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path DiskCache::entry_path(std::string_view key) const {
    const std::string h = sha256_hex(key);
    return dir_ / h.substr(0, 2) / (h + ".json");
}

std::optional<std::string> DiskCache::get(std::string_view key) const {
    const auto path = entry_path(key);
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        return std::nullopt;
    }
    return read_text_file(path);
}

void DiskCache::put(std::string_view key, std::string_view value) const {
    static std::atomic<unsigned> counter{0};
    const auto path = entry_path(key);
    auto tmp = path;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "-" +
           std::to_string(counter++);
    write_text_file(tmp, value);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorCode::Io, "cannot store cache entry " + path.string());
    }
}

std::filesystem::path DiskCache::default_dir() {
    if (const char* dir = std::getenv("PROBEFORGE_CACHE_DIR"); dir != nullptr && *dir != '\0') {
        return dir;
    }
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg != nullptr && *xdg != '\0') {
        return std::filesystem::path(xdg) / "probeforge";
    }
    if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0') {
        return std::filesystem::path(home) / ".cache" / "probeforge";
    }
    return std::filesystem::temp_directory_path() / "probeforge-cache";
}

} // namespace probeforge::cctrend
