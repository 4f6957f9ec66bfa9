#include "probeforge/core/logging.hpp"

#include "probeforge/core/error.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <mutex>
#include <string>

namespace probeforge::log {

namespace {

std::atomic<Format> g_format{Format::Human};
std::atomic<Level> g_level{Level::Info};
std::mutex g_mutex;

const char* level_name(Level level) {
    switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
    }
    return "info";
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

void configure(Format format, Level min_level) {
    g_format = format;
    g_level = min_level;
}

Level parse_level(std::string_view name) {
    if (name == "debug") return Level::Debug;
    if (name == "info") return Level::Info;
    if (name == "warn") return Level::Warn;
    if (name == "error") return Level::Error;
    fail(ErrorCode::Parameter, "unknown log level '" + std::string(name) + "'");
}

void write(Level level, std::string_view message, const nlohmann::json& fields) {
    if (level < g_level.load()) {
        return;
    }
    std::string line;
    if (g_format.load() == Format::Json) {
        nlohmann::json obj = fields.is_object() ? fields : nlohmann::json::object();
        obj["ts"] = utc_timestamp();
        obj["level"] = level_name(level);
        obj["msg"] = message;
        line = obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    } else {
        line = std::string(level_name(level)) + ": " + std::string(message);
        if (fields.is_object()) {
            for (const auto& [k, v] : fields.items()) {
                line += " " + k + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
            }
        }
    }
    std::lock_guard lock(g_mutex);
    std::fprintf(stderr, "%s\n", line.c_str());
}

} // namespace probeforge::log
