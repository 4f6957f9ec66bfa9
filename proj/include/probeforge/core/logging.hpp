#pragma once

#include <json.hpp>

#include <string_view>

namespace probeforge::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };
enum class Format { Human, Json };

void configure(Format format, Level min_level);
Level parse_level(std::string_view name);

/// Writes one line to stderr: `LEVEL message key=value ...` in human mode,
/// one JSON object per line in json mode.
void write(Level level, std::string_view message, const nlohmann::json& fields = nlohmann::json::object());

inline void debug(std::string_view m, const nlohmann::json& f = nlohmann::json::object()) { write(Level::Debug, m, f); }
inline void info(std::string_view m, const nlohmann::json& f = nlohmann::json::object()) { write(Level::Info, m, f); }
inline void warn(std::string_view m, const nlohmann::json& f = nlohmann::json::object()) { write(Level::Warn, m, f); }
inline void error(std::string_view m, const nlohmann::json& f = nlohmann::json::object()) { write(Level::Error, m, f); }

} // namespace probeforge::log
