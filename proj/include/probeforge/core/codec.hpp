#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace probeforge {

using Bytes = std::vector<std::uint8_t>;

std::string base64_encode(std::span<const std::uint8_t> data);
/// Throws ErrorCode::Parse on malformed input.
Bytes base64_decode(std::string_view text);

/// f32 values as little-endian IEEE-754 bytes, base64 encoded.
std::string encode_f32_base64(std::span<const float> values);
std::vector<float> decode_f32_base64(std::string_view text);

void append_u32_le(Bytes& out, std::uint32_t value);
void append_u64_le(Bytes& out, std::uint64_t value);
void append_f32_le(Bytes& out, float value);
std::uint32_t load_u32_le(const std::uint8_t* p) noexcept;
std::uint64_t load_u64_le(const std::uint8_t* p) noexcept;
float load_f32_le(const std::uint8_t* p) noexcept;

std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

Bytes read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> data);
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace probeforge
