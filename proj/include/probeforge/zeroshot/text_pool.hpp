#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace probeforge::zeroshot {

enum class Category { Forgery, Content, Source };

std::string_view to_string(Category c) noexcept;
/// Raises ErrorCode::Parse for unknown names.
Category parse_category(std::string_view text);

struct TextEntry {
    std::string text;
    Category category = Category::Forgery;
    std::vector<float> embedding;
};

/// Concept prompts embedded by a backbone's text tower.
struct TextPool {
    std::string backbone_id;
    std::size_t dim = 0;
    std::vector<TextEntry> entries;

    /// Duplicate texts raise ErrorCode::Integrity, ragged embeddings ErrorCode::Dimension.
    void validate() const;
};

/// JSON {backbone_id, dim, entries:[{text, category, embedding_b64_f32le}]}.
TextPool parse_text_pool(std::string_view text);
std::string serialize_text_pool(const TextPool& pool);
TextPool load_text_pool(const std::filesystem::path& path);
void save_text_pool(const std::filesystem::path& path, const TextPool& pool);

struct PoolTerm {
    std::string text;
    Category category = Category::Forgery;
};

/// Un-embedded term list {entries:[{text, category}]}, the exporter's input.
std::vector<PoolTerm> load_pool_terms(const std::filesystem::path& path);

} // namespace probeforge::zeroshot
