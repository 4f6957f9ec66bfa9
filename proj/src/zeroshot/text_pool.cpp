#include "probeforge/zeroshot/text_pool.hpp"

#include "probeforge/core/codec.hpp"
#include "probeforge/core/error.hpp"

#include <set>

#include <json.hpp>

namespace probeforge::zeroshot {

using nlohmann::json;

std::string_view to_string(Category c) noexcept {
    switch (c) {
    case Category::Forgery:
        return "forgery";
    case Category::Content:
        return "content";
    case Category::Source:
        return "source";
    }
    return "forgery";
}

Category parse_category(std::string_view text) {
    if (text == "forgery") {
        return Category::Forgery;
    }
    if (text == "content") {
        return Category::Content;
    }
    if (text == "source") {
        return Category::Source;
    }
    fail(ErrorCode::Parse, "unknown text category '" + std::string(text) + "'");
}

void TextPool::validate() const {
    std::set<std::string_view> seen;
    for (const auto& e : entries) {
        if (!seen.insert(e.text).second) {
            fail(ErrorCode::Integrity, "text pool lists '" + e.text + "' twice");
        }
        if (e.embedding.size() != dim) {
            fail(ErrorCode::Dimension, "text '" + e.text + "' has dim " + std::to_string(e.embedding.size()) +
                                           ", pool dim is " + std::to_string(dim));
        }
    }
    if (dim == 0 && !entries.empty()) {
        fail(ErrorCode::Dimension, "text pool dim must be positive");
    }
}

namespace {

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string(what) + ": " + e.what());
    }
}

} // namespace

TextPool parse_text_pool(std::string_view text) {
    const json j = parse_json(text, "text pool");
    TextPool pool;
    try {
        pool.backbone_id = j.at("backbone_id").get<std::string>();
        pool.dim = j.at("dim").get<std::size_t>();
        for (const auto& e : j.at("entries")) {
            TextEntry entry;
            entry.text = e.at("text").get<std::string>();
            entry.category = parse_category(e.at("category").get<std::string>());
            entry.embedding = decode_f32_base64(e.at("embedding_b64_f32le").get<std::string>());
            pool.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("text pool: ") + e.what());
    }
    pool.validate();
    return pool;
}

std::string serialize_text_pool(const TextPool& pool) {
    pool.validate();
    json entries = json::array();
    for (const auto& e : pool.entries) {
        entries.push_back({{"text", e.text},
                           {"category", to_string(e.category)},
                           {"embedding_b64_f32le", encode_f32_base64(e.embedding)}});
    }
    return json{{"backbone_id", pool.backbone_id}, {"dim", pool.dim}, {"entries", entries}}.dump(2) + "\n";
}

TextPool load_text_pool(const std::filesystem::path& path) {
    return parse_text_pool(read_text_file(path));
}

void save_text_pool(const std::filesystem::path& path, const TextPool& pool) {
    write_text_file(path, serialize_text_pool(pool));
}

std::vector<PoolTerm> load_pool_terms(const std::filesystem::path& path) {
    const json j = parse_json(read_text_file(path), "pool terms");
    std::vector<PoolTerm> terms;
    std::set<std::string> seen;
    try {
        for (const auto& e : j.at("entries")) {
            PoolTerm t{e.at("text").get<std::string>(), parse_category(e.at("category").get<std::string>())};
            if (!seen.insert(t.text).second) {
                fail(ErrorCode::Integrity, "pool terms list '" + t.text + "' twice");
            }
            terms.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("pool terms: ") + e.what());
    }
    return terms;
}

} // namespace probeforge::zeroshot
