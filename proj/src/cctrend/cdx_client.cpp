#include "probeforge/cctrend/cdx_client.hpp"

#include "probeforge/core/error.hpp"
#include "probeforge/core/logging.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <tuple>

#include <json.hpp>

namespace probeforge::cctrend {

using nlohmann::json;

namespace {

constexpr std::string_view kPrefix = "CC-MAIN-";

bool all_digits(std::string_view s) noexcept {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
    int v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

// Monday of ISO week `week` in `year`.
std::string iso_week_monday(int year, int week) {
    using namespace std::chrono;
    const sys_days jan4{std::chrono::year{year} / January / 4};
    const sys_days monday = jan4 - days{weekday{jan4}.iso_encoding() - 1} + days{7 * (week - 1)};
    const year_month_day ymd{monday};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool no_captures(const HttpResponse& r) {
    return r.body.find("No Captures found") != std::string::npos;
}

std::size_t count_lines(std::string_view body) {
    std::size_t n = 0;
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t end = body.find('\n', pos);
        if (end == std::string_view::npos) {
            end = body.size();
        }
        const auto line = body.substr(pos, end - pos);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            ++n;
        }
        pos = end + 1;
    }
    return n;
}

json count_to_json(const SnapshotCount& c) {
    return {{"snapshot_id", c.snapshot_id}, {"crawl_date", c.crawl_date}, {"pattern", c.domain_pattern},
            {"mode", to_string(c.mode)},    {"pages", c.pages},           {"records", *c.records},
            {"status", to_string(c.status)}, {"fetched_at", c.fetched_at}};
}

} // namespace

bool is_snapshot_id(std::string_view id) noexcept {
    if (id.size() != kPrefix.size() + 7 || id.substr(0, kPrefix.size()) != kPrefix) {
        return false;
    }
    const auto rest = id.substr(kPrefix.size());
    return all_digits(rest.substr(0, 4)) && rest[4] == '-' && all_digits(rest.substr(5, 2));
}

Snapshot snapshot_from_id(std::string_view id) {
    if (!is_snapshot_id(id)) {
        fail(ErrorCode::Parse, "'" + std::string(id) + "' is not a CC-MAIN-YYYY-WW snapshot id");
    }
    Snapshot s;
    s.id = std::string(id);
    s.year = to_int(id.substr(kPrefix.size(), 4));
    s.week = to_int(id.substr(kPrefix.size() + 5, 2));
    s.crawl_date = iso_week_monday(s.year, s.week);
    return s;
}

std::vector<Snapshot> parse_collinfo(std::string_view body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("collection info: ") + e.what());
    }
    if (!j.is_array()) {
        fail(ErrorCode::Parse, "collection info is not a JSON array");
    }
    std::vector<Snapshot> out;
    for (const auto& entry : j) {
        if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string()) {
            fail(ErrorCode::Parse, "collection info entry without a string id");
        }
        const auto id = entry["id"].get<std::string>();
        if (!is_snapshot_id(id)) {
            continue;
        }
        Snapshot s = snapshot_from_id(id);
        if (entry.contains("from") && entry["from"].is_string() && entry["from"].get<std::string>().size() >= 10) {
            s.crawl_date = entry["from"].get<std::string>().substr(0, 10);
        }
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const Snapshot& a, const Snapshot& b) {
        return std::tie(a.year, a.week, a.id) < std::tie(b.year, b.week, b.id);
    });
    return out;
}

std::string_view to_string(CountMode mode) noexcept {
    return mode == CountMode::Pages ? "pages" : "exact";
}

CountMode parse_count_mode(std::string_view text) {
    if (text == "pages") {
        return CountMode::Pages;
    }
    if (text == "exact") {
        return CountMode::Exact;
    }
    fail(ErrorCode::Parameter, "unknown count mode '" + std::string(text) + "'");
}

std::string_view to_string(CountStatus status) noexcept {
    switch (status) {
    case CountStatus::Ok:
        return "ok";
    case CountStatus::Estimate:
        return "estimate";
    case CountStatus::Error:
        return "error";
    }
    return "error";
}

CdxClient::CdxClient(HttpTransport& transport, RetryPolicy retry, PolitenessPolicy politeness, IndexConfig config,
                     const DiskCache* cache, PoliteClient::Sleeper sleeper)
    : client_(transport, retry, politeness, std::move(sleeper)), config_(std::move(config)), cache_(cache) {}

std::vector<Snapshot> CdxClient::list_snapshots() {
    const std::string key = "collinfo|" + config_.host_key + "|" + config_.collinfo_path;
    if (cache_ != nullptr && !config_.refresh) {
        if (auto hit = cache_->get(key)) {
            return parse_collinfo(*hit);
        }
    }
    const auto result = client_.fetch({config_.collinfo_path, {}});
    if (result.response.status != 200) {
        fail(result.response.status == 404 ? ErrorCode::NotFound : ErrorCode::Transport,
             "collection info: HTTP " + std::to_string(result.response.status));
    }
    auto snapshots = parse_collinfo(result.response.body);
    if (cache_ != nullptr) {
        cache_->put(key, result.response.body);
    }
    return snapshots;
}

HttpRequest CdxClient::index_request(const std::string& snapshot_id, const std::string& pattern) const {
    std::string path = config_.index_path;
    const std::string token = "{snapshot}";
    if (auto pos = path.find(token); pos != std::string::npos) {
        path.replace(pos, token.size(), snapshot_id);
    }
    return {path, {{"url", pattern}, {"output", "json"}}};
}

HttpResponse CdxClient::get_ok_or_404(const HttpRequest& request, const std::string& snapshot_id) {
    auto result = client_.fetch(request);
    HttpResponse& r = result.response;
    if (r.status == 200 || (r.status == 404 && no_captures(r))) {
        return std::move(r);
    }
    if (r.status == 404) {
        fail(ErrorCode::NotFound, "snapshot " + snapshot_id + " is not served by the index");
    }
    fail(ErrorCode::Transport, request.target() + ": HTTP " + std::to_string(r.status));
}

SnapshotCount CdxClient::count_records(const Snapshot& snapshot, const std::string& pattern, CountMode mode) {
    if (pattern.empty()) {
        fail(ErrorCode::Parameter, "url pattern must not be empty");
    }
    const std::string key = "count|" + config_.host_key + "|" + config_.index_path + "|" + snapshot.id + "|" +
                            pattern + "|" + std::string(to_string(mode)) + "|" +
                            std::to_string(config_.lines_per_block);
    SnapshotCount out;
    out.snapshot_id = snapshot.id;
    out.crawl_date = snapshot.crawl_date;
    out.domain_pattern = pattern;
    out.mode = mode;
    if (cache_ != nullptr && !config_.refresh) {
        if (auto hit = cache_->get(key)) {
            try {
                const json j = json::parse(*hit);
                out.pages = j.at("pages").get<std::size_t>();
                out.records = j.at("records").get<std::size_t>();
                out.status = mode == CountMode::Pages ? CountStatus::Estimate : CountStatus::Ok;
                out.fetched_at = j.at("fetched_at").get<std::string>();
                out.from_cache = true;
                return out;
            } catch (const json::exception&) {
                log::warn("ignoring corrupt cache entry", {{"snapshot", snapshot.id}});
            }
        }
    }

    out.fetched_at = utc_now();
    HttpRequest pages_req = index_request(snapshot.id, pattern);
    pages_req.query.emplace_back("showNumPages", "true");
    const HttpResponse pages_resp = get_ok_or_404(pages_req, snapshot.id);
    std::size_t page_size = 0;
    if (pages_resp.status == 404) {
        out.pages = 0;
    } else {
        try {
            const json j = json::parse(pages_resp.body);
            out.pages = j.at("pages").get<std::size_t>();
            page_size = j.value("pageSize", std::size_t{0});
        } catch (const json::exception& e) {
            fail(ErrorCode::Parse, "page count for " + snapshot.id + ": " + e.what());
        }
    }

    if (mode == CountMode::Pages) {
        out.records = out.pages * page_size * config_.lines_per_block;
        out.status = CountStatus::Estimate;
    } else {
        std::size_t total = 0;
        for (std::size_t page = 0; page < out.pages; ++page) {
            HttpRequest req = index_request(snapshot.id, pattern);
            req.query.emplace_back("page", std::to_string(page));
            const HttpResponse r = get_ok_or_404(req, snapshot.id);
            if (r.status == 200) {
                total += count_lines(r.body);
            }
        }
        out.records = total;
        out.status = CountStatus::Ok;
    }
    if (cache_ != nullptr) {
        cache_->put(key, count_to_json(out).dump());
    }
    return out;
}

} // namespace probeforge::cctrend
