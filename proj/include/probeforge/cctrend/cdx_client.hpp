#pragma once

#include "probeforge/cctrend/cache.hpp"
#include "probeforge/cctrend/http.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace probeforge::cctrend {

/// Collection id of the form CC-MAIN-YYYY-WW.
bool is_snapshot_id(std::string_view id) noexcept;

struct Snapshot {
    std::string id;
    std::string crawl_date;  ///< YYYY-MM-DD
    int year = 0;
    int week = 0;

    bool operator==(const Snapshot&) const = default;
};

/// Orders by (year, week); raises ErrorCode::Parse for malformed ids.
Snapshot snapshot_from_id(std::string_view id);

/// Parses a collection-info document (JSON array of {id, ...}). Entries
/// whose id is not a crawl snapshot are skipped. Sorted chronologically.
std::vector<Snapshot> parse_collinfo(std::string_view body);

enum class CountMode { Pages, Exact };
std::string_view to_string(CountMode mode) noexcept;
CountMode parse_count_mode(std::string_view text);

enum class CountStatus { Ok, Estimate, Error };
std::string_view to_string(CountStatus status) noexcept;

struct SnapshotCount {
    std::string snapshot_id;
    std::string crawl_date;
    std::string domain_pattern;
    CountMode mode = CountMode::Exact;
    std::size_t pages = 0;
    std::optional<std::size_t> records;
    CountStatus status = CountStatus::Ok;
    std::string error;
    std::string fetched_at;  ///< UTC, ISO 8601
    bool from_cache = false;
};

struct IndexConfig {
    std::string host_key;  ///< names the host in cache keys
    std::string collinfo_path = "/collinfo.json";
    std::string index_path = "/{snapshot}-index";  ///< {snapshot} is substituted
    /// Lines per index block; a result page spans pageSize blocks.
    std::size_t lines_per_block = 3000;
    /// Skip cache reads (fresh results are still written).
    bool refresh = false;
};

/// CDX index client. Completed results are cached by
/// (host, snapshot, pattern, mode); failures are never cached.
class CdxClient {
public:
    CdxClient(HttpTransport& transport, RetryPolicy retry, PolitenessPolicy politeness, IndexConfig config,
              const DiskCache* cache = nullptr, PoliteClient::Sleeper sleeper = {});

    std::vector<Snapshot> list_snapshots();

    /// Pages mode asks only for the page count and reports an estimate.
    /// Exact mode counts result lines over every page. An unknown snapshot
    /// raises ErrorCode::NotFound; a pattern with no captures counts 0.
    SnapshotCount count_records(const Snapshot& snapshot, const std::string& pattern, CountMode mode);

    std::size_t network_calls() const noexcept { return client_.requests(); }
    std::size_t retries() const noexcept { return client_.retries(); }

private:
    HttpRequest index_request(const std::string& snapshot_id, const std::string& pattern) const;
    HttpResponse get_ok_or_404(const HttpRequest& request, const std::string& snapshot_id);

    PoliteClient client_;
    IndexConfig config_;
    const DiskCache* cache_;
};

} // namespace probeforge::cctrend
