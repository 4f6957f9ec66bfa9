#pragma once

#include "probeforge/cctrend/cdx_client.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace probeforge::cctrend {

struct TrendOptions {
    std::string pattern;
    std::optional<std::string> from_snapshot;  ///< inclusive; defaults to the first
    std::optional<std::string> to_snapshot;    ///< inclusive; defaults to the last
    CountMode mode = CountMode::Exact;
    std::size_t jobs = 1;
};

/// Snapshots within [from, to] in chronological order.
/// from after to, or an empty range, raises ErrorCode::Input.
std::vector<Snapshot> select_range(const std::vector<Snapshot>& all, const std::optional<std::string>& from,
                                   const std::optional<std::string>& to);

/// One row per snapshot in range. A failing snapshot yields an `error`
/// row and the rest of the series still runs.
std::vector<SnapshotCount> trend(CdxClient& client, const TrendOptions& options);

inline constexpr std::string_view kTrendCsvHeader = "snapshot_id,crawl_date,records,mode,status";
std::string render_trend_csv(const std::vector<SnapshotCount>& rows);

} // namespace probeforge::cctrend
