#include "probeforge/cctrend/trend.hpp"

#include "probeforge/core/error.hpp"
#include "probeforge/core/logging.hpp"
#include "probeforge/core/parallel.hpp"

#include <tuple>

namespace probeforge::cctrend {

std::vector<Snapshot> select_range(const std::vector<Snapshot>& all, const std::optional<std::string>& from,
                                   const std::optional<std::string>& to) {
    const auto key = [](const Snapshot& s) { return std::tie(s.year, s.week); };
    std::optional<Snapshot> lo;
    std::optional<Snapshot> hi;
    if (from) {
        lo = snapshot_from_id(*from);
    }
    if (to) {
        hi = snapshot_from_id(*to);
    }
    if (lo && hi && key(*hi) < key(*lo)) {
        fail(ErrorCode::Input, "range start " + *from + " is after range end " + *to);
    }
    std::vector<Snapshot> out;
    for (const auto& s : all) {
        if ((lo && key(s) < key(*lo)) || (hi && key(*hi) < key(s))) {
            continue;
        }
        out.push_back(s);
    }
    if (out.empty()) {
        fail(ErrorCode::Input, "no snapshots in the requested range");
    }
    return out;
}

std::vector<SnapshotCount> trend(CdxClient& client, const TrendOptions& options) {
    if (options.pattern.empty()) {
        fail(ErrorCode::Parameter, "url pattern must not be empty");
    }
    const auto snapshots = select_range(client.list_snapshots(), options.from_snapshot, options.to_snapshot);
    std::vector<SnapshotCount> rows(snapshots.size());
    parallel_for(snapshots.size(), options.jobs, [&](std::size_t i) {
        const Snapshot& s = snapshots[i];
        try {
            rows[i] = client.count_records(s, options.pattern, options.mode);
        } catch (const Error& e) {
            SnapshotCount& row = rows[i];
            row.snapshot_id = s.id;
            row.crawl_date = s.crawl_date;
            row.domain_pattern = options.pattern;
            row.mode = options.mode;
            row.status = CountStatus::Error;
            row.error = e.what();
            log::error("snapshot count failed", {{"snapshot", s.id}, {"error", row.error}});
        }
    });
    return rows;
}

std::string render_trend_csv(const std::vector<SnapshotCount>& rows) {
    std::string out(kTrendCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += r.snapshot_id + ',' + r.crawl_date + ',' + (r.records ? std::to_string(*r.records) : std::string()) +
               ',' + std::string(to_string(r.mode)) + ',' + std::string(to_string(r.status)) + '\n';
    }
    return out;
}

} // namespace probeforge::cctrend
