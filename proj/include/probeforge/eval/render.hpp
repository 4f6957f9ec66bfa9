#pragma once

#include "probeforge/eval/evaluate.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace probeforge::eval {

enum class ReportFormat { Markdown, Csv, Json };

/// Markdown only. Long puts one group per row; wide puts one group per
/// column with a trailing macro Avg, like a benchmark table row.
enum class MarkdownLayout { Long, Wide };

ReportFormat parse_report_format(std::string_view text);

/// Rounds to 3 decimals, ties to even. A value within 1e-9 of a tie counts
/// as a tie so binary noise does not break the rule.
std::string format_fixed3(double value);
std::string format_fixed3(const std::optional<double>& value, std::string_view absent = "");

inline constexpr std::string_view kReportCsvHeader = "group,n_real,n_fake,real_acc,fake_acc,avg";

/// Group rows are followed by the overall row when the report holds any item.
std::string render_report(const EvaluationReport& report, ReportFormat format,
                          MarkdownLayout layout = MarkdownLayout::Long);
std::string render_comparison(const ComparisonReport& report, ReportFormat format);

struct ReportRow {
    std::string group;
    std::size_t n_real = 0;
    std::size_t n_fake = 0;
    std::optional<double> real_acc;
    std::optional<double> fake_acc;
    std::optional<double> avg;
};

/// Reads the CSV written by render_report. Raises ErrorCode::Parse.
std::vector<ReportRow> parse_report_csv(std::string_view text);

/// Consistency problems in parsed rows: accuracies outside [0,1], avg
/// present without both classes, or avg off (real+fake)/2 by more than
/// the display rounding allows. Empty means consistent.
std::vector<std::string> check_report_rows(const std::vector<ReportRow>& rows);

} // namespace probeforge::eval
