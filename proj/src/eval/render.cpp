#include "probeforge/eval/render.hpp"

#include "probeforge/core/error.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace probeforge::eval {

using nlohmann::json;

ReportFormat parse_report_format(std::string_view text) {
    if (text == "markdown" || text == "md") {
        return ReportFormat::Markdown;
    }
    if (text == "csv") {
        return ReportFormat::Csv;
    }
    if (text == "json") {
        return ReportFormat::Json;
    }
    fail(ErrorCode::Parameter, "unknown report format '" + std::string(text) + "'");
}

std::string format_fixed3(double value) {
    if (!std::isfinite(value)) {
        return value != value ? "nan" : (value > 0 ? "inf" : "-inf");
    }
    const bool negative = value < 0.0;
    const double scaled = std::fabs(value) * 1000.0;
    const double floor = std::floor(scaled);
    const double frac = scaled - floor;
    double units = 0.0;
    if (std::fabs(frac - 0.5) <= 1e-9 * std::max(1.0, scaled)) {
        units = std::fmod(floor, 2.0) == 0.0 ? floor : floor + 1.0;
    } else {
        units = std::round(scaled);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%.3f", negative && units != 0.0 ? "-" : "", units / 1000.0);
    return buf;
}

std::string format_fixed3(const std::optional<double>& value, std::string_view absent) {
    return value ? format_fixed3(*value) : std::string(absent);
}

namespace {

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json group_json(const GroupResult& g) {
    return {{"group", g.group},
            {"n_real", g.n_real},
            {"n_fake", g.n_fake},
            {"real_acc", optional_json(g.real_acc)},
            {"fake_acc", optional_json(g.fake_acc)},
            {"avg", optional_json(g.avg)}};
}

json report_json(const EvaluationReport& r) {
    json groups = json::array();
    for (const auto& g : r.groups) {
        groups.push_back(group_json(g));
    }
    json perturbation = nullptr;
    if (r.perturbation) {
        perturbation = *r.perturbation;
    }
    return {{"model_id", r.model_id},
            {"dataset", r.dataset},
            {"groups", groups},
            {"overall", group_json(r.overall)},
            {"perturbation", perturbation}};
}

std::vector<const GroupResult*> display_rows(const EvaluationReport& r) {
    std::vector<const GroupResult*> rows;
    for (const auto& g : r.groups) {
        rows.push_back(&g);
    }
    if (r.overall.total() > 0) {
        rows.push_back(&r.overall);
    }
    return rows;
}

std::string csv_cell(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

std::string md_cell(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') {
            out += '\\';
        }
        out += c;
    }
    return out;
}

std::string render_markdown_long(const EvaluationReport& r) {
    std::ostringstream os;
    os << "| group | Real | Fake | Avg |\n|---|---:|---:|---:|\n";
    for (const GroupResult* g : display_rows(r)) {
        os << "| " << md_cell(g->group) << " | " << format_fixed3(g->real_acc, "-") << " | "
           << format_fixed3(g->fake_acc, "-") << " | " << format_fixed3(g->avg, "-") << " |\n";
    }
    return os.str();
}

std::string render_markdown_wide(const EvaluationReport& r) {
    std::ostringstream head;
    std::ostringstream rule;
    std::ostringstream body;
    head << "| model |";
    rule << "|---|";
    body << "| " << md_cell(r.model_id) << " |";
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& g : r.groups) {
        head << ' ' << md_cell(g.group) << " |";
        rule << "---:|";
        body << ' ' << format_fixed3(g.avg, "-") << " |";
        if (g.avg) {
            sum += *g.avg;
            ++n;
        }
    }
    std::optional<double> macro;
    if (n > 0) {
        macro = sum / static_cast<double>(n);
    } else if (r.groups.empty()) {
        macro = r.overall.avg;
    }
    head << " Avg |\n";
    rule << "---:|\n";
    body << ' ' << format_fixed3(macro, "-") << " |\n";
    return head.str() + rule.str() + body.str();
}

} // namespace

std::string render_report(const EvaluationReport& report, ReportFormat format, MarkdownLayout layout) {
    switch (format) {
    case ReportFormat::Json:
        return report_json(report).dump(2) + "\n";
    case ReportFormat::Csv: {
        std::string out(kReportCsvHeader);
        out += '\n';
        for (const GroupResult* g : display_rows(report)) {
            out += csv_cell(g->group) + ',' + std::to_string(g->n_real) + ',' + std::to_string(g->n_fake) + ',' +
                   format_fixed3(g->real_acc) + ',' + format_fixed3(g->fake_acc) + ',' + format_fixed3(g->avg) +
                   '\n';
        }
        return out;
    }
    case ReportFormat::Markdown:
        return layout == MarkdownLayout::Wide ? render_markdown_wide(report) : render_markdown_long(report);
    }
    return {};
}

std::string render_comparison(const ComparisonReport& report, ReportFormat format) {
    switch (format) {
    case ReportFormat::Json: {
        json rows = json::array();
        for (const auto& row : report.rows) {
            rows.push_back({{"name", row.name},
                            {"report", report_json(row.report)},
                            {"delta_real", optional_json(row.delta_real)},
                            {"delta_fake", optional_json(row.delta_fake)},
                            {"delta_avg", optional_json(row.delta_avg)}});
        }
        return json{{"model_id", report.model_id}, {"rows", rows}}.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
        std::string out = "archive,n_real,n_fake,real_acc,fake_acc,avg,delta_real,delta_fake,delta_avg\n";
        for (const auto& row : report.rows) {
            const GroupResult& g = row.report.overall;
            out += csv_cell(row.name) + ',' + std::to_string(g.n_real) + ',' + std::to_string(g.n_fake) + ',' +
                   format_fixed3(g.real_acc) + ',' + format_fixed3(g.fake_acc) + ',' + format_fixed3(g.avg) + ',' +
                   format_fixed3(row.delta_real) + ',' + format_fixed3(row.delta_fake) + ',' +
                   format_fixed3(row.delta_avg) + '\n';
        }
        return out;
    }
    case ReportFormat::Markdown: {
        std::ostringstream os;
        os << "| archive | Real | Fake | Avg | dReal | dFake | dAvg |\n|---|---:|---:|---:|---:|---:|---:|\n";
        for (const auto& row : report.rows) {
            const GroupResult& g = row.report.overall;
            os << "| " << md_cell(row.name) << " | " << format_fixed3(g.real_acc, "-") << " | "
               << format_fixed3(g.fake_acc, "-") << " | " << format_fixed3(g.avg, "-") << " | "
               << format_fixed3(row.delta_real, "-") << " | " << format_fixed3(row.delta_fake, "-") << " | "
               << format_fixed3(row.delta_avg, "-") << " |\n";
        }
        return os.str();
    }
    }
    return {};
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    fields.back() += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    if (quoted) {
        fail(ErrorCode::Parse, "report line " + std::to_string(line_no) + ": unterminated quote");
    }
    return fields;
}

std::optional<double> parse_acc(const std::string& s, std::size_t line_no) {
    if (s.empty()) {
        return std::nullopt;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size()) {
        fail(ErrorCode::Parse, "report line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

std::size_t parse_count(const std::string& s, std::size_t line_no) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        fail(ErrorCode::Parse, "report line " + std::to_string(line_no) + ": bad count '" + s + "'");
    }
    return static_cast<std::size_t>(std::stoull(s));
}

} // namespace

std::vector<ReportRow> parse_report_csv(std::string_view text) {
    std::vector<ReportRow> rows;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        if (!header_seen) {
            if (line != kReportCsvHeader) {
                fail(ErrorCode::Parse, "report line 1: expected header '" + std::string(kReportCsvHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        auto f = split_csv_line(line, line_no);
        if (f.size() != 6) {
            fail(ErrorCode::Parse, "report line " + std::to_string(line_no) + ": expected 6 fields, got " +
                                       std::to_string(f.size()));
        }
        rows.push_back({f[0], parse_count(f[1], line_no), parse_count(f[2], line_no), parse_acc(f[3], line_no),
                        parse_acc(f[4], line_no), parse_acc(f[5], line_no)});
    }
    if (!header_seen) {
        fail(ErrorCode::Parse, "report is empty");
    }
    return rows;
}

std::vector<std::string> check_report_rows(const std::vector<ReportRow>& rows) {
    std::vector<std::string> problems;
    for (const auto& r : rows) {
        for (const auto& v : {r.real_acc, r.fake_acc, r.avg}) {
            if (v && !(*v >= 0.0 && *v <= 1.0)) {
                problems.push_back(r.group + ": accuracy " + format_fixed3(*v) + " outside [0,1]");
            }
        }
        if ((r.real_acc.has_value() != (r.n_real > 0)) || (r.fake_acc.has_value() != (r.n_fake > 0))) {
            problems.push_back(r.group + ": accuracy presence does not match class counts");
        }
        if (r.avg && !(r.real_acc && r.fake_acc)) {
            problems.push_back(r.group + ": avg present without both class accuracies");
        }
        if (r.avg && r.real_acc && r.fake_acc) {
            // Cells are rounded to 3 decimals, so allow one display unit.
            const double expected = (*r.real_acc + *r.fake_acc) / 2.0;
            if (std::fabs(*r.avg - expected) > 0.001 + 1e-9) {
                problems.push_back(r.group + ": avg " + format_fixed3(*r.avg) + " != (real+fake)/2 = " +
                                   format_fixed3(expected));
            }
        }
    }
    return problems;
}

} // namespace probeforge::eval
