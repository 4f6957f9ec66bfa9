#include "probeforge/eval/evaluate.hpp"
#include "probeforge/eval/render.hpp"
#include "probeforge/probe/train.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace probeforge;
using namespace probeforge::eval;
using pftest::error_of;

namespace {

// Eight items over two generators with hand-set logits on a 1-D model
// whose weight is 1: the feature value is the logit.
struct Fixture {
    store::EmbeddingArchive archive;
    probe::ProbeModel model;
};

Fixture tiny_fixture() {
    const std::vector<store::ArchiveRecord> records{
        {"r1", 0, "real", {-2.0F}}, {"r2", 0, "real", {-0.5F}}, {"r3", 0, "real", {1.0F}},
        {"r4", 0, "real", {0.0F}},  {"a1", 1, "adm", {3.0F}},   {"a2", 1, "adm", {-1.0F}},
        {"b1", 1, "biggan", {0.2F}}, {"b2", 1, "biggan", {4.0F}}};
    store::ArchiveMeta meta;
    meta.backbone_id = "tiny";
    Fixture f{store::build_archive(records, meta), {}};
    f.model.backbone_id = "tiny";
    f.model.feature_dim = 1;
    f.model.weights = {1.0F};
    return f;
}

} // namespace

TEST_CASE("hand-counted confusion tallies") {
    const auto f = tiny_fixture();
    EvalOptions opt;
    opt.dataset = "tiny";
    const auto report = evaluate(f.model, f.archive, opt);
    CHECK(report.model_id == "tiny-linear");
    // Real: r1, r2, r4 (logit 0 is a tie, classified real) correct, r3 wrong.
    // Fake: a1, b1, b2 correct, a2 wrong.
    REQUIRE(report.groups.size() == 3);
    CHECK(report.groups[0].group == "adm");
    CHECK(report.groups[0] == make_group("adm", 0, 0, 2, 1));
    CHECK_FALSE(report.groups[0].real_acc.has_value());
    CHECK(*report.groups[0].fake_acc == 0.5);
    CHECK_FALSE(report.groups[0].avg.has_value());
    CHECK(report.groups[1] == make_group("biggan", 0, 0, 2, 2));
    CHECK(report.groups[2] == make_group("real", 4, 3, 0, 0));
    CHECK(report.overall.group == "all");
    CHECK(report.overall.n_real == 4);
    CHECK(report.overall.correct_real == 3);
    CHECK(report.overall.n_fake == 4);
    CHECK(report.overall.correct_fake == 3);
    CHECK(*report.overall.avg == 0.75);

    opt.group_by = GroupBy::None;
    CHECK(evaluate(f.model, f.archive, opt).groups.empty());
}

TEST_CASE("make_group identities") {
    const auto g = make_group("x", 10, 10, 10, 10);
    CHECK(*g.real_acc == 1.0);
    CHECK(*g.fake_acc == 1.0);
    CHECK(*g.avg == 1.0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t nr = rng() % 50 + 1;
        const std::size_t nf = rng() % 50 + 1;
        const auto r = make_group("g", nr, rng() % (nr + 1), nf, rng() % (nf + 1));
        CHECK(std::abs(*r.avg - (*r.real_acc + *r.fake_acc) / 2.0) <= 1e-9);
        CHECK(*r.real_acc >= 0.0);
        CHECK(*r.fake_acc <= 1.0);
    }
    const auto none = make_group("empty", 0, 0, 0, 0);
    CHECK_FALSE(none.real_acc.has_value());
    CHECK_FALSE(none.avg.has_value());
}

TEST_CASE("evaluation is invariant under row permutation") {
    const auto archive = pftest::two_clusters(40, 3, 0.5, 1.0, 17);
    const auto model = probe::train(archive, probe::TrainOptions{}).model;
    std::vector<std::size_t> order(archive.count());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::mt19937_64 rng(3);
    std::shuffle(order.begin(), order.end(), rng);
    const auto shuffled = store::subset(archive, order);
    EvalOptions opt;
    const auto a = evaluate(model, archive, opt);
    opt.jobs = 3;
    const auto b = evaluate(model, shuffled, opt);
    CHECK(a.groups == b.groups);
    CHECK(a.overall == b.overall);
    CHECK(render_report(a, ReportFormat::Csv) == render_report(b, ReportFormat::Csv));
}

TEST_CASE("evaluation errors") {
    const auto f = tiny_fixture();
    auto other = f.model;
    other.backbone_id = "different";
    CHECK(error_of([&] { evaluate(other, f.archive, EvalOptions{}); }) == ErrorCode::Compatibility);
    const std::vector<int> labels{0, 2};
    const std::vector<store::Label> predicted{store::Label::Real, store::Label::Real};
    const std::vector<std::string> groups{"a", "b"};
    CHECK(error_of([&] { summarize(labels, predicted, groups, EvalOptions{}); }) == ErrorCode::Input);
}

TEST_CASE("evaluation on the manifest test split carries the perturbation") {
    auto f = tiny_fixture();
    f.archive.preprocessing.perturbation = PerturbationSpec{{JpegStep{75}}};
    const auto manifest = store::parse_manifest("id,relative_path,label,generator,split\n"
                                                "r1,r1.png,real,,test\n"
                                                "a2,a2.png,fake,adm,test\n"
                                                "b1,b1.png,fake,biggan,train\n");
    const auto report = evaluate(f.model, f.archive, manifest, EvalOptions{});
    CHECK(report.overall.total() == 2);
    CHECK(*report.overall.avg == 0.5);
    REQUIRE(report.perturbation.has_value());
    CHECK(report.perturbation->label() == "jpeg75");
    CHECK(render_report(report, ReportFormat::Json).find("jpeg") != std::string::npos);
}

TEST_CASE("three-decimal formatting rounds ties to even") {
    CHECK(format_fixed3(0.9135) == "0.914");
    CHECK(format_fixed3(0.9125) == "0.912");
    CHECK(format_fixed3((0.933 + 0.895) / 2.0) == "0.914");
    CHECK(format_fixed3((0.970 + 0.948) / 2.0) == "0.959");
    CHECK(format_fixed3(0.0005) == "0.000");
    CHECK(format_fixed3(0.0015) == "0.002");
    CHECK(format_fixed3(0.91351) == "0.914");
    CHECK(format_fixed3(0.91249) == "0.912");
    CHECK(format_fixed3(1.0) == "1.000");
    CHECK(format_fixed3(0.0) == "0.000");
    CHECK(format_fixed3(-0.0004) == "0.000");
    CHECK(format_fixed3(-0.0125) == "-0.012");
    CHECK(format_fixed3(std::optional<double>{}, "-") == "-");
    // Exhaustive: every k/2000 tie lands on the even neighbour.
    for (int k = 1; k < 2000; k += 2) {
        const double v = k / 2000.0;
        const int lower = k / 2;
        const int expect = lower % 2 == 0 ? lower : lower + 1;
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.3f", expect / 1000.0);
        CHECK(format_fixed3(v) == buf);
    }
}

TEST_CASE("markdown rendering") {
    const auto f = tiny_fixture();
    EvalOptions opt;
    opt.model_id = "probe";
    const auto report = evaluate(f.model, f.archive, opt);
    const std::string long_md = render_report(report, ReportFormat::Markdown);
    CHECK(long_md == "| group | Real | Fake | Avg |\n"
                     "|---|---:|---:|---:|\n"
                     "| adm | - | 0.500 | - |\n"
                     "| biggan | - | 1.000 | - |\n"
                     "| real | 0.750 | - | - |\n"
                     "| all | 0.750 | 0.750 | 0.750 |\n");

    EvaluationReport empty;
    empty.overall = make_group("all", 0, 0, 0, 0);
    CHECK(render_report(empty, ReportFormat::Markdown) == "| group | Real | Fake | Avg |\n|---|---:|---:|---:|\n");
    CHECK(render_report(empty, ReportFormat::Csv) == std::string(kReportCsvHeader) + "\n");

    EvaluationReport wide;
    wide.model_id = "DINOv3-Linear";
    wide.groups = {make_group("Chameleon", 1000, 933, 1000, 895), make_group("SynthBuster", 1000, 990, 1000, 950)};
    wide.overall = make_group("all", 2000, 1923, 2000, 1845);
    const std::string wmd = render_report(wide, ReportFormat::Markdown, MarkdownLayout::Wide);
    CHECK(wmd == "| model | Chameleon | SynthBuster | Avg |\n"
                 "|---|---:|---:|---:|\n"
                 "| DINOv3-Linear | 0.914 | 0.970 | 0.942 |\n");
}

TEST_CASE("csv renders and parses back") {
    EvaluationReport r;
    r.groups = {make_group("sd \"1.4\", v2", 3, 2, 5, 5), make_group("only-fake", 0, 0, 4, 1)};
    r.overall = make_group("all", 3, 2, 9, 6);
    const std::string csv = render_report(r, ReportFormat::Csv);
    const auto rows = parse_report_csv(csv);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].group == "sd \"1.4\", v2");
    CHECK(rows[0].n_fake == 5);
    CHECK(*rows[0].avg == doctest::Approx(0.833));
    CHECK_FALSE(rows[1].real_acc.has_value());
    CHECK_FALSE(rows[1].avg.has_value());
    CHECK(rows[2].group == "all");
    CHECK(check_report_rows(rows).empty());

    auto broken = rows;
    broken[0].avg = 0.5;
    CHECK(check_report_rows(broken).size() == 1);
    broken = rows;
    broken[1].avg = 0.25;
    CHECK_FALSE(check_report_rows(broken).empty());
    broken = rows;
    broken[2].real_acc = 1.5;
    CHECK_FALSE(check_report_rows(broken).empty());

    CHECK(error_of([] { parse_report_csv(""); }) == ErrorCode::Parse);
    CHECK(error_of([] { parse_report_csv("group,x\n"); }) == ErrorCode::Parse);
    CHECK(error_of([] { parse_report_csv(std::string(kReportCsvHeader) + "\na,1,2,0.5\n"); }) == ErrorCode::Parse);
    CHECK(error_of([] { parse_report_csv(std::string(kReportCsvHeader) + "\na,x,2,0.5,0.5,0.5\n"); }) ==
          ErrorCode::Parse);
    CHECK(error_of([] { parse_report_csv(std::string(kReportCsvHeader) + "\na,1,1,abc,0.5,0.5\n"); }) ==
          ErrorCode::Parse);
    CHECK(parse_report_format("md") == ReportFormat::Markdown);
    CHECK(error_of([] { parse_report_format("html"); }) == ErrorCode::Parameter);
}

TEST_CASE("json report schema") {
    const auto f = tiny_fixture();
    const auto j = nlohmann::json::parse(render_report(evaluate(f.model, f.archive, EvalOptions{}), ReportFormat::Json));
    for (const char* key : {"model_id", "dataset", "groups", "overall", "perturbation"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["groups"][0]["real_acc"].is_null());
    CHECK(j["overall"]["avg"] == 0.75);
}

TEST_CASE("archive comparison") {
    const auto base = pftest::two_clusters(200, 4, 3.0, 1.0, 1);
    const auto model = probe::train(base, probe::TrainOptions{}).model;
    const auto same = base;
    const std::vector<NamedArchive> pair{{"web", &base}, {"copy", &same}};
    const auto cmp = compare_archives(model, pair, EvalOptions{});
    REQUIRE(cmp.rows.size() == 2);
    CHECK(*cmp.rows[1].delta_real == 0.0);
    CHECK(*cmp.rows[1].delta_fake == 0.0);
    CHECK(*cmp.rows[1].delta_avg == 0.0);

    // Fake rows drawn from the real cluster: the probe calls them real.
    auto collapsed = pftest::two_clusters(200, 4, 3.0, 1.0, 2);
    for (std::size_t i = 0; i < collapsed.count(); ++i) {
        if (collapsed.labels[i] == 1) {
            collapsed.rows[i * 4] = -std::abs(collapsed.rows[i * 4]) - 1.0F;
        }
    }
    const auto shifted = pftest::two_clusters(200, 4, 1.0, 1.0, 3);
    const std::vector<NamedArchive> three{{"web", &base}, {"sat", &collapsed}, {"near", &shifted}};
    const auto cmp3 = compare_archives(model, three, EvalOptions{});
    REQUIRE(cmp3.rows.size() == 3);
    CHECK(*cmp3.rows[1].report.overall.fake_acc <= 0.15);
    CHECK(*cmp3.rows[1].report.overall.real_acc >= 0.9);
    CHECK(*cmp3.rows[1].delta_fake < -0.8);
    CHECK(*cmp3.rows[2].delta_avg == doctest::Approx(*cmp3.rows[2].report.overall.avg - *cmp3.rows[0].report.overall.avg));

    const std::string csv = render_comparison(cmp3, ReportFormat::Csv);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(render_comparison(cmp3, ReportFormat::Markdown).find("| sat |") != std::string::npos);
    CHECK(nlohmann::json::parse(render_comparison(cmp3, ReportFormat::Json))["rows"].size() == 3);

    const auto narrow = pftest::two_clusters(5, 3, 1.0, 1.0, 5, "synthetic");
    const std::vector<NamedArchive> bad_dim{{"web", &base}, {"narrow", &narrow}};
    CHECK(error_of([&] { compare_archives(model, bad_dim, EvalOptions{}); }) == ErrorCode::Dimension);
}

TEST_CASE("comparison accepts archives of the same backbone family") {
    const auto web = pftest::two_clusters(20, 1664, 3.0, 0.01, 1, "dinov3-vit7b16");
    const auto sat = pftest::two_clusters(20, 1664, 3.0, 0.01, 2, "dinov3-vit7b16-sat493m");
    const auto foreign = pftest::two_clusters(20, 1664, 3.0, 0.01, 3, "metaclip2-worldwide-giant");
    const auto model = probe::train(web, probe::TrainOptions{}).model;
    const std::vector<NamedArchive> family{{"web", &web}, {"sat", &sat}};
    const auto cmp = compare_archives(model, family, EvalOptions{});
    REQUIRE(cmp.rows.size() == 2);
    CHECK(cmp.rows[1].report.overall.total() == 40);
    CHECK(error_of([&] { evaluate(model, sat, EvalOptions{}); }) == ErrorCode::Compatibility);
    const std::vector<NamedArchive> bad_family{{"web", &web}, {"foreign", &foreign}};
    CHECK(error_of([&] { compare_archives(model, bad_family, EvalOptions{}); }) == ErrorCode::Compatibility);
}
