#include "probeforge/cli/cli.hpp"

#include "probeforge/cctrend/trend.hpp"
#include "probeforge/cli/run_manifest.hpp"
#include "probeforge/core/codec.hpp"
#include "probeforge/core/logging.hpp"
#include "probeforge/core/parallel.hpp"
#include "probeforge/eval/evaluate.hpp"
#include "probeforge/eval/render.hpp"
#include "probeforge/preprocess/corpus.hpp"
#include "probeforge/probe/train.hpp"
#include "probeforge/store/manifest.hpp"
#include "probeforge/video/video.hpp"
#include "probeforge/zeroshot/alignment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace probeforge::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Parameter:
        return kExitUsage;
    case ErrorCode::Io:
    case ErrorCode::Transport:
    case ErrorCode::NotFound:
        return kExitIo;
    default:
        return kExitInvalid;
    }
}

namespace {

constexpr std::string_view kDefaultIndexHost = "https://index.commoncrawl.org";

// Values are kept as the strings CLI11 parsed so replay sees the same text.
json option_value(const CLI::Option* opt) {
    std::vector<std::string> values = opt->results();
    if (values.empty()) {
        const std::string def = opt->get_default_str();
        if (def.empty()) {
            return nullptr;
        }
        values.push_back(def);
    }
    if (opt->get_expected_max() > 1) {
        return values;
    }
    return values.back();
}

json options_json(const CLI::App& app) {
    json out = json::object();
    for (const CLI::Option* opt : app.get_options()) {
        if (!opt->get_configurable() || opt->get_lnames().empty()) {
            continue;
        }
        json v = option_value(opt);
        if (!v.is_null()) {
            out[opt->get_lnames().front()] = std::move(v);
        }
    }
    return out;
}

std::vector<std::string> to_inputs(const json& v) {
    if (v.is_string()) {
        return {v.get<std::string>()};
    }
    if (v.is_boolean()) {
        return {v.get<bool>() ? "true" : "false"};
    }
    if (v.is_array()) {
        std::vector<std::string> out;
        for (const auto& e : v) {
            auto part = to_inputs(e);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    if (v.is_null()) {
        return {};
    }
    return {v.dump()};
}

/// Reads a run manifest as a CLI11 config source. Explicit flags win
/// because CLI11 only fills options that were not given.
class RunManifestConfig final : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool, bool, std::string) const override {
        json j{{"global", options_json(*app)}};
        for (const CLI::App* sub : app->get_subcommands()) {
            j["subcommand"] = sub->get_name();
            j["config"] = options_json(*sub);
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        std::stringstream buffer;
        buffer << in.rdbuf();
        json j;
        try {
            j = json::parse(buffer.str());
        } catch (const json::exception& e) {
            throw CLI::ConversionError(std::string("run manifest: ") + e.what());
        }
        std::vector<CLI::ConfigItem> items;
        if (!j.is_object()) {
            throw CLI::ConversionError("run manifest must be a JSON object");
        }
        if (j.contains("global") && j["global"].is_object()) {
            for (const auto& [k, v] : j["global"].items()) {
                if (k == "config") {
                    continue;
                }
                items.push_back({{}, k, to_inputs(v)});
            }
        }
        const std::string sub = j.value("subcommand", std::string{});
        if (!sub.empty() && j.contains("config") && j["config"].is_object()) {
            for (const auto& [k, v] : j["config"].items()) {
                items.push_back({{sub}, k, to_inputs(v)});
            }
        }
        return items;
    }
};

struct Globals {
    std::string log_format = "human";
    std::string log_level = "info";
    std::optional<std::size_t> jobs;
    std::string run_manifest;
};

struct TrainArgs {
    std::string archive;
    std::string manifest;
    std::string out;
    std::string normalize = "auto";
    double threshold = 0.5;
    probe::TrainConfig cfg;
};

struct EvalArgs {
    std::string model;
    std::string archive;
    std::string manifest;
    std::string group_by = "generator";
    std::string format = "markdown";
    std::string layout = "auto";
    std::string dataset;
    std::string model_id;
    std::string out;
};

struct CompareArgs {
    std::string model;
    std::vector<std::string> archives;
    std::string manifest;
    std::string format = "markdown";
    std::string out;
};

struct PerturbArgs {
    std::string manifest;
    std::string source_root;
    std::vector<int> jpeg;
    std::vector<double> blur;
    std::string steps;
    std::string spec;
    std::string out;
};

struct ProbeTextArgs {
    std::string archive;
    std::string pool;
    std::size_t k = 5;
    std::string dataset;
    std::string format = "markdown";
    std::string out;
};

struct VideoArgs {
    std::string model;
    std::string archive;
    std::size_t max_frames = 8;
    std::string sampling = "contiguous_prefix";
    std::string out;
};

struct TrendArgs {
    std::string pattern;
    std::string from;
    std::string to;
    std::string mode = "exact";
    std::string index_host{kDefaultIndexHost};
    std::string collinfo_path = "/collinfo.json";
    std::string index_path = "/{snapshot}-index";
    int max_attempts = 5;
    double base_delay = 1.0;
    double min_interval = 1.0;
    std::size_t max_in_flight = 1;
    std::size_t lines_per_block = 3000;
    bool cache = true;
    std::string cache_dir;
    bool refresh = false;
    std::string out;
};

struct ValidateArgs {
    std::string manifest;
    std::string archive;
    std::string report;
    std::string pool;
    std::string root;
    bool check_files = true;
};

struct Context {
    Globals globals;
    std::ostream& out;
    std::ostream& err;
    RunManifest manifest;
    std::string manifest_target;  // where to write the run manifest, empty to skip
};

std::size_t pure_jobs(const Globals& g) {
    return g.jobs.value_or(default_jobs());
}

void emit(Context& ctx, const std::string& out_path, const std::string& text, const std::string& role) {
    if (out_path.empty()) {
        ctx.out << text;
        ctx.out.flush();
        return;
    }
    write_text_file(out_path, text);
    ctx.manifest.outputs.push_back(digest_path(role, out_path));
    if (ctx.manifest_target.empty()) {
        ctx.manifest_target = manifest_path_for(out_path, false).string();
    }
}

std::string stem_of(const std::string& path) {
    return fs::path(path).stem().string();
}

// ---------------------------------------------------------------- train

int run_train(Context& ctx, const TrainArgs& a) {
    probe::TrainOptions opts;
    opts.config = a.cfg;
    opts.threshold = a.threshold;
    if (a.normalize == "true") {
        opts.normalize_input = true;
    } else if (a.normalize == "false") {
        opts.normalize_input = false;
    } else if (a.normalize != "auto") {
        fail(ErrorCode::Parameter, "--normalize-input must be auto, true or false");
    }
    const auto archive = store::read_archive(a.archive);
    ctx.manifest.inputs.push_back(digest_path("archive", a.archive));
    probe::TrainResult result;
    if (!a.manifest.empty()) {
        const auto manifest = store::load_manifest(a.manifest);
        ctx.manifest.inputs.push_back(digest_path("manifest", a.manifest));
        result = probe::train(archive, manifest, opts);
    } else {
        result = probe::train(archive, opts);
    }
    probe::save_model(a.out, result.model);
    ctx.manifest.outputs.push_back(digest_path("model", a.out));
    ctx.manifest_target = manifest_path_for(a.out, false).string();
    ctx.manifest.results["train_log"] = result.log.to_json();
    ctx.manifest.results["train_log_digest"] = result.model.train_log_digest;
    log::info("trained probe", {{"examples", result.log.n_real + result.log.n_fake},
                                {"train_accuracy", result.log.train_accuracy},
                                {"final_loss", result.log.epoch_loss.back()},
                                {"model", a.out}});
    return kExitOk;
}

// ---------------------------------------------------------------- eval

eval::GroupBy parse_group_by(const std::string& s) {
    if (s == "generator") {
        return eval::GroupBy::Generator;
    }
    if (s == "none") {
        return eval::GroupBy::None;
    }
    fail(ErrorCode::Parameter, "--group-by must be generator or none");
}

int run_eval(Context& ctx, const EvalArgs& a) {
    const auto format = eval::parse_report_format(a.format);
    eval::EvalOptions opts;
    opts.group_by = parse_group_by(a.group_by);
    opts.jobs = pure_jobs(ctx.globals);
    opts.model_id = a.model_id.empty() ? stem_of(a.model) : a.model_id;
    eval::MarkdownLayout layout = opts.group_by == eval::GroupBy::Generator ? eval::MarkdownLayout::Wide
                                                                             : eval::MarkdownLayout::Long;
    if (a.layout == "long") {
        layout = eval::MarkdownLayout::Long;
    } else if (a.layout == "wide") {
        layout = eval::MarkdownLayout::Wide;
    } else if (a.layout != "auto") {
        fail(ErrorCode::Parameter, "--layout must be auto, long or wide");
    }

    const auto model = probe::load_model(a.model);
    const auto archive = store::read_archive(a.archive);
    ctx.manifest.inputs.push_back(digest_path("model", a.model));
    ctx.manifest.inputs.push_back(digest_path("archive", a.archive));
    eval::EvaluationReport report;
    if (!a.manifest.empty()) {
        const auto manifest = store::load_manifest(a.manifest);
        ctx.manifest.inputs.push_back(digest_path("manifest", a.manifest));
        opts.dataset = a.dataset.empty() ? manifest.name : a.dataset;
        report = eval::evaluate(model, archive, manifest, opts);
    } else {
        opts.dataset = a.dataset.empty() ? stem_of(a.archive) : a.dataset;
        report = eval::evaluate(model, archive, opts);
    }
    ctx.manifest.results["report"] = json::parse(eval::render_report(report, eval::ReportFormat::Json));
    emit(ctx, a.out, eval::render_report(report, format, layout), "report");
    return kExitOk;
}

// ---------------------------------------------------------------- compare

int run_compare(Context& ctx, const CompareArgs& a) {
    const auto format = eval::parse_report_format(a.format);
    const auto model = probe::load_model(a.model);
    ctx.manifest.inputs.push_back(digest_path("model", a.model));
    std::optional<store::DatasetManifest> manifest;
    if (!a.manifest.empty()) {
        manifest = store::load_manifest(a.manifest);
        ctx.manifest.inputs.push_back(digest_path("manifest", a.manifest));
    }
    std::vector<store::EmbeddingArchive> archives;
    std::vector<std::string> names;
    for (const std::string& spec : a.archives) {
        const auto eq = spec.find('=');
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        names.push_back(eq == std::string::npos ? stem_of(path) : spec.substr(0, eq));
        auto archive = store::read_archive(path);
        ctx.manifest.inputs.push_back(digest_path("archive", path));
        if (manifest) {
            archive = store::select_split(archive, *manifest, store::Split::Test);
        }
        archives.push_back(std::move(archive));
    }
    std::vector<eval::NamedArchive> named;
    for (std::size_t i = 0; i < archives.size(); ++i) {
        named.push_back({names[i], &archives[i]});
    }
    eval::EvalOptions opts;
    opts.group_by = eval::GroupBy::None;
    opts.jobs = pure_jobs(ctx.globals);
    opts.model_id = stem_of(a.model);
    const auto report = eval::compare_archives(model, named, opts);
    ctx.manifest.results["comparison"] = json::parse(eval::render_comparison(report, eval::ReportFormat::Json));
    emit(ctx, a.out, eval::render_comparison(report, format), "report");
    return kExitOk;
}

// ---------------------------------------------------------------- perturb

PerturbationSpec perturb_spec(const CLI::App& sub, const PerturbArgs& a) {
    const bool flags = !a.jpeg.empty() || !a.blur.empty();
    const int sources = (flags ? 1 : 0) + (a.steps.empty() ? 0 : 1) + (a.spec.empty() ? 0 : 1);
    if (sources > 1) {
        fail(ErrorCode::Parameter, "use one of --jpeg/--blur, --steps or --spec");
    }
    if (!a.spec.empty()) {
        json j;
        try {
            j = json::parse(read_text_file(a.spec));
        } catch (const json::exception& e) {
            fail(ErrorCode::Parse, "perturbation spec " + a.spec + ": " + e.what());
        }
        return j.get<PerturbationSpec>();
    }
    if (!a.steps.empty()) {
        return parse_perturbation_label(a.steps);
    }
    // Steps run in command-line order across both flags.
    PerturbationSpec spec;
    std::size_t next_jpeg = 0;
    std::size_t next_blur = 0;
    for (const CLI::Option* opt : sub.parse_order()) {
        if (opt->get_lnames().front() == "jpeg") {
            spec.steps.emplace_back(JpegStep{a.jpeg.at(next_jpeg++)});
        } else if (opt->get_lnames().front() == "blur") {
            spec.steps.emplace_back(BlurStep{a.blur.at(next_blur++)});
        }
    }
    spec.validate();
    return spec;
}

int run_perturb(Context& ctx, const CLI::App& sub, const PerturbArgs& a) {
    const PerturbationSpec spec = perturb_spec(sub, a);
    const auto manifest = store::load_manifest(a.manifest);
    const fs::path root = a.source_root.empty() ? manifest.root : fs::path(a.source_root);
    ctx.manifest.inputs.push_back(digest_path("manifest", a.manifest));
    // Record the resolved chain so replay does not depend on flag order.
    ctx.manifest.config.erase("jpeg");
    ctx.manifest.config.erase("blur");
    ctx.manifest.config.erase("spec");
    ctx.manifest.config["steps"] = spec.label();
    const auto derived = preprocess::emit_perturbed_corpus(manifest, root, spec, a.out, pure_jobs(ctx.globals));
    ctx.manifest.outputs.push_back(digest_path("corpus", a.out, {"run.json"}));
    ctx.manifest_target = manifest_path_for(a.out, true).string();
    ctx.manifest.results["images"] = derived.entries.size();
    ctx.manifest.results["perturbation"] = spec;
    log::info("wrote perturbed corpus", {{"images", derived.entries.size()}, {"spec", spec.label()}, {"out", a.out}});
    return kExitOk;
}

// ---------------------------------------------------------------- probe-text

int run_probe_text(Context& ctx, const ProbeTextArgs& a) {
    const auto archive = store::read_archive(a.archive);
    const auto pool = zeroshot::load_text_pool(a.pool);
    ctx.manifest.inputs.push_back(digest_path("archive", a.archive));
    ctx.manifest.inputs.push_back(digest_path("pool", a.pool));
    const auto result = zeroshot::aggregate_alignment(archive, pool, a.k,
                                                      a.dataset.empty() ? stem_of(a.archive) : a.dataset,
                                                      pure_jobs(ctx.globals));
    const std::string json_text = zeroshot::render_alignment_json(result);
    ctx.manifest.results["alignment"] = json::parse(json_text);
    std::string text;
    if (a.format == "json") {
        text = json_text;
    } else if (a.format == "markdown" || a.format == "md") {
        text = zeroshot::render_alignment_markdown(result);
    } else {
        fail(ErrorCode::Parameter, "--format must be markdown or json");
    }
    emit(ctx, a.out, text, "report");
    return kExitOk;
}

// ---------------------------------------------------------------- video

int run_video(Context& ctx, const VideoArgs& a) {
    video::VideoConfig cfg;
    cfg.max_frames = a.max_frames;
    cfg.sampling = video::parse_sampling(a.sampling);
    const auto model = probe::load_model(a.model);
    const auto frames = store::read_archive(a.archive);
    ctx.manifest.inputs.push_back(digest_path("model", a.model));
    ctx.manifest.inputs.push_back(digest_path("archive", a.archive));
    const auto rows = video::score_videos(model, frames, cfg, pure_jobs(ctx.globals));
    ctx.manifest.results["videos"] = rows.size();
    emit(ctx, a.out, video::render_video_csv(rows), "report");
    return kExitOk;
}

// ---------------------------------------------------------------- cc-trend

int run_trend(Context& ctx, const TrendArgs& a) {
    cctrend::TrendOptions opts;
    opts.pattern = a.pattern;
    opts.mode = cctrend::parse_count_mode(a.mode);
    if (!a.from.empty()) {
        opts.from_snapshot = a.from;
    }
    if (!a.to.empty()) {
        opts.to_snapshot = a.to;
    }
    // Network sections default to a single worker.
    opts.jobs = ctx.globals.jobs.value_or(1);

    cctrend::RetryPolicy retry;
    retry.max_attempts = a.max_attempts;
    retry.base_delay_s = a.base_delay;
    cctrend::PolitenessPolicy politeness;
    politeness.max_in_flight = a.max_in_flight;
    politeness.min_interval_s = a.min_interval;
    cctrend::IndexConfig index;
    index.host_key = a.index_host;
    index.collinfo_path = a.collinfo_path;
    index.index_path = a.index_path;
    index.lines_per_block = a.lines_per_block;
    index.refresh = a.refresh;

    std::optional<cctrend::DiskCache> cache;
    if (a.cache) {
        cache.emplace(a.cache_dir.empty() ? cctrend::DiskCache::default_dir() : fs::path(a.cache_dir));
    }
    cctrend::HttplibTransport transport(a.index_host);
    cctrend::CdxClient client(transport, retry, politeness, index, cache ? &*cache : nullptr);
    const auto rows = cctrend::trend(client, opts);

    std::size_t failed = 0;
    json errors = json::object();
    for (const auto& r : rows) {
        if (r.status == cctrend::CountStatus::Error) {
            ++failed;
            errors[r.snapshot_id] = r.error;
        }
    }
    ctx.manifest.results["pattern"] = a.pattern;
    ctx.manifest.results["snapshots"] = rows.size();
    ctx.manifest.results["failed"] = failed;
    ctx.manifest.results["errors"] = errors;
    ctx.manifest.results["network_calls"] = client.network_calls();
    ctx.manifest.results["retries"] = client.retries();
    emit(ctx, a.out, cctrend::render_trend_csv(rows), "series");
    log::info("trend complete", {{"snapshots", rows.size()},
                                 {"failed", failed},
                                 {"network_calls", client.network_calls()},
                                 {"retries", client.retries()}});
    return failed == 0 ? kExitOk : kExitIo;
}

// ---------------------------------------------------------------- validate

struct CheckOutcome {
    int code = kExitOk;
    json entries = json::array();
};

template <typename Fn>
void check(Context& ctx, CheckOutcome& outcome, const std::string& what, Fn&& fn) {
    std::string detail;
    try {
        detail = fn();
        ctx.out << "OK       " << what << (detail.empty() ? "" : ": " + detail) << '\n';
        outcome.entries.push_back({{"check", what}, {"ok", true}, {"detail", detail}});
    } catch (const Error& e) {
        ctx.out << "INVALID  " << what << ": " << e.what() << '\n';
        outcome.entries.push_back({{"check", what}, {"ok", false}, {"detail", e.what()}});
        const int code = exit_code_for(e.code()) == kExitIo ? kExitIo : kExitInvalid;
        outcome.code = std::max(outcome.code, code);
    }
}

int run_validate(Context& ctx, const ValidateArgs& a) {
    if (a.manifest.empty() && a.archive.empty() && a.report.empty() && a.pool.empty()) {
        fail(ErrorCode::Parameter, "validate needs at least one of --manifest, --archive, --report, --pool");
    }
    CheckOutcome outcome;
    std::optional<store::DatasetManifest> manifest;
    std::optional<store::EmbeddingArchive> archive;

    if (!a.manifest.empty()) {
        check(ctx, outcome, "manifest " + a.manifest, [&] {
            manifest = store::load_manifest(a.manifest);
            const fs::path root = a.root.empty() ? manifest->root : fs::path(a.root);
            const auto report = store::validate_manifest(*manifest, root, a.check_files);
            report.throw_if_invalid();
            std::ostringstream os;
            os << manifest->entries.size() << " entries, " << report.totals.real << " real / " << report.totals.fake
               << " fake, " << report.per_generator.size() << " generators";
            return os.str();
        });
    }
    if (!a.archive.empty()) {
        check(ctx, outcome, "archive " + a.archive, [&] {
            archive = store::read_archive(a.archive);
            return std::to_string(archive->count()) + " rows x " + std::to_string(archive->feature_dim) + " (" +
                   archive->backbone_id + (archive->normalized ? ", normalized)" : ")");
        });
    }
    if (manifest && archive) {
        check(ctx, outcome, "manifest/archive join", [&] {
            std::size_t joined = 0;
            for (auto split : {store::Split::Train, store::Split::Test}) {
                joined += store::select_split(*archive, *manifest, split).count();
            }
            return std::to_string(joined) + " manifest ids matched";
        });
    }
    if (!a.report.empty()) {
        check(ctx, outcome, "report " + a.report, [&] {
            const auto rows = eval::parse_report_csv(read_text_file(a.report));
            const auto problems = eval::check_report_rows(rows);
            if (!problems.empty()) {
                std::string joined;
                for (const auto& p : problems) {
                    joined += (joined.empty() ? "" : "; ") + p;
                }
                fail(ErrorCode::Integrity, joined);
            }
            return std::to_string(rows.size()) + " rows";
        });
    }
    if (!a.pool.empty()) {
        check(ctx, outcome, "text pool " + a.pool, [&] {
            const auto pool = zeroshot::load_text_pool(a.pool);
            if (archive) {
                if (pool.backbone_id != archive->backbone_id) {
                    fail(ErrorCode::Compatibility,
                         "pool backbone '" + pool.backbone_id + "' != archive '" + archive->backbone_id + "'");
                }
                if (pool.dim != archive->feature_dim) {
                    fail(ErrorCode::Dimension, "pool dim " + std::to_string(pool.dim) + " != archive dim " +
                                                   std::to_string(archive->feature_dim));
                }
            }
            return std::to_string(pool.entries.size()) + " texts, dim " + std::to_string(pool.dim);
        });
    }
    ctx.manifest.results["checks"] = outcome.entries;
    return outcome.code;
}

bool is_subcommand(const CLI::App& app, const std::string& arg) {
    for (const CLI::App* sub : app.get_subcommands({})) {
        if (sub->get_name() == arg) {
            return true;
        }
    }
    return false;
}

// A run manifest names its subcommand, so `--config run.json` alone replays it.
std::vector<std::string> with_replayed_subcommand(const CLI::App& app, std::vector<std::string> args) {
    std::string config;
    bool has_sub = false;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        } else if (is_subcommand(app, args[i])) {
            has_sub = true;
        }
    }
    if (config.empty() || has_sub) {
        return args;
    }
    std::ifstream in(config);
    if (!in) {
        return args;
    }
    try {
        std::stringstream buffer;
        buffer << in.rdbuf();
        const json j = json::parse(buffer.str());
        const std::string sub = j.value("subcommand", std::string{});
        if (is_subcommand(app, sub)) {
            args.push_back(sub);
        }
    } catch (const json::exception&) {
        // CLI11 reports the malformed file when it loads it.
    }
    return args;
}

} // namespace

int run(const std::vector<std::string>& input_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Linear-probe forensics toolkit over frozen vision-backbone embeddings", "probeforge"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();
    app.config_formatter(std::make_shared<RunManifestConfig>());
    app.set_config("--config", "", "Replay a run manifest (explicit flags take precedence)");

    Globals g;
    app.add_option("--log-format", g.log_format, "human or json")->capture_default_str();
    app.add_option("--log-level", g.log_level, "debug, info, warn or error")->capture_default_str();
    app.add_option("--jobs", g.jobs, "Worker threads (default: all cores; 1 for network)")->check(CLI::PositiveNumber);
    app.add_option("--run-manifest", g.run_manifest, "Where to write the run manifest");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Fit a linear probe on an archive's train split");
    train->add_option("--archive", ta.archive, "Embedding archive")->required();
    train->add_option("--manifest", ta.manifest, "Dataset manifest (uses its train split)");
    train->add_option("--out", ta.out, "Model JSON to write")->required();
    train->add_option("--seed", ta.cfg.seed, "Shuffle seed")->capture_default_str();
    train->add_option("--lr", ta.cfg.learning_rate, "Learning rate")->capture_default_str();
    train->add_option("--batch-size", ta.cfg.batch_size, "Batch size")->capture_default_str();
    train->add_option("--epochs", ta.cfg.epochs, "Epochs")->capture_default_str();
    train->add_option("--weight-decay", ta.cfg.weight_decay, "Decoupled weight decay")->capture_default_str();
    train->add_option("--beta1", ta.cfg.beta1, "AdamW beta1")->capture_default_str();
    train->add_option("--beta2", ta.cfg.beta2, "AdamW beta2")->capture_default_str();
    train->add_option("--epsilon", ta.cfg.epsilon, "AdamW epsilon")->capture_default_str();
    train->add_option("--shuffle", ta.cfg.shuffle, "Shuffle each epoch")->capture_default_str();
    train->add_option("--normalize-input", ta.normalize, "auto (archive flag), true or false")->capture_default_str();
    train->add_option("--threshold", ta.threshold, "Decision threshold on the score")->capture_default_str();

    EvalArgs ea;
    auto* evalc = app.add_subcommand("eval", "Score an archive and report per-class accuracy");
    evalc->add_option("--model", ea.model, "Model JSON")->required();
    evalc->add_option("--archive", ea.archive, "Embedding archive")->required();
    evalc->add_option("--manifest", ea.manifest, "Dataset manifest (uses its test split)");
    evalc->add_option("--group-by", ea.group_by, "generator or none")->capture_default_str();
    evalc->add_option("--format", ea.format, "markdown, csv or json")->capture_default_str();
    evalc->add_option("--layout", ea.layout, "Markdown layout: auto, long or wide")->capture_default_str();
    evalc->add_option("--dataset", ea.dataset, "Dataset name in the report");
    evalc->add_option("--model-id", ea.model_id, "Model name in the report");
    evalc->add_option("--out", ea.out, "Report file (default: stdout)");

    CompareArgs ca;
    auto* compare = app.add_subcommand("compare", "Evaluate one model against several archives");
    compare->add_option("--model", ca.model, "Model JSON")->required();
    compare->add_option("--archive", ca.archives, "Archive as PATH or NAME=PATH; repeat, first is the baseline")
        ->required();
    compare->add_option("--manifest", ca.manifest, "Dataset manifest (uses its test split)");
    compare->add_option("--format", ca.format, "markdown, csv or json")->capture_default_str();
    compare->add_option("--out", ca.out, "Report file (default: stdout)");

    PerturbArgs pa;
    auto* perturb = app.add_subcommand("perturb", "Write a perturbed copy of a manifest's images");
    perturb->add_option("--manifest", pa.manifest, "Dataset manifest")->required();
    perturb->add_option("--source-root", pa.source_root, "Image root (default: manifest directory)");
    perturb->add_option("--jpeg", pa.jpeg, "JPEG quality step; repeatable, applied in order")
        ->configurable(false)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    perturb->add_option("--blur", pa.blur, "Gaussian blur sigma step; repeatable, applied in order")
        ->configurable(false)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    perturb->add_option("--steps", pa.steps, "Step chain such as jpeg75+blur1.5");
    perturb->add_option("--spec", pa.spec, "Perturbation spec JSON file")->configurable(false);
    perturb->add_option("--out", pa.out, "Output directory")->required();

    ProbeTextArgs pt;
    auto* probe_text = app.add_subcommand("probe-text", "Rank a text pool against image embeddings");
    probe_text->add_option("--archive", pt.archive, "Embedding archive")->required();
    probe_text->add_option("--pool", pt.pool, "Embedded text pool JSON")->required();
    probe_text->add_option("--k", pt.k, "Ranked slots to report")->capture_default_str()->check(CLI::PositiveNumber);
    probe_text->add_option("--dataset", pt.dataset, "Dataset name in the report");
    probe_text->add_option("--format", pt.format, "markdown or json")->capture_default_str();
    probe_text->add_option("--out", pt.out, "Report file (default: stdout)");

    VideoArgs va;
    auto* videoc = app.add_subcommand("video", "Aggregate frame logits into video decisions");
    videoc->add_option("--model", va.model, "Model JSON")->required();
    videoc->add_option("--archive", va.archive, "Frame archive with ids videoid#NNNN")->required();
    videoc->add_option("--max-frames", va.max_frames, "Frames per video")->capture_default_str()->check(
        CLI::PositiveNumber);
    videoc->add_option("--sampling", va.sampling, "contiguous_prefix or uniform")->capture_default_str();
    videoc->add_option("--out", va.out, "CSV file (default: stdout)");

    TrendArgs tr;
    auto* trend = app.add_subcommand("cc-trend", "Count index records per crawl snapshot");
    trend->add_option("--pattern", tr.pattern, "URL pattern, e.g. civitai.com/*")->required();
    trend->add_option("--from", tr.from, "First snapshot (CC-MAIN-YYYY-WW)");
    trend->add_option("--to", tr.to, "Last snapshot (CC-MAIN-YYYY-WW)");
    trend->add_option("--mode", tr.mode, "exact or pages")->capture_default_str();
    trend->add_option("--index-host", tr.index_host, "Index base URL")->capture_default_str();
    trend->add_option("--collinfo-path", tr.collinfo_path, "Collection list path")->capture_default_str();
    trend->add_option("--index-path", tr.index_path, "Index path template")->capture_default_str();
    trend->add_option("--max-attempts", tr.max_attempts, "Attempts per request")->capture_default_str();
    trend->add_option("--base-delay", tr.base_delay, "First backoff delay (s)")->capture_default_str();
    trend->add_option("--min-interval", tr.min_interval, "Delay floor between requests (s)")->capture_default_str();
    trend->add_option("--max-in-flight", tr.max_in_flight, "Concurrent requests to the host")->capture_default_str();
    trend->add_option("--lines-per-block", tr.lines_per_block, "Index lines per block (pages mode)")
        ->capture_default_str();
    trend->add_option("--cache", tr.cache, "Use the response cache")->capture_default_str();
    trend->add_option("--cache-dir", tr.cache_dir, "Cache directory (default: $PROBEFORGE_CACHE_DIR)");
    trend->add_option("--refresh", tr.refresh, "Ignore cached results")->capture_default_str();
    trend->add_option("--out", tr.out, "CSV file (default: stdout)");

    ValidateArgs vl;
    auto* validate = app.add_subcommand("validate", "Check manifests, archives, reports and text pools");
    validate->add_option("--manifest", vl.manifest, "Dataset manifest");
    validate->add_option("--archive", vl.archive, "Embedding archive");
    validate->add_option("--report", vl.report, "Report CSV");
    validate->add_option("--pool", vl.pool, "Embedded text pool JSON");
    validate->add_option("--root", vl.root, "Image root (default: manifest directory)");
    validate->add_option("--check-files", vl.check_files, "Require every image to exist")->capture_default_str();

    const std::vector<std::string> args = with_replayed_subcommand(app, input_args);
    std::vector<const char*> argv{"probeforge"};
    for (const auto& s : args) {
        argv.push_back(s.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n\n";
        const CLI::App* target = &app;
        for (const CLI::App* sub : app.get_subcommands()) {
            target = sub;
        }
        err << target->help();
        return kExitUsage;
    }

    try {
        const auto format = g.log_format == "json"    ? log::Format::Json
                            : g.log_format == "human" ? log::Format::Human
                                                      : (fail(ErrorCode::Parameter, "--log-format must be human or json"),
                                                         log::Format::Human);
        log::configure(format, log::parse_level(g.log_level));

        Context ctx{g, out, err, {}, {}};
        CLI::App* sub = app.get_subcommands().front();
        ctx.manifest.subcommand = sub->get_name();
        ctx.manifest.global = options_json(app);
        ctx.manifest.global.erase("config");
        ctx.manifest.global.erase("run-manifest");
        ctx.manifest.config = options_json(*sub);

        int code = kExitOk;
        if (sub == train) {
            code = run_train(ctx, ta);
        } else if (sub == evalc) {
            code = run_eval(ctx, ea);
        } else if (sub == compare) {
            code = run_compare(ctx, ca);
        } else if (sub == perturb) {
            code = run_perturb(ctx, *perturb, pa);
        } else if (sub == probe_text) {
            code = run_probe_text(ctx, pt);
        } else if (sub == videoc) {
            code = run_video(ctx, va);
        } else if (sub == trend) {
            code = run_trend(ctx, tr);
        } else if (sub == validate) {
            code = run_validate(ctx, vl);
        }
        ctx.manifest.results["exit_code"] = code;
        const std::string target = g.run_manifest.empty() ? ctx.manifest_target : g.run_manifest;
        if (!target.empty()) {
            write_run_manifest(target, ctx.manifest);
        }
        return code;
    } catch (const Error& e) {
        err << "probeforge: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "probeforge: " << e.what() << '\n';
        return kExitInvalid;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args, std::cout, std::cerr);
}

} // namespace probeforge::cli
