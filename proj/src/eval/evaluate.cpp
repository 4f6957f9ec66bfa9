#include "probeforge/eval/evaluate.hpp"

#include "probeforge/core/error.hpp"
#include "probeforge/store/registry.hpp"

#include <map>

namespace probeforge::eval {

GroupResult make_group(std::string group, std::size_t n_real, std::size_t correct_real, std::size_t n_fake,
                       std::size_t correct_fake) {
    GroupResult g;
    g.group = std::move(group);
    g.n_real = n_real;
    g.n_fake = n_fake;
    g.correct_real = correct_real;
    g.correct_fake = correct_fake;
    if (n_real > 0) {
        g.real_acc = static_cast<double>(correct_real) / static_cast<double>(n_real);
    }
    if (n_fake > 0) {
        g.fake_acc = static_cast<double>(correct_fake) / static_cast<double>(n_fake);
    }
    if (g.real_acc && g.fake_acc) {
        g.avg = (*g.real_acc + *g.fake_acc) / 2.0;
    }
    return g;
}

namespace {

struct Tally {
    std::size_t n_real = 0;
    std::size_t n_fake = 0;
    std::size_t correct_real = 0;
    std::size_t correct_fake = 0;

    void add(int truth, store::Label predicted) {
        const bool hit = static_cast<int>(predicted) == truth;
        if (truth == store::kLabelReal) {
            ++n_real;
            correct_real += hit ? 1 : 0;
        } else {
            ++n_fake;
            correct_fake += hit ? 1 : 0;
        }
    }
    GroupResult result(std::string name) const {
        return make_group(std::move(name), n_real, correct_real, n_fake, correct_fake);
    }
};

std::string default_model_id(const probe::ProbeModel& model, const EvalOptions& options) {
    return options.model_id.empty() ? model.backbone_id + "-linear" : options.model_id;
}

} // namespace

EvaluationReport summarize(std::span<const int> labels, std::span<const store::Label> predicted,
                           std::span<const std::string> groups, const EvalOptions& options) {
    if (labels.size() != predicted.size() || (options.group_by == GroupBy::Generator && groups.size() != labels.size())) {
        fail(ErrorCode::Dimension, "summarize: labels, predictions and groups differ in length");
    }
    Tally overall;
    std::map<std::string, Tally> per_group;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != store::kLabelReal && labels[i] != store::kLabelFake) {
            fail(ErrorCode::Input, "evaluation row " + std::to_string(i) + " has no real/fake label");
        }
        overall.add(labels[i], predicted[i]);
        if (options.group_by == GroupBy::Generator) {
            per_group[groups[i]].add(labels[i], predicted[i]);
        }
    }
    EvaluationReport report;
    report.model_id = options.model_id;
    report.dataset = options.dataset;
    for (const auto& [name, tally] : per_group) {
        report.groups.push_back(tally.result(name));
    }
    report.overall = overall.result("all");
    return report;
}

EvaluationReport evaluate(const probe::ProbeModel& model, const store::EmbeddingArchive& archive,
                          const EvalOptions& options) {
    probe::check_compatible(model, archive);
    const auto logits = probe::score_archive(model, archive, options.jobs);
    std::vector<store::Label> predicted(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        predicted[i] = probe::decide(probe::sigmoid(logits[i]), model.threshold);
    }
    EvalOptions opts = options;
    opts.model_id = default_model_id(model, options);
    EvaluationReport report = summarize(archive.labels, predicted, archive.groups, opts);
    report.perturbation = archive.preprocessing.perturbation;
    return report;
}

EvaluationReport evaluate(const probe::ProbeModel& model, const store::EmbeddingArchive& archive,
                          const store::DatasetManifest& manifest, const EvalOptions& options) {
    probe::check_compatible(model, archive);
    return evaluate(model, store::select_split(archive, manifest, store::Split::Test), options);
}

ComparisonReport compare_archives(const probe::ProbeModel& model, std::span<const NamedArchive> archives,
                                  const EvalOptions& options) {
    if (archives.empty()) {
        fail(ErrorCode::Input, "compare needs at least one archive");
    }
    ComparisonReport out;
    out.model_id = default_model_id(model, options);
    const std::string family = store::backbone_family(model.backbone_id);
    for (const NamedArchive& named : archives) {
        const store::EmbeddingArchive& a = *named.archive;
        if (a.feature_dim != model.feature_dim) {
            fail(ErrorCode::Dimension, "archive '" + named.name + "' has dim " + std::to_string(a.feature_dim) +
                                           ", model expects " + std::to_string(model.feature_dim));
        }
        if (store::backbone_family(a.backbone_id) != family) {
            fail(ErrorCode::Compatibility, "archive '" + named.name + "' comes from backbone '" + a.backbone_id +
                                               "', outside the model's family '" + family + "'");
        }
        // Same family, so compare against the archive under the model's weights.
        probe::ProbeModel view = model;
        view.backbone_id = a.backbone_id;
        EvalOptions opts = options;
        opts.model_id = out.model_id;
        if (opts.dataset.empty()) {
            opts.dataset = named.name;
        }
        ComparisonRow row{named.name, evaluate(view, a, opts), {}, {}, {}};
        out.rows.push_back(std::move(row));
    }
    const GroupResult& base = out.rows.front().report.overall;
    auto delta = [](const std::optional<double>& x, const std::optional<double>& ref) -> std::optional<double> {
        if (x && ref) {
            return *x - *ref;
        }
        return std::nullopt;
    };
    for (ComparisonRow& row : out.rows) {
        const GroupResult& g = row.report.overall;
        row.delta_real = delta(g.real_acc, base.real_acc);
        row.delta_fake = delta(g.fake_acc, base.fake_acc);
        row.delta_avg = delta(g.avg, base.avg);
    }
    return out;
}

} // namespace probeforge::eval
