#pragma once

#include "probeforge/core/perturbation.hpp"
#include "probeforge/probe/model.hpp"
#include "probeforge/store/archive.hpp"
#include "probeforge/store/manifest.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace probeforge::eval {

enum class GroupBy { Generator, None };

/// Class-conditional accuracies for one group. An accuracy is absent when
/// its class has no items; avg is present only when both are.
struct GroupResult {
    std::string group;
    std::size_t n_real = 0;
    std::size_t n_fake = 0;
    std::size_t correct_real = 0;
    std::size_t correct_fake = 0;
    std::optional<double> real_acc;
    std::optional<double> fake_acc;
    std::optional<double> avg;

    std::size_t total() const noexcept { return n_real + n_fake; }
    bool operator==(const GroupResult&) const = default;
};

/// Builds a GroupResult from confusion tallies.
GroupResult make_group(std::string group, std::size_t n_real, std::size_t correct_real, std::size_t n_fake,
                       std::size_t correct_fake);

struct EvaluationReport {
    std::string model_id;
    std::string dataset;
    std::vector<GroupResult> groups;  ///< sorted by group name
    GroupResult overall;              ///< group "all"
    std::optional<PerturbationSpec> perturbation;
};

struct EvalOptions {
    GroupBy group_by = GroupBy::Generator;
    std::string model_id;
    std::string dataset;
    std::size_t jobs = 1;
};

/// Tallies predicted labels against truth. `labels` must be 0 or 1.
EvaluationReport summarize(std::span<const int> labels, std::span<const store::Label> predicted,
                           std::span<const std::string> groups, const EvalOptions& options);

/// Scores every archive row. Backbone mismatch raises ErrorCode::Compatibility.
/// The archive's perturbation record is copied into the report.
EvaluationReport evaluate(const probe::ProbeModel& model, const store::EmbeddingArchive& archive,
                          const EvalOptions& options);

/// Evaluates the manifest's test split.
EvaluationReport evaluate(const probe::ProbeModel& model, const store::EmbeddingArchive& archive,
                          const store::DatasetManifest& manifest, const EvalOptions& options);

struct NamedArchive {
    std::string name;
    const store::EmbeddingArchive* archive = nullptr;
};

struct ComparisonRow {
    std::string name;
    EvaluationReport report;
    std::optional<double> delta_real;  ///< vs. the first row's overall result
    std::optional<double> delta_fake;
    std::optional<double> delta_avg;
};

struct ComparisonReport {
    std::string model_id;
    std::vector<ComparisonRow> rows;
};

/// Evaluates one model against several archives. Archives may come from a
/// different backbone of the same family; the feature dim must match.
ComparisonReport compare_archives(const probe::ProbeModel& model, std::span<const NamedArchive> archives,
                                  const EvalOptions& options);

} // namespace probeforge::eval
