#pragma once

#include "probeforge/probe/adamw.hpp"
#include "probeforge/probe/model.hpp"
#include "probeforge/store/archive.hpp"
#include "probeforge/store/manifest.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace probeforge::probe {

/// Row-major view of n x dim features with an optional per-row scale.
struct FeatureView {
    std::span<const float> data;
    std::size_t dim = 0;
    std::span<const double> row_scale;  ///< empty means 1 for every row

    std::size_t rows() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
    double at(std::size_t r, std::size_t c) const noexcept {
        const double s = row_scale.empty() ? 1.0 : row_scale[r];
        return static_cast<double>(data[r * dim + c]) * s;
    }
};

/// Mean binary cross-entropy of sigmoid(w.x + b) over `rows`, with
/// params = w followed by b. When `grad` is non-empty it receives dL/dparams.
double bce_loss(std::span<const double> params, const FeatureView& x, std::span<const int> labels,
                std::span<const std::size_t> rows, std::span<double> grad = {});

/// Unbiased draw in [0, n) by rejection on a 64-bit engine.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

/// In-place Fisher-Yates shuffle.
void shuffle_indices(std::span<std::size_t> indices, std::mt19937_64& rng);

struct TrainLog {
    TrainConfig config;
    std::string backbone_id;
    std::size_t feature_dim = 0;
    std::size_t n_real = 0;
    std::size_t n_fake = 0;
    std::size_t steps = 0;
    bool normalize_input = false;
    std::vector<double> epoch_loss;  ///< full-data mean BCE after each epoch
    double train_accuracy = 0.0;

    nlohmann::json to_json() const;
    /// sha256 over the canonical JSON form.
    std::string digest() const;
};

struct TrainResult {
    ProbeModel model;
    TrainLog log;
};

struct TrainOptions {
    TrainConfig config;
    /// Defaults to the archive's `normalized` flag.
    std::optional<bool> normalize_input;
    double threshold = 0.5;
};

/// Fits the probe on every row of `archive` (labels must be 0 or 1).
/// Zero-initialised parameters, constant learning rate, the last partial
/// batch is kept. A single-class set raises ErrorCode::Degeneracy.
TrainResult train(const store::EmbeddingArchive& archive, const TrainOptions& options);

/// Trains on the manifest's train split joined against the archive.
TrainResult train(const store::EmbeddingArchive& archive, const store::DatasetManifest& manifest,
                  const TrainOptions& options);

} // namespace probeforge::probe
