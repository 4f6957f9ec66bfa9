#include "probeforge/probe/train.hpp"

#include "probeforge/core/codec.hpp"
#include "probeforge/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace probeforge::probe {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) noexcept {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

} // namespace

double bce_loss(std::span<const double> params, const FeatureView& x, std::span<const int> labels,
                std::span<const std::size_t> rows, std::span<double> grad) {
    const std::size_t d = x.dim;
    if (params.size() != d + 1) {
        fail(ErrorCode::Dimension, "bce: expected " + std::to_string(d + 1) + " params");
    }
    if (!grad.empty() && grad.size() != params.size()) {
        fail(ErrorCode::Dimension, "bce: gradient buffer has the wrong length");
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    if (rows.empty()) {
        return 0.0;
    }
    double loss = 0.0;
    for (std::size_t r : rows) {
        double z = params[d];
        for (std::size_t c = 0; c < d; ++c) {
            z += params[c] * x.at(r, c);
        }
        const double y = labels[r];
        // -[y log s + (1-y) log(1-s)] = softplus(z) - y z
        loss += softplus(z) - y * z;
        if (!grad.empty()) {
            const double residual = sigmoid(z) - y;
            for (std::size_t c = 0; c < d; ++c) {
                grad[c] += residual * x.at(r, c);
            }
            grad[d] += residual;
        }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& g : grad) {
        g *= inv;
    }
    return loss * inv;
}

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) {
        fail(ErrorCode::Parameter, "uniform_index: empty range");
    }
    const std::uint64_t floor = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= floor) {
            return r % n;
        }
    }
}

void shuffle_indices(std::span<std::size_t> indices, std::mt19937_64& rng) {
    for (std::size_t i = indices.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(indices[i - 1], indices[j]);
    }
}

nlohmann::json TrainLog::to_json() const {
    nlohmann::json cfg;
    probe::to_json(cfg, config);
    return {{"config", cfg},
            {"backbone_id", backbone_id},
            {"feature_dim", feature_dim},
            {"n_real", n_real},
            {"n_fake", n_fake},
            {"steps", steps},
            {"normalize_input", normalize_input},
            {"epoch_loss", epoch_loss},
            {"train_accuracy", train_accuracy}};
}

std::string TrainLog::digest() const {
    return sha256_hex(std::string_view(to_json().dump()));
}

TrainResult train(const store::EmbeddingArchive& archive, const TrainOptions& options) {
    const TrainConfig& cfg = options.config;
    cfg.validate();
    if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
        fail(ErrorCode::Parameter, "threshold must lie in (0, 1)");
    }
    const std::size_t d = archive.feature_dim;
    const std::size_t n = archive.count();
    if (d == 0) {
        fail(ErrorCode::Dimension, "archive feature_dim must be positive");
    }
    if (archive.rows.size() != n * d) {
        fail(ErrorCode::Dimension, "archive payload does not match count x feature_dim");
    }

    TrainLog log;
    log.config = cfg;
    log.backbone_id = archive.backbone_id;
    log.feature_dim = d;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = archive.labels[i];
        if (y == store::kLabelReal) {
            ++log.n_real;
        } else if (y == store::kLabelFake) {
            ++log.n_fake;
        } else {
            fail(ErrorCode::Input, "row '" + archive.ids[i] + "' has no real/fake label");
        }
    }
    if (log.n_real == 0 || log.n_fake == 0) {
        fail(ErrorCode::Degeneracy, "training set needs both classes (real=" + std::to_string(log.n_real) +
                                        ", fake=" + std::to_string(log.n_fake) + ")");
    }

    const bool normalize = options.normalize_input.value_or(archive.normalized);
    log.normalize_input = normalize;
    std::vector<double> scale;
    if (normalize) {
        scale.resize(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            double sq = 0.0;
            for (float v : archive.row(i)) {
                sq += static_cast<double>(v) * v;
            }
            if (sq > 0.0) {
                scale[i] = 1.0 / std::sqrt(sq);
            }
        }
    }
    const FeatureView view{archive.rows, d, scale};

    std::vector<double> params(d + 1, 0.0);
    std::vector<double> grad(d + 1, 0.0);
    OptimizerState state;
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::span<const std::size_t> all(order);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            shuffle_indices(order, rng);
        }
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, n - start);
            bce_loss(params, view, archive.labels, all.subspan(start, len), grad);
            adamw_step(params, grad, state, cfg, d);
            ++log.steps;
        }
        std::vector<std::size_t> every(n);
        std::iota(every.begin(), every.end(), std::size_t{0});
        log.epoch_loss.push_back(bce_loss(params, view, archive.labels, every));
    }

    TrainResult result;
    ProbeModel& model = result.model;
    model.backbone_id = archive.backbone_id;
    model.feature_dim = d;
    model.normalize_input = normalize;
    model.threshold = options.threshold;
    model.weights.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
        model.weights[c] = static_cast<float>(params[c]);
    }
    model.bias = static_cast<float>(params[d]);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto label = predict(model, archive.row(i)).label;
        correct += static_cast<int>(label) == archive.labels[i] ? 1 : 0;
    }
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    model.train_log_digest = log.digest();
    result.log = std::move(log);
    return result;
}

TrainResult train(const store::EmbeddingArchive& archive, const store::DatasetManifest& manifest,
                  const TrainOptions& options) {
    return train(store::select_split(archive, manifest, store::Split::Train), options);
}

} // namespace probeforge::probe
