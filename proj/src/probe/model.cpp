#include "probeforge/probe/model.hpp"

#include "probeforge/core/codec.hpp"
#include "probeforge/core/error.hpp"
#include "probeforge/core/parallel.hpp"
#include "probeforge/store/registry.hpp"

#include <cmath>

#include <json.hpp>

namespace probeforge::probe {

using nlohmann::json;

void ProbeModel::validate() const {
    if (feature_dim == 0) {
        fail(ErrorCode::Dimension, "model feature_dim must be positive");
    }
    if (weights.size() != feature_dim) {
        fail(ErrorCode::Dimension, "model has " + std::to_string(weights.size()) + " weights for feature_dim " +
                                       std::to_string(feature_dim));
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        fail(ErrorCode::Parameter, "threshold must lie in (0, 1)");
    }
}

double sigmoid(double z) noexcept {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

store::Label decide(double score, double threshold) noexcept {
    return score > threshold ? store::Label::Fake : store::Label::Real;
}

double logit(const ProbeModel& model, std::span<const float> x) {
    if (x.size() != model.weights.size()) {
        fail(ErrorCode::Dimension, "input has dim " + std::to_string(x.size()) + ", model expects " +
                                       std::to_string(model.weights.size()));
    }
    double scale = 1.0;
    if (model.normalize_input) {
        double sq = 0.0;
        for (float v : x) {
            sq += static_cast<double>(v) * v;
        }
        if (sq > 0.0) {
            scale = 1.0 / std::sqrt(sq);
        }
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += static_cast<double>(model.weights[i]) * x[i];
    }
    return acc * scale + model.bias;
}

Prediction predict(const ProbeModel& model, std::span<const float> x) {
    Prediction p;
    p.logit = logit(model, x);
    p.score = sigmoid(p.logit);
    p.label = decide(p.score, model.threshold);
    return p;
}

std::vector<double> score_archive(const ProbeModel& model, const store::EmbeddingArchive& archive,
                                  std::size_t jobs) {
    if (archive.feature_dim != model.feature_dim) {
        fail(ErrorCode::Dimension, "archive dim " + std::to_string(archive.feature_dim) + " != model dim " +
                                       std::to_string(model.feature_dim));
    }
    std::vector<double> out(archive.count());
    parallel_for(out.size(), jobs, [&](std::size_t i) { out[i] = logit(model, archive.row(i)); });
    return out;
}

void check_compatible(const ProbeModel& model, const store::EmbeddingArchive& archive) {
    if (archive.backbone_id != model.backbone_id) {
        fail(ErrorCode::Compatibility,
             "model trained on '" + model.backbone_id + "' but archive is '" + archive.backbone_id + "'");
    }
    if (archive.feature_dim != model.feature_dim) {
        fail(ErrorCode::Dimension, "archive dim " + std::to_string(archive.feature_dim) + " != model dim " +
                                       std::to_string(model.feature_dim));
    }
}

std::string serialize_model(const ProbeModel& model) {
    model.validate();
    json j{{"format_version", kModelFormatVersion},
           {"backbone_id", model.backbone_id},
           {"feature_dim", model.feature_dim},
           {"normalize_input", model.normalize_input},
           {"threshold", model.threshold},
           {"bias", model.bias},
           {"weights_b64_f32le", encode_f32_base64(model.weights)},
           {"train_log_digest", model.train_log_digest}};
    return j.dump(2) + "\n";
}

ProbeModel parse_model(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("model file: ") + e.what());
    }
    if (!j.is_object() || !j.contains("format_version")) {
        fail(ErrorCode::Parse, "model file: missing format_version");
    }
    ProbeModel m;
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            fail(ErrorCode::Compatibility, "model format_version " + std::to_string(version) + " is not supported");
        }
        m.backbone_id = j.at("backbone_id").get<std::string>();
        m.feature_dim = j.at("feature_dim").get<std::size_t>();
        m.normalize_input = j.at("normalize_input").get<bool>();
        m.threshold = j.at("threshold").get<double>();
        m.bias = j.at("bias").get<float>();
        m.train_log_digest = j.value("train_log_digest", std::string{});
        m.weights = decode_f32_base64(j.at("weights_b64_f32le").get<std::string>());
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("model file: ") + e.what());
    }
    m.validate();
    return m;
}

void save_model(const std::filesystem::path& path, const ProbeModel& model) {
    write_text_file(path, serialize_model(model));
}

ProbeModel load_model(const std::filesystem::path& path) {
    return parse_model(read_text_file(path));
}

} // namespace probeforge::probe
