#include "probeforge/probe/adamw.hpp"

#include "probeforge/core/error.hpp"

#include <cmath>
#include <string>

namespace probeforge::probe {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) {
        fail(ErrorCode::Parameter, "learning_rate must be > 0");
    }
    if (batch_size == 0 || epochs == 0) {
        fail(ErrorCode::Parameter, "batch_size and epochs must be positive");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        fail(ErrorCode::Parameter, "beta1 and beta2 must lie in (0, 1)");
    }
    if (!(epsilon > 0.0)) {
        fail(ErrorCode::Parameter, "epsilon must be > 0");
    }
    if (!(weight_decay >= 0.0)) {
        fail(ErrorCode::Parameter, "weight_decay must be >= 0");
    }
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
    j = nlohmann::json{{"learning_rate", cfg.learning_rate}, {"batch_size", cfg.batch_size},
                       {"epochs", cfg.epochs},               {"weight_decay", cfg.weight_decay},
                       {"beta1", cfg.beta1},                 {"beta2", cfg.beta2},
                       {"epsilon", cfg.epsilon},             {"seed", cfg.seed},
                       {"shuffle", cfg.shuffle}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
    TrainConfig d;
    cfg.learning_rate = j.value("learning_rate", d.learning_rate);
    cfg.batch_size = j.value("batch_size", d.batch_size);
    cfg.epochs = j.value("epochs", d.epochs);
    cfg.weight_decay = j.value("weight_decay", d.weight_decay);
    cfg.beta1 = j.value("beta1", d.beta1);
    cfg.beta2 = j.value("beta2", d.beta2);
    cfg.epsilon = j.value("epsilon", d.epsilon);
    cfg.seed = j.value("seed", d.seed);
    cfg.shuffle = j.value("shuffle", d.shuffle);
}

void adamw_step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
                const TrainConfig& cfg, std::size_t decay_count) {
    const std::size_t n = params.size();
    if (grads.size() != n) {
        fail(ErrorCode::Dimension, "adamw: " + std::to_string(n) + " params but " + std::to_string(grads.size()) +
                                       " grads");
    }
    if (state.m.empty() && state.v.empty()) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    }
    if (state.m.size() != n || state.v.size() != n) {
        fail(ErrorCode::Dimension, "adamw: optimizer state does not match parameter count");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(grads[i])) {
            fail(ErrorCode::Numeric, "adamw: non-finite gradient at index " + std::to_string(i));
        }
    }

    const std::uint64_t t = state.step + 1;
    const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        const double decay = i < decay_count ? cfg.weight_decay * params[i] : 0.0;
        params[i] -= cfg.learning_rate * (m_hat / (std::sqrt(v_hat) + cfg.epsilon) + decay);
    }
    state.step = t;
}

} // namespace probeforge::probe
