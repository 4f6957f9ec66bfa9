#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

namespace probeforge::probe {

/// Linear-probe training recipe. lr/batch/epochs follow the published
/// probe recipe; the AdamW moments, epsilon and decay are the usual defaults.
struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 128;
    std::size_t epochs = 2;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    bool shuffle = true;

    /// Throws ErrorCode::Parameter when a field is out of range.
    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

/// Adam moments over all parameters (weights followed by bias).
struct OptimizerState {
    std::uint64_t step = 0;
    std::vector<double> m;
    std::vector<double> v;
};

/// One AdamW update in place:
///   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2,
///   p -= lr (m_hat / (sqrt(v_hat) + eps) + wd p)
/// with bias-corrected moments. Decoupled decay applies to the first
/// `decay_count` parameters only (the bias is last and is not decayed).
/// Empty moment vectors are zero-initialised. Non-finite gradients raise
/// ErrorCode::Numeric naming the index.
void adamw_step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
                const TrainConfig& cfg, std::size_t decay_count);

} // namespace probeforge::probe
