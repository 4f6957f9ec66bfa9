#pragma once

#include <json.hpp>

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace probeforge {

struct JpegStep {
    int quality = 95; ///< [1, 100]
    bool operator==(const JpegStep&) const = default;
};

struct BlurStep {
    double sigma = 1.0; ///< > 0
    bool operator==(const BlurStep&) const = default;
};

using PerturbationStep = std::variant<JpegStep, BlurStep>;

/// Ordered chain of pixel-domain degradations applied to 8-bit images
/// before standardization.
struct PerturbationSpec {
    std::vector<PerturbationStep> steps;

    bool empty() const noexcept { return steps.empty(); }
    /// Throws ErrorCode::Parameter when a quality or sigma is out of range.
    void validate() const;
    /// Short human label, e.g. "jpeg75+blur1.5".
    std::string label() const;

    bool operator==(const PerturbationSpec&) const = default;
};

void to_json(nlohmann::json& j, const PerturbationSpec& spec);
void from_json(const nlohmann::json& j, PerturbationSpec& spec);

/// Inverse of PerturbationSpec::label(). Raises ErrorCode::Parameter.
PerturbationSpec parse_perturbation_label(std::string_view text);

} // namespace probeforge
