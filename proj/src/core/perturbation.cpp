#include "probeforge/core/perturbation.hpp"

#include "probeforge/core/error.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace probeforge {

namespace {

void check_step(const PerturbationStep& step) {
    if (const auto* jpeg = std::get_if<JpegStep>(&step)) {
        if (jpeg->quality < 1 || jpeg->quality > 100) {
            fail(ErrorCode::Parameter, "jpeg quality " + std::to_string(jpeg->quality) + " outside [1, 100]");
        }
    } else {
        const double sigma = std::get<BlurStep>(step).sigma;
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            fail(ErrorCode::Parameter, "blur sigma must be a positive finite number");
        }
    }
}

} // namespace

void PerturbationSpec::validate() const {
    for (const auto& step : steps) {
        check_step(step);
    }
}

std::string PerturbationSpec::label() const {
    if (steps.empty()) {
        return "none";
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i > 0) {
            os << '+';
        }
        if (const auto* jpeg = std::get_if<JpegStep>(&steps[i])) {
            os << "jpeg" << jpeg->quality;
        } else {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, std::get<BlurStep>(steps[i]).sigma);
            os << "blur" << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
    }
    return os.str();
}

void to_json(nlohmann::json& j, const PerturbationSpec& spec) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : spec.steps) {
        if (const auto* jpeg = std::get_if<JpegStep>(&step)) {
            steps.push_back({{"kind", "jpeg"}, {"jpeg_quality", jpeg->quality}});
        } else {
            steps.push_back({{"kind", "blur"}, {"blur_sigma", std::get<BlurStep>(step).sigma}});
        }
    }
    j = nlohmann::json{{"steps", std::move(steps)}};
}

void from_json(const nlohmann::json& j, PerturbationSpec& spec) {
    spec.steps.clear();
    if (!j.is_object() || !j.contains("steps") || !j.at("steps").is_array()) {
        fail(ErrorCode::Parse, "perturbation spec must be an object with a 'steps' array");
    }
    for (const auto& s : j.at("steps")) {
        const std::string kind = s.value("kind", "");
        if (kind == "jpeg") {
            if (!s.contains("jpeg_quality") || s.contains("blur_sigma")) {
                fail(ErrorCode::Parse, "jpeg step needs jpeg_quality and no blur_sigma");
            }
            spec.steps.emplace_back(JpegStep{s.at("jpeg_quality").get<int>()});
        } else if (kind == "blur") {
            if (!s.contains("blur_sigma") || s.contains("jpeg_quality")) {
                fail(ErrorCode::Parse, "blur step needs blur_sigma and no jpeg_quality");
            }
            spec.steps.emplace_back(BlurStep{s.at("blur_sigma").get<double>()});
        } else {
            fail(ErrorCode::Parse, "unknown perturbation kind '" + kind + "'");
        }
    }
    spec.validate();
}

PerturbationSpec parse_perturbation_label(std::string_view text) {
    PerturbationSpec spec;
    if (text == "none" || text.empty()) {
        return spec;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('+', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const std::string_view token = text.substr(pos, end - pos);
        const auto parse_number = [&](std::string_view digits, auto& value) {
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
            if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
                fail(ErrorCode::Parameter, "bad perturbation step '" + std::string(token) + "'");
            }
        };
        if (token.substr(0, 4) == "jpeg") {
            int quality = 0;
            parse_number(token.substr(4), quality);
            spec.steps.emplace_back(JpegStep{quality});
        } else if (token.substr(0, 4) == "blur") {
            double sigma = 0.0;
            parse_number(token.substr(4), sigma);
            spec.steps.emplace_back(BlurStep{sigma});
        } else {
            fail(ErrorCode::Parameter, "bad perturbation step '" + std::string(token) + "'");
        }
        pos = end + 1;
    }
    spec.validate();
    return spec;
}

} // namespace probeforge
