#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace probeforge::store {

enum class BackboneKind { VisionLanguage, SelfSupervised };

struct BackboneInfo {
    std::string_view id;
    std::string_view family;       ///< architecture family; archives of one family are comparable
    std::string_view detector;     ///< name of the linear-probe detector built on it
    std::string_view model;        ///< upstream checkpoint name
    int feature_dim;
    int input_size;                ///< square input resolution in pixels
    std::string_view training_data;
    BackboneKind kind;

    bool has_text_tower() const noexcept { return kind == BackboneKind::VisionLanguage; }
};

/// Known frozen backbones. Unknown ids are allowed elsewhere but skip the
/// feature-dimension check.
std::span<const BackboneInfo> backbone_registry() noexcept;
std::optional<BackboneInfo> find_backbone(std::string_view id) noexcept;

/// Throws ErrorCode::Registry when `id` is known and `feature_dim` disagrees.
void check_registry_dim(std::string_view id, long long feature_dim);

/// Family of a backbone id; unknown ids are their own family.
std::string backbone_family(std::string_view id);

} // namespace probeforge::store
