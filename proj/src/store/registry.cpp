#include "probeforge/store/registry.hpp"

#include "probeforge/core/error.hpp"

#include <array>

namespace probeforge::store {

namespace {

using enum BackboneKind;

constexpr std::array kRegistry{
    BackboneInfo{"metaclip-h14-2.5b", "metaclip-h14", "MetaCLIP-Linear", "MetaCLIP-H/14-2.5B", 1280, 224,
                 "MetaCLIP 400M", VisionLanguage},
    BackboneInfo{"metaclip2-worldwide-giant", "metaclip2-giant", "MetaCLIP2-Linear", "MetaCLIP-2 Worldwide Giant",
                 1664, 224, "Common Crawl (Curated)", VisionLanguage},
    BackboneInfo{"siglip-large16-384", "siglip-large16", "SigLIP-Linear", "SigLIP-Large/16", 1024, 384, "WebLI",
                 VisionLanguage},
    BackboneInfo{"siglip2-giant16-384", "siglip2-giant16", "SigLIP2-Linear", "SigLIP-2 Giant/16", 1536, 384, "WebLI",
                 VisionLanguage},
    BackboneInfo{"pe-core-l14-336", "pe-core-l14", "PE-CLIP-Linear", "PE-Core-L/14", 1024, 336,
                 "MetaCLIP Images + 22M Videos", VisionLanguage},
    BackboneInfo{"dinov2-giant", "dinov2-giant", "DINOv2-Linear", "DINOv2-giant", 1536, 224, "LVD-142M",
                 SelfSupervised},
    BackboneInfo{"dinov3-vit7b16", "dinov3-vit7b16", "DINOv3-Linear", "DINOv3-ViT-7B/16", 1664, 224, "LVD-1689M",
                 SelfSupervised},
    // Same architecture, satellite-only pretraining; the counterfactual archive.
    BackboneInfo{"dinov3-vit7b16-sat493m", "dinov3-vit7b16", "DINOv3-Sat-Linear", "DINOv3-ViT-7B/16 (Sat-493M)", 1664,
                 224, "Sat-493M", SelfSupervised},
};

} // namespace

std::span<const BackboneInfo> backbone_registry() noexcept { return kRegistry; }

std::optional<BackboneInfo> find_backbone(std::string_view id) noexcept {
    for (const auto& info : kRegistry) {
        if (info.id == id) {
            return info;
        }
    }
    return std::nullopt;
}

void check_registry_dim(std::string_view id, long long feature_dim) {
    if (const auto info = find_backbone(id); info && info->feature_dim != feature_dim) {
        fail(ErrorCode::Registry, "backbone '" + std::string(id) + "' has feature_dim " +
                                      std::to_string(info->feature_dim) + ", archive declares " +
                                      std::to_string(feature_dim));
    }
}

std::string backbone_family(std::string_view id) {
    if (const auto info = find_backbone(id)) {
        return std::string(info->family);
    }
    return std::string(id);
}

} // namespace probeforge::store
