#pragma once

#include "probeforge/core/perturbation.hpp"
#include "probeforge/preprocess/image.hpp"
#include "probeforge/store/manifest.hpp"

#include <filesystem>

namespace probeforge::preprocess {

/// Applies each step in order. JPEG steps need 8-bit data, so float input
/// is quantized first; the result is always 8-bit.
ImageBuffer apply_perturbations(const ImageBuffer& image, const PerturbationSpec& spec);

/// Mirrors the manifest's image tree under `out_dir` with every image
/// perturbed and stored as lossless PNG (`<relative_path stem>.png`), and
/// writes `manifest.csv` (same ids, new paths) plus `perturbation.json`.
/// Returns the derived manifest rooted at `out_dir`.
store::DatasetManifest emit_perturbed_corpus(const store::DatasetManifest& manifest,
                                             const std::filesystem::path& source_root, const PerturbationSpec& spec,
                                             const std::filesystem::path& out_dir, std::size_t jobs);

} // namespace probeforge::preprocess
