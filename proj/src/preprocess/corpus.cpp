#include "probeforge/preprocess/corpus.hpp"

#include "probeforge/core/codec.hpp"
#include "probeforge/core/error.hpp"
#include "probeforge/core/parallel.hpp"
#include "probeforge/preprocess/blur.hpp"
#include "probeforge/preprocess/image_io.hpp"
#include "probeforge/preprocess/jpeg.hpp"

#include <set>

namespace probeforge::preprocess {

namespace fs = std::filesystem;

ImageBuffer apply_perturbations(const ImageBuffer& image, const PerturbationSpec& spec) {
    spec.validate();
    ImageBuffer current = image.to_u8();
    for (const auto& step : spec.steps) {
        if (const auto* jpeg = std::get_if<JpegStep>(&step)) {
            current = apply_jpeg(current, jpeg->quality);
        } else {
            current = apply_blur(current, std::get<BlurStep>(step).sigma);
        }
    }
    return current;
}

store::DatasetManifest emit_perturbed_corpus(const store::DatasetManifest& manifest, const fs::path& source_root,
                                             const PerturbationSpec& spec, const fs::path& out_dir,
                                             std::size_t jobs) {
    spec.validate();
    const auto report = store::validate_manifest(manifest, source_root);
    report.throw_if_invalid();

    store::DatasetManifest derived;
    derived.name = manifest.name.empty() ? spec.label() : manifest.name + "-" + spec.label();
    derived.root = out_dir;
    derived.entries = manifest.entries;
    std::set<std::string> targets;
    for (auto& e : derived.entries) {
        e.relative_path = fs::path(e.relative_path).replace_extension(".png").generic_string();
        if (!targets.insert(e.relative_path).second) {
            fail(ErrorCode::Integrity, "two entries map to output path '" + e.relative_path + "'");
        }
    }

    fs::create_directories(out_dir);
    parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
        const ImageBuffer src = read_image(source_root / manifest.entries[i].relative_path);
        write_png(out_dir / derived.entries[i].relative_path, apply_perturbations(src, spec));
    });

    store::save_manifest(out_dir / "manifest.csv", derived);
    nlohmann::json spec_json = spec;
    write_text_file(out_dir / "perturbation.json", spec_json.dump(2) + "\n");
    return derived;
}

} // namespace probeforge::preprocess
