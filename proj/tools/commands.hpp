#pragma once

#include <filesystem>
#include <optional>

#include "run_config.hpp"

namespace cartex::cli {

/// Decomposes config.input in config.mode and writes u.png, v.png,
/// v_preview.png, noise.png (noisy) or recovered.png (inpaint), plus the
/// run summary. Nothing is written when the inputs cannot be read.
void cmd_decompose(const RunConfig& config);

struct SynthesizeRequest {
    std::filesystem::path spec;  // empty: use presets
    int preset = 0;
    int count = 1;               // presets preset .. preset + count - 1, one subdirectory each
    int size = 128;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "truth";
};

/// Writes cartoon.png, texture.png (signed), mix.png and spec.txt.
void cmd_synthesize(const SynthesizeRequest& request);

/// PSNR/SSIM of cartoon and texture against ground truth. A directory holding
/// u.png (or cartoon.png) is one image; otherwise every subdirectory that does
/// is one image and the truth directory must mirror the names. Writes
/// metrics.txt and metrics.csv into `out` (default: the result directory).
void cmd_metrics(const std::filesystem::path& results, const std::filesystem::path& truth,
                 const std::filesystem::path& out = {});

/// Runs the isotropic and union-neighbourhood graphs on the same input into
/// out/isotropic and out/baseline, and writes ablation.txt and ablation.csv.
void cmd_ablate(const RunConfig& config);

}  // namespace cartex::cli
