#pragma once

#include <filesystem>

#include "cartex/image.hpp"

namespace cartex {

enum class BitDepth { k8 = 8, k16 = 16 };

/// Reads a grayscale binary PGM (P5) or PNG; the format is detected from the
/// file signature. Samples are mapped linearly onto [0,1].
Image read_image(const std::filesystem::path& path);

/// Writes PGM or PNG depending on the extension (".pgm" or ".png"). Values are
/// clamped to [0,1] and quantized to the requested depth.
void write_image(const std::filesystem::path& path, const Image& img,
                 BitDepth depth = BitDepth::k8);

/// Signed planes (texture, noise) are stored with a +0.5 offset at 16 bits.
inline constexpr double kSignedOffset = 0.5;
void write_signed_image(const std::filesystem::path& path, const Image& img);
Image read_signed_image(const std::filesystem::path& path);

/// Min-max stretch to [0,1] for previews. A flat image maps to 0.5.
Image stretch_contrast(const Image& img);

}  // namespace cartex
