#pragma once

#include <filesystem>
#include <string_view>

#include "dpdnet/raster.hpp"

namespace dpdnet {

/// On-disk raster encodings.
///
///  - pgm8 / pgm16: Netpbm P5, one channel, big-endian 16-bit samples.
///    Loaded values are sample / maxval, so they fall in [0, 1].
///  - f32raw: little-endian IEEE-754 floats, row-major with interleaved
///    channels, described by a JSON sidecar at `<path>.json` holding
///    `{"width", "height", "channels"}`.
enum class RasterFormat { pgm8, pgm16, f32raw };

RasterFormat parse_raster_format(std::string_view name);
/// `.pgm` -> pgm8, `.f32` / `.raw` -> f32raw.
RasterFormat format_from_path(const std::filesystem::path& path);
std::filesystem::path f32_sidecar_path(const std::filesystem::path& path);

Raster load_raster(const std::filesystem::path& path, RasterFormat format);
void save_raster(const Raster& raster, const std::filesystem::path& path, RasterFormat format);

/// Loads a PGM regardless of bit depth (8-bit when maxval < 256).
Raster load_pgm(const std::filesystem::path& path);

}  // namespace dpdnet
