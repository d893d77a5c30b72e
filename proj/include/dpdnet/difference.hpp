#pragma once

#include "dpdnet/raster.hpp"

namespace dpdnet {

inline constexpr double kLogRatioEpsilon = 1e-6;

/// |ln((i2 + eps) / (i1 + eps))| per pixel, without rescaling.
Raster log_ratio(const Raster& i1, const Raster& i2);

/// Min-max rescale to [0, 1]; a constant raster maps to all zeros.
Raster minmax_rescale(const Raster& r);

/// Log-ratio difference image rescaled to [0, 1].
Raster log_ratio_di(const Raster& i1, const Raster& i2);

}  // namespace dpdnet
