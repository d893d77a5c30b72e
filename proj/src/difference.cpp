#include "dpdnet/difference.hpp"

#include <algorithm>
#include <cmath>

#include "dpdnet/error.hpp"

namespace dpdnet {

Raster log_ratio(const Raster& i1, const Raster& i2) {
  if (!i1.same_shape(i2) || i1.channels() != 1 || i2.channels() != 1) {
    throw ShapeError("log-ratio needs two single-channel rasters of equal size");
  }
  Raster out(i1.width(), i1.height(), 1);
  auto a = i1.data();
  auto b = i2.data();
  auto dst = out.data();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    if (a[p] < 0.0 || b[p] < 0.0) throw InputError("log-ratio needs non-negative intensities");
    dst[p] = std::abs(std::log((b[p] + kLogRatioEpsilon) / (a[p] + kLogRatioEpsilon)));
  }
  return out;
}

Raster minmax_rescale(const Raster& r) {
  Raster out = r;
  auto d = out.data();
  if (d.empty()) return out;
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (double& v : d) v = range > 0.0 ? (v - min) / range : 0.0;
  return out;
}

Raster log_ratio_di(const Raster& i1, const Raster& i2) { return minmax_rescale(log_ratio(i1, i2)); }

}  // namespace dpdnet
