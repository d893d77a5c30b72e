#include "dpdnet/raster.hpp"

#include <cmath>
#include <string>

#include "dpdnet/error.hpp"

namespace dpdnet {

Raster::Raster(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0) throw ShapeError("raster dimensions must be positive");
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

Raster::Raster(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width <= 0 || height <= 0 || channels <= 0) throw ShapeError("raster dimensions must be positive");
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
    throw ShapeError("raster data length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(width) + "x" + std::to_string(height) + "x" + std::to_string(channels));
  }
}

Raster Raster::channel(int ch) const {
  if (ch < 0 || ch >= channels_) throw ShapeError("channel index out of range");
  Raster out(width_, height_, 1);
  for (std::size_t p = 0; p < pixel_count(); ++p) out.data_[p] = data_[p * channels_ + ch];
  return out;
}

bool Raster::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

Raster concat_channels(std::span<const Raster> parts) {
  if (parts.empty()) throw ShapeError("nothing to concatenate");
  int total = 0;
  for (const Raster& r : parts) {
    if (!r.same_shape(parts.front())) throw ShapeError("concatenated rasters differ in size");
    total += r.channels();
  }
  Raster out(parts.front().width(), parts.front().height(), total);
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    auto dst = out.pixel(p);
    std::size_t offset = 0;
    for (const Raster& r : parts) {
      for (double v : r.pixel(p)) dst[offset++] = v;
    }
  }
  return out;
}

}  // namespace dpdnet
