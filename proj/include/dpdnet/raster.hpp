#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dpdnet {

/// Row-major image with interleaved channels: sample (row, col, ch) lives at
/// `(row * width + col) * channels + ch`.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels = 1, double fill = 0.0);
  Raster(int width, int height, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int row, int col, int ch = 0) noexcept { return data_[index(row, col, ch)]; }
  double at(int row, int col, int ch = 0) const noexcept { return data_[index(row, col, ch)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::span<double> pixel(std::size_t p) noexcept {
    return {data_.data() + p * static_cast<std::size_t>(channels_), static_cast<std::size_t>(channels_)};
  }
  std::span<const double> pixel(std::size_t p) const noexcept {
    return {data_.data() + p * static_cast<std::size_t>(channels_), static_cast<std::size_t>(channels_)};
  }

  /// Copy of a single channel as a one-channel raster.
  Raster channel(int ch) const;

  bool same_shape(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool all_finite() const noexcept;

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int row, int col, int ch) const noexcept {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(ch);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Symmetric (edge-inclusive) reflection of an index into [0, n):
/// -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2, repeating for far offsets.
int reflect_index(int i, int n) noexcept;

/// Concatenates channels of equally sized rasters, in argument order.
Raster concat_channels(std::span<const Raster> parts);

}  // namespace dpdnet
