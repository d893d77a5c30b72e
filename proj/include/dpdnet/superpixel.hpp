#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dpdnet/raster.hpp"

namespace dpdnet {

/// Homogeneous-region partition of an image.
struct RegionMap {
  int width = 0;
  int height = 0;
  int region_count = 0;
  std::vector<int> ids;  // per pixel, in [0, region_count)

  std::vector<std::vector<std::size_t>> members() const;
};

struct SuperpixelOptions {
  int n_regions = 1;
  double compactness = 10.0;
  int iterations = 10;
  std::uint64_t seed = 0;
};

/// SLIC-style segmentation. Intensities are compared on a 0..100 scale (the
/// L* convention) so `compactness` has its usual meaning for [0, 1] rasters.
RegionMap segment_superpixels(const Raster& img, const SuperpixelOptions& options);

/// Relabels every 4-connected component that is not the largest piece of its
/// region into the largest adjacent region, then compacts ids in scan order.
void enforce_connectivity(RegionMap& map);

/// True when every region id occurs and each region is 4-connected.
bool is_valid_partition(const RegionMap& map);

}  // namespace dpdnet
