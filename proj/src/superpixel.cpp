#include "dpdnet/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dpdnet/error.hpp"
#include "dpdnet/random.hpp"

namespace dpdnet {
namespace {

constexpr double kIntensityScale = 100.0;

struct Center {
  double row = 0.0;
  double col = 0.0;
  std::vector<double> value;
};

// 4-connected components; returns component id per pixel and fills sizes.
std::vector<int> label_components(const RegionMap& map, std::vector<std::size_t>& sizes,
                                  std::vector<int>& component_region) {
  const std::size_t n = map.ids.size();
  std::vector<int> comp(n, -1);
  sizes.clear();
  component_region.clear();
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] != -1) continue;
    const int id = static_cast<int>(sizes.size());
    const int region = map.ids[start];
    std::size_t count = 0;
    comp[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++count;
      const int r = static_cast<int>(p / map.width);
      const int c = static_cast<int>(p % map.width);
      const int nr[4] = {r - 1, r + 1, r, r};
      const int nc[4] = {c, c, c - 1, c + 1};
      for (int i = 0; i < 4; ++i) {
        if (nr[i] < 0 || nr[i] >= map.height || nc[i] < 0 || nc[i] >= map.width) continue;
        const std::size_t q = static_cast<std::size_t>(nr[i]) * map.width + nc[i];
        if (comp[q] == -1 && map.ids[q] == region) {
          comp[q] = id;
          stack.push_back(q);
        }
      }
    }
    sizes.push_back(count);
    component_region.push_back(region);
  }
  return comp;
}

void compact_ids(RegionMap& map) {
  std::vector<int> remap;
  int next = 0;
  for (int& id : map.ids) {
    if (id >= static_cast<int>(remap.size())) remap.resize(id + 1, -1);
    if (remap[id] == -1) remap[id] = next++;
    id = remap[id];
  }
  map.region_count = next;
}

}  // namespace

std::vector<std::vector<std::size_t>> RegionMap::members() const {
  std::vector<std::vector<std::size_t>> out(region_count);
  for (std::size_t p = 0; p < ids.size(); ++p) out[ids[p]].push_back(p);
  return out;
}

void enforce_connectivity(RegionMap& map) {
  std::vector<std::size_t> comp_size;
  std::vector<int> comp_region;
  for (;;) {
    const std::vector<int> comp = label_components(map, comp_size, comp_region);

    // The largest component of each region keeps its id.
    int max_region = 0;
    for (int id : map.ids) max_region = std::max(max_region, id);
    std::vector<int> main_comp(max_region + 1, -1);
    for (std::size_t c = 0; c < comp_size.size(); ++c) {
      int& m = main_comp[comp_region[c]];
      if (m == -1 || comp_size[c] > comp_size[m]) m = static_cast<int>(c);
    }
    bool orphan_found = false;
    for (std::size_t c = 0; c < comp_size.size(); ++c) {
      if (main_comp[comp_region[c]] != static_cast<int>(c)) orphan_found = true;
    }
    if (!orphan_found) break;

    std::vector<std::size_t> region_size(max_region + 1, 0);
    for (int id : map.ids) ++region_size[id];

    // Neighbouring regions of every orphan component.
    std::vector<int> target(comp_size.size(), -1);
    for (std::size_t p = 0; p < map.ids.size(); ++p) {
      const int c = comp[p];
      if (main_comp[comp_region[c]] == c) continue;
      const int r = static_cast<int>(p / map.width);
      const int col = static_cast<int>(p % map.width);
      const int nr[4] = {r - 1, r + 1, r, r};
      const int nc[4] = {col, col, col - 1, col + 1};
      for (int i = 0; i < 4; ++i) {
        if (nr[i] < 0 || nr[i] >= map.height || nc[i] < 0 || nc[i] >= map.width) continue;
        const std::size_t q = static_cast<std::size_t>(nr[i]) * map.width + nc[i];
        const int other = map.ids[q];
        // Only merge into main components; orphan-to-orphan moves can cycle.
        if (other == comp_region[c] || main_comp[other] != comp[q]) continue;
        int& t = target[c];
        if (t == -1 || region_size[other] > region_size[t] || (region_size[other] == region_size[t] && other < t)) {
          t = other;
        }
      }
    }
    for (std::size_t p = 0; p < map.ids.size(); ++p) {
      const int t = target[comp[p]];
      if (t != -1) map.ids[p] = t;
    }
  }
  compact_ids(map);
}

bool is_valid_partition(const RegionMap& map) {
  if (map.ids.size() != static_cast<std::size_t>(map.width) * map.height) return false;
  std::vector<std::size_t> seen(map.region_count, 0);
  for (int id : map.ids) {
    if (id < 0 || id >= map.region_count) return false;
    ++seen[id];
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) return false;
  std::vector<std::size_t> sizes;
  std::vector<int> regions;
  label_components(map, sizes, regions);
  return static_cast<int>(sizes.size()) == map.region_count;
}

RegionMap segment_superpixels(const Raster& img, const SuperpixelOptions& options) {
  if (options.n_regions < 1) throw ParameterError("superpixel count must be >= 1");
  if (options.compactness <= 0.0) throw ParameterError("compactness must be positive");
  if (options.iterations < 1) throw ParameterError("superpixel iterations must be >= 1");
  const int width = img.width();
  const int height = img.height();
  const std::size_t n = img.pixel_count();
  const int channels = img.channels();

  RegionMap map;
  map.width = width;
  map.height = height;
  if (static_cast<std::size_t>(options.n_regions) >= n) {
    map.ids.resize(n);
    std::iota(map.ids.begin(), map.ids.end(), 0);
    map.region_count = static_cast<int>(n);
    return map;
  }

  // Grid of ny x nx cells following the image aspect ratio.
  const double target = options.n_regions;
  int ny = std::max(1, static_cast<int>(std::lround(std::sqrt(target * height / width))));
  ny = std::min(ny, height);
  int nx = std::max(1, static_cast<int>(std::lround(target / ny)));
  nx = std::min(nx, width);
  const double cell_h = static_cast<double>(height) / ny;
  const double cell_w = static_cast<double>(width) / nx;
  const double step = std::sqrt(cell_h * cell_w);
  const double spatial_weight = (options.compactness / step) * (options.compactness / step);

  Rng rng(options.seed);
  std::uniform_real_distribution<double> jitter(0.25, 0.75);
  std::vector<Center> centers;
  centers.reserve(static_cast<std::size_t>(nx) * ny);
  for (int gy = 0; gy < ny; ++gy) {
    for (int gx = 0; gx < nx; ++gx) {
      Center c;
      c.row = (gy + jitter(rng)) * cell_h - 0.5;
      c.col = (gx + jitter(rng)) * cell_w - 0.5;
      const int r = std::clamp(static_cast<int>(std::lround(c.row)), 0, height - 1);
      const int col = std::clamp(static_cast<int>(std::lround(c.col)), 0, width - 1);
      const auto v = img.pixel(static_cast<std::size_t>(r) * width + col);
      c.value.assign(v.begin(), v.end());
      centers.push_back(std::move(c));
    }
  }

  map.ids.assign(n, -1);
  std::vector<double> best(n);
  const int reach_r = static_cast<int>(std::ceil(cell_h));
  const int reach_c = static_cast<int>(std::ceil(cell_w));
  for (int iter = 0; iter < options.iterations; ++iter) {
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& c = centers[k];
      const int r0 = std::max(0, static_cast<int>(std::floor(c.row)) - reach_r);
      const int r1 = std::min(height - 1, static_cast<int>(std::ceil(c.row)) + reach_r);
      const int c0 = std::max(0, static_cast<int>(std::floor(c.col)) - reach_c);
      const int c1 = std::min(width - 1, static_cast<int>(std::ceil(c.col)) + reach_c);
      for (int r = r0; r <= r1; ++r) {
        for (int col = c0; col <= c1; ++col) {
          const std::size_t p = static_cast<std::size_t>(r) * width + col;
          const auto v = img.pixel(p);
          double dc = 0.0;
          for (int ch = 0; ch < channels; ++ch) {
            const double d = (v[ch] - c.value[ch]) * kIntensityScale;
            dc += d * d;
          }
          const double dr = r - c.row;
          const double dcol = col - c.col;
          const double dist = dc + (dr * dr + dcol * dcol) * spatial_weight;
          if (dist < best[p]) {
            best[p] = dist;
            map.ids[p] = static_cast<int>(k);
          }
        }
      }
    }
    // Window coverage is complete for a regular grid; this only guards
    // against centres that drifted far.
    for (std::size_t p = 0; p < n; ++p) {
      if (map.ids[p] != -1) continue;
      const int r = static_cast<int>(p / width);
      const int col = static_cast<int>(p % width);
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double d = (r - centers[k].row) * (r - centers[k].row) + (col - centers[k].col) * (col - centers[k].col);
        if (d < bd) {
          bd = d;
          map.ids[p] = static_cast<int>(k);
        }
      }
    }

    std::vector<Center> sums(centers.size());
    std::vector<std::size_t> counts(centers.size(), 0);
    for (auto& s : sums) s.value.assign(channels, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      Center& s = sums[map.ids[p]];
      s.row += static_cast<double>(p / width);
      s.col += static_cast<double>(p % width);
      const auto v = img.pixel(p);
      for (int ch = 0; ch < channels; ++ch) s.value[ch] += v[ch];
      ++counts[map.ids[p]];
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[k]);
      centers[k].row = sums[k].row * inv;
      centers[k].col = sums[k].col * inv;
      for (int ch = 0; ch < channels; ++ch) centers[k].value[ch] = sums[k].value[ch] * inv;
    }
  }

  map.region_count = static_cast<int>(centers.size());
  enforce_connectivity(map);
  return map;
}

}  // namespace dpdnet
