#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dpdnet/labels.hpp"
#include "dpdnet/raster.hpp"
#include "dpdnet/superpixel.hpp"

namespace dpdnet {

/// Dense square block over the pixels of one homogeneous region.
struct RegionBlock {
  std::vector<std::size_t> pixels;  // global pixel indices, local order
  std::vector<double> values;       // n * n, row-major: values[i * n + j]
  double sigma = 0.0;

  std::size_t size() const noexcept { return pixels.size(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values[i * pixels.size() + j]; }
};

/// Intra-region Gaussian affinities. Pixels in different regions have zero
/// weight, so only the diagonal blocks are stored.
struct RegionWeights {
  int width = 0;
  int height = 0;
  std::vector<RegionBlock> blocks;
};

/// Column-stochastic, block-diagonal transition matrix: entry (i, j) of a
/// block is the probability of moving from local pixel j to local pixel i.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  TransitionMatrix(int width, int height, std::vector<RegionBlock> blocks);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<RegionBlock>& blocks() const noexcept { return blocks_; }
  std::size_t region_of(std::size_t pixel) const noexcept { return region_of_[pixel]; }
  std::size_t local_index(std::size_t pixel) const noexcept { return local_of_[pixel]; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<RegionBlock> blocks_;
  std::vector<std::size_t> region_of_;
  std::vector<std::size_t> local_of_;
};

/// W_ij = exp(-|p_i - p_j|^2 / (2 sigma^2)) within each region, where p is the
/// pixel's channel vector and sigma the region's intensity standard
/// deviation (root of the mean per-channel variance). A region with
/// sigma = 0 gets all-one weights.
RegionWeights build_weights(const Raster& img, const RegionMap& regions);

/// Column normalisation of each weight block. Throws ParameterError on a
/// negative entry or a non-positive column sum.
TransitionMatrix build_transition(const RegionWeights& weights);

struct PropagationOptions {
  double alpha = 0.7;
  int max_iter = 100;
  double tol = 1e-6;
};

struct PropagationStats {
  int iterations = 0;
  bool converged = false;
  /// Summed L1 change over all still-active regions, per iteration.
  std::vector<double> residuals;
};

/// Iterates y <- alpha * T * y + (1 - alpha) * y0 per class channel, where
/// y0 is the one-hot anchor for labeled pixels and zero for unlabeled ones
/// (soft labels in `init` are used as the anchor when present). Each region
/// stops once its maximum absolute change drops below `tol`. The result
/// carries soft labels and their argmax for every pixel.
LabelField propagate(const TransitionMatrix& t, const LabelField& init, const PropagationOptions& options,
                     PropagationStats* stats = nullptr);

struct CleaningOptions {
  double alpha = 0.7;
  int n_regions = 0;  // 0 selects pixel_count / 64
  double compactness = 10.0;
  int rounds = 10;
  double labeled_fraction = 0.5;
  int max_iter = 100;
  double tol = 1e-6;
};

/// Region count used when `CleaningOptions::n_regions` is 0.
int default_region_count(std::size_t pixel_count);

/// Random label propagation with majority vote. Each round keeps a random
/// `labeled_fraction` of the labeled pixels as anchors, demotes the rest to
/// unlabeled, propagates, and records a vote for every originally labeled
/// pixel. Final label: strict majority of `changed` votes, else unchanged.
/// Unlabeled pixels of `pseudo` stay unlabeled.
LabelField clean_labels(const TransitionMatrix& t, const LabelField& pseudo, const CleaningOptions& options,
                        std::uint64_t seed);

/// Segments `img`, builds the transition matrix over it and cleans `pseudo`.
LabelField clean_labels(const Raster& img, const LabelField& pseudo, const CleaningOptions& options,
                        std::uint64_t seed);

}  // namespace dpdnet
