#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpdnet/labels.hpp"
#include "dpdnet/raster.hpp"

namespace dpdnet {

struct KMeansOptions {
  int k = 2;
  int max_iter = 100;
  int restarts = 1;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<int> ids;
  std::vector<double> centroids;  // k * dim, row-major
  double wcss = 0.0;
  int iterations = 0;
  /// Fewer distinct points than clusters; ids are still valid.
  bool degenerate = false;
  /// Within-cluster sum of squares after each Lloyd update of the kept run.
  std::vector<double> objective_trace;
};

/// Lloyd's algorithm on `points` (n * dim, row-major). Each restart starts
/// from k distinct points chosen at random; the lowest-WCSS run is returned.
KMeansResult kmeans_cluster(std::span<const double> points, int dim, const KMeansOptions& options);

/// Within-cluster sum of squares of a given partition.
double within_cluster_ss(std::span<const double> points, int dim, std::span<const int> ids, int k);

/// Mean over a w x w window with mirrored borders, per channel.
Raster local_mean(const Raster& r, int w);

/// Two-cluster k-means over the z-scored pair (DI value, local w x w mean).
/// The cluster with the higher mean DI becomes `changed`; equal means leave
/// everything unchanged.
LabelField preclassify_di(const Raster& di, int w, std::uint64_t seed);

/// Stratified subsample keeping round(ratio * labeled) labels; everything
/// else becomes unlabeled.
LabelField sample_training(const LabelField& labels, double ratio, std::uint64_t seed);

}  // namespace dpdnet
