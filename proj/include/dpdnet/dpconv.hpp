#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "dpdnet/raster.hpp"

namespace dpdnet {

enum class KernelMode { distinctive, random };

KernelMode parse_kernel_mode(std::string_view name);
std::string_view to_string(KernelMode mode);

/// Post-extraction scaling applied to each patch before it is used as a
/// kernel.
enum class KernelNorm {
  none,
  unit,            // scale to unit L2 norm
  zero_mean_unit,  // subtract the patch mean, then unit L2 norm
};

struct PixelCoord {
  int row = 0;
  int col = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// k x k x c patch, stored (row, col, channel)-interleaved.
struct Kernel {
  int size = 0;
  int channels = 0;
  std::vector<double> weights;
  PixelCoord center;

  double operator()(int r, int c, int ch) const noexcept {
    return weights[(static_cast<std::size_t>(r) * size + c) * channels + ch];
  }
};

struct KernelSet {
  std::vector<Kernel> kernels;
  KernelMode mode = KernelMode::distinctive;
  /// Distinctive mode found fewer than m pixels above the threshold and fell
  /// back to the m strongest activations.
  bool fallback = false;
};

/// Min-max normalised activation map. Multi-channel input is reduced to its
/// per-pixel L2 magnitude first; a constant map becomes all zeros.
Raster normalize_activation(const Raster& f);

/// k x k window around `center` with symmetric edge-inclusive reflection.
Kernel extract_patch(const Raster& f, PixelCoord center, int k);

void normalize_kernel(Kernel& kernel, KernelNorm norm);

struct KernelSelection {
  KernelMode mode = KernelMode::distinctive;
  int m = 30;
  int k = 5;
  double threshold = 0.7;
  KernelNorm norm = KernelNorm::zero_mean_unit;
};

/// Chooses m patch centres (distinctive: uniformly among activations above
/// the threshold, else the top-m; random: uniformly among all pixels) and
/// extracts normalised kernels around them.
KernelSet select_kernels(const Raster& f, const KernelSelection& selection, std::uint64_t seed);

/// Cross-correlation of `f` with every kernel (reflected borders, same output
/// size) followed by ReLU. Output has one channel per kernel.
Raster conv_layer(const Raster& f, const KernelSet& kernels);

struct PcaResult {
  Raster projected;
  std::vector<double> explained_variance;  // descending
  std::vector<double> components;          // kept * channels, row-major
  double total_variance = 0.0;
  /// Components requested but dropped for (near-)zero variance.
  int dropped = 0;
};

/// Projects centred pixels onto the top `keep` covariance eigenvectors
/// (sample covariance, n - 1). Components with eigenvalue <= 1e-12 * trace
/// are never returned. Each component's largest-magnitude loading is
/// positive.
PcaResult pca_reduce(const Raster& f, int keep);

/// Per-channel z-score; zero-variance channels become all zeros.
Raster standardize_channels(const Raster& f);

struct StackOptions {
  int depth = 4;
  KernelSelection selection;
  bool include_input = true;
  int pca_components = 3;
};

/// Per-pixel feature vectors: D PCA-reduced, z-scored layer outputs followed
/// by the z-scored input channels when requested.
struct FeatureStack {
  Raster data;
  std::vector<int> layer_channels;
  int input_channels = 0;  // 0 when the input is not included

  int width() const noexcept { return data.width(); }
  int height() const noexcept { return data.height(); }
  int vector_len() const noexcept { return data.channels(); }
};

/// Feature stack that is just the z-scored input (the no-convolution
/// baseline).
FeatureStack input_features(const Raster& input);

FeatureStack stack_features(const Raster& input, const StackOptions& options, std::uint64_t seed);

}  // namespace dpdnet
