#include "dpdnet/dpconv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "dpdnet/error.hpp"
#include "dpdnet/random.hpp"

namespace dpdnet {

KernelMode parse_kernel_mode(std::string_view name) {
  if (name == "distinctive") return KernelMode::distinctive;
  if (name == "random") return KernelMode::random;
  throw ParameterError("unknown kernel mode '" + std::string(name) + "'");
}

std::string_view to_string(KernelMode mode) {
  return mode == KernelMode::distinctive ? "distinctive" : "random";
}

Raster normalize_activation(const Raster& f) {
  Raster act(f.width(), f.height(), 1);
  for (std::size_t p = 0; p < f.pixel_count(); ++p) {
    const auto v = f.pixel(p);
    if (v.size() == 1) {
      act.data()[p] = v[0];
    } else {
      double s = 0.0;
      for (double x : v) s += x * x;
      act.data()[p] = std::sqrt(s);
    }
  }
  auto d = act.data();
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (double& v : d) v = range > 0.0 ? (v - min) / range : 0.0;
  return act;
}

Kernel extract_patch(const Raster& f, PixelCoord center, int k) {
  if (k < 1 || k % 2 == 0) throw ParameterError("patch size must be odd and positive");
  Kernel out;
  out.size = k;
  out.channels = f.channels();
  out.center = center;
  out.weights.resize(static_cast<std::size_t>(k) * k * f.channels());
  const int half = k / 2;
  std::size_t i = 0;
  for (int dr = -half; dr <= half; ++dr) {
    const int r = reflect_index(center.row + dr, f.height());
    for (int dc = -half; dc <= half; ++dc) {
      const int c = reflect_index(center.col + dc, f.width());
      for (int ch = 0; ch < f.channels(); ++ch) out.weights[i++] = f.at(r, c, ch);
    }
  }
  return out;
}

void normalize_kernel(Kernel& kernel, KernelNorm norm) {
  if (norm == KernelNorm::none) return;
  auto& w = kernel.weights;
  if (norm == KernelNorm::zero_mean_unit) {
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    for (double& v : w) v -= mean;
  }
  double ss = 0.0;
  for (double v : w) ss += v * v;
  if (ss > 0.0) {
    const double inv = 1.0 / std::sqrt(ss);
    for (double& v : w) v *= inv;
  }
}

KernelSet select_kernels(const Raster& f, const KernelSelection& sel, std::uint64_t seed) {
  if (sel.m < 1) throw ParameterError("kernel count m must be >= 1");
  if (sel.k < 1 || sel.k % 2 == 0) throw ParameterError("kernel size k must be odd");
  if (sel.k > std::min(f.width(), f.height())) throw ParameterError("kernel size exceeds the image");
  const std::size_t n = f.pixel_count();
  const auto m = static_cast<std::size_t>(sel.m);
  if (m > n) throw ParameterError("more kernels requested than pixels");

  KernelSet out;
  out.mode = sel.mode;
  Rng rng(seed);
  std::vector<std::size_t> centers;
  if (sel.mode == KernelMode::random) {
    centers = sample_without_replacement(n, m, rng);
  } else {
    const Raster act = normalize_activation(f);
    std::vector<std::size_t> candidates;
    for (std::size_t p = 0; p < n; ++p) {
      if (act.data()[p] > sel.threshold) candidates.push_back(p);
    }
    if (candidates.size() >= m) {
      for (std::size_t i : sample_without_replacement(candidates.size(), m, rng)) centers.push_back(candidates[i]);
    } else {
      out.fallback = true;
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return act.data()[a] > act.data()[b]; });
      centers.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    }
  }
  for (std::size_t p : centers) {
    Kernel k = extract_patch(f, {static_cast<int>(p / f.width()), static_cast<int>(p % f.width())}, sel.k);
    normalize_kernel(k, sel.norm);
    out.kernels.push_back(std::move(k));
  }
  return out;
}

Raster conv_layer(const Raster& f, const KernelSet& kernels) {
  if (kernels.kernels.empty()) throw ParameterError("empty kernel set");
  const int channels = f.channels();
  const int k = kernels.kernels.front().size;
  for (const Kernel& ker : kernels.kernels) {
    if (ker.channels != channels) {
      throw ShapeError("kernel has " + std::to_string(ker.channels) + " channels, input has " +
                       std::to_string(channels));
    }
    if (ker.size != k) throw ShapeError("kernels in one layer must share a size");
  }
  const int half = k / 2;
  const int width = f.width();
  const int height = f.height();
  const auto m = static_cast<int>(kernels.kernels.size());

  // Reflection-padded copy so the inner loop is branch free.
  const int pw = width + 2 * half;
  const int ph = height + 2 * half;
  std::vector<double> padded(static_cast<std::size_t>(pw) * ph * channels);
  for (int r = 0; r < ph; ++r) {
    const int sr = reflect_index(r - half, height);
    for (int c = 0; c < pw; ++c) {
      const int sc = reflect_index(c - half, width);
      for (int ch = 0; ch < channels; ++ch) {
        padded[(static_cast<std::size_t>(r) * pw + c) * channels + ch] = f.at(sr, sc, ch);
      }
    }
  }

  Raster out(width, height, m);
  const std::size_t row_len = static_cast<std::size_t>(k) * channels;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      auto dst = out.pixel(static_cast<std::size_t>(r) * width + c);
      for (int o = 0; o < m; ++o) {
        const double* w = kernels.kernels[o].weights.data();
        double s = 0.0;
        for (int dr = 0; dr < k; ++dr) {
          const double* src = padded.data() + (static_cast<std::size_t>(r + dr) * pw + c) * channels;
          const double* wr = w + dr * row_len;
          for (std::size_t i = 0; i < row_len; ++i) s += wr[i] * src[i];
        }
        dst[o] = s > 0.0 ? s : 0.0;
      }
    }
  }
  return out;
}

PcaResult pca_reduce(const Raster& f, int keep) {
  if (keep < 1) throw ParameterError("PCA needs keep >= 1");
  const int c = f.channels();
  const std::size_t n = f.pixel_count();
  if (n <= static_cast<std::size_t>(c)) throw InputError("PCA needs more pixels than channels");

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      f.data().data(), static_cast<Eigen::Index>(n), c);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw InputError("covariance eigen-decomposition failed");

  PcaResult out;
  out.total_variance = cov.trace();
  const double floor = 1e-12 * out.total_variance;
  const int wanted = std::min(keep, c);
  std::vector<Eigen::VectorXd> basis;
  // Eigen returns ascending eigenvalues.
  for (int i = c - 1; i >= 0 && static_cast<int>(basis.size()) < wanted; --i) {
    const double lambda = eig.eigenvalues()(i);
    if (!(lambda > floor)) break;
    Eigen::VectorXd v = eig.eigenvectors().col(i);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    basis.push_back(v);
    out.explained_variance.push_back(lambda);
  }
  out.dropped = wanted - static_cast<int>(basis.size());
  if (basis.empty()) throw InputError("PCA input has no variance");

  const int kept = static_cast<int>(basis.size());
  Eigen::MatrixXd v(c, kept);
  for (int i = 0; i < kept; ++i) v.col(i) = basis[i];
  const Eigen::MatrixXd proj = centered * v;
  out.projected = Raster(f.width(), f.height(), kept);
  for (std::size_t p = 0; p < n; ++p) {
    for (int i = 0; i < kept; ++i) out.projected.pixel(p)[i] = proj(static_cast<Eigen::Index>(p), i);
  }
  out.components.resize(static_cast<std::size_t>(kept) * c);
  for (int i = 0; i < kept; ++i) {
    for (int j = 0; j < c; ++j) out.components[static_cast<std::size_t>(i) * c + j] = v(j, i);
  }
  return out;
}

Raster standardize_channels(const Raster& f) {
  Raster out = f;
  const int c = f.channels();
  const std::size_t n = f.pixel_count();
  for (int ch = 0; ch < c; ++ch) {
    double mean = 0.0;
    for (std::size_t p = 0; p < n; ++p) mean += f.pixel(p)[ch];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double d = f.pixel(p)[ch] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    const bool degenerate = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    for (std::size_t p = 0; p < n; ++p) {
      double& v = out.pixel(p)[ch];
      v = degenerate ? 0.0 : (v - mean) / sd;
    }
  }
  return out;
}

FeatureStack input_features(const Raster& input) {
  FeatureStack fs;
  fs.data = standardize_channels(input);
  fs.input_channels = input.channels();
  return fs;
}

FeatureStack stack_features(const Raster& input, const StackOptions& options, std::uint64_t seed) {
  if (options.depth < 1) throw ParameterError("depth D must be >= 1");
  if (options.pca_components < 1) throw ParameterError("PCA component count must be >= 1");

  std::vector<Raster> parts;
  FeatureStack fs;
  Raster current = input;
  for (int d = 1; d <= options.depth; ++d) {
    const KernelSet kernels = select_kernels(current, options.selection, derive_seed(seed, static_cast<std::uint64_t>(d)));
    const Raster layer = conv_layer(current, kernels);
    // The reduced layer is both the stacked output and the next layer's input.
    Raster reduced = pca_reduce(layer, options.pca_components).projected;
    fs.layer_channels.push_back(reduced.channels());
    parts.push_back(standardize_channels(reduced));
    current = std::move(reduced);
  }
  if (options.include_input) {
    parts.push_back(standardize_channels(input));
    fs.input_channels = input.channels();
  }
  fs.data = concat_channels(parts);
  return fs;
}

}  // namespace dpdnet
