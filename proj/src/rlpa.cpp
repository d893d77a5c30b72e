#include "dpdnet/rlpa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpdnet/error.hpp"
#include "dpdnet/random.hpp"

namespace dpdnet {

TransitionMatrix::TransitionMatrix(int width, int height, std::vector<RegionBlock> blocks)
    : width_(width), height_(height), blocks_(std::move(blocks)) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  region_of_.assign(n, 0);
  local_of_.assign(n, 0);
  std::vector<bool> covered(n, false);
  for (std::size_t r = 0; r < blocks_.size(); ++r) {
    const RegionBlock& b = blocks_[r];
    if (b.values.size() != b.size() * b.size()) throw ShapeError("transition block is not square");
    for (std::size_t i = 0; i < b.size(); ++i) {
      const std::size_t p = b.pixels[i];
      if (p >= n || covered[p]) throw ShapeError("transition blocks must partition the pixels");
      covered[p] = true;
      region_of_[p] = r;
      local_of_[p] = i;
    }
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    throw ShapeError("transition blocks must cover every pixel");
  }
}

RegionWeights build_weights(const Raster& img, const RegionMap& regions) {
  if (regions.width != img.width() || regions.height != img.height()) {
    throw ShapeError("region map does not cover the image");
  }
  const int channels = img.channels();
  RegionWeights out;
  out.width = img.width();
  out.height = img.height();
  for (auto& pixels : regions.members()) {
    RegionBlock block;
    const std::size_t m = pixels.size();

    // sigma: root of the per-channel variance averaged over channels.
    double var_sum = 0.0;
    for (int ch = 0; ch < channels; ++ch) {
      double mean = 0.0;
      for (std::size_t p : pixels) mean += img.pixel(p)[ch];
      mean /= static_cast<double>(m);
      double var = 0.0;
      for (std::size_t p : pixels) {
        const double d = img.pixel(p)[ch] - mean;
        var += d * d;
      }
      var_sum += var / static_cast<double>(m);
    }
    block.sigma = std::sqrt(var_sum / channels);

    block.values.assign(m * m, 1.0);
    if (block.sigma > 0.0) {
      const double inv = 1.0 / (2.0 * block.sigma * block.sigma);
      for (std::size_t i = 0; i < m; ++i) {
        const auto pi = img.pixel(pixels[i]);
        for (std::size_t j = i + 1; j < m; ++j) {
          const auto pj = img.pixel(pixels[j]);
          double d2 = 0.0;
          for (int ch = 0; ch < channels; ++ch) d2 += (pi[ch] - pj[ch]) * (pi[ch] - pj[ch]);
          const double w = std::exp(-d2 * inv);
          block.values[i * m + j] = w;
          block.values[j * m + i] = w;
        }
      }
    }
    block.pixels = std::move(pixels);
    out.blocks.push_back(std::move(block));
  }
  return out;
}

TransitionMatrix build_transition(const RegionWeights& weights) {
  std::vector<RegionBlock> blocks = weights.blocks;
  for (RegionBlock& b : blocks) {
    const std::size_t m = b.size();
    for (std::size_t j = 0; j < m; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double w = b.values[i * m + j];
        if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("weights must be finite and non-negative");
        col += w;
      }
      if (!(col > 0.0)) throw ParameterError("weight column " + std::to_string(j) + " sums to zero");
      for (std::size_t i = 0; i < m; ++i) b.values[i * m + j] /= col;
    }
  }
  return TransitionMatrix(weights.width, weights.height, std::move(blocks));
}

LabelField propagate(const TransitionMatrix& t, const LabelField& init, const PropagationOptions& options,
                     PropagationStats* stats) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (options.max_iter < 1) throw ParameterError("max_iter must be >= 1");
  if (init.width() != t.width() || init.height() != t.height()) throw ShapeError("label field does not match T");

  const std::size_t n = init.size();
  // anchor[2p] = unchanged mass, anchor[2p + 1] = changed mass.
  std::vector<double> anchor(2 * n, 0.0);
  if (init.has_soft()) {
    for (std::size_t p = 0; p < n; ++p) {
      anchor[2 * p] = init.soft()[p].unchanged;
      anchor[2 * p + 1] = init.soft()[p].changed;
    }
  } else {
    for (std::size_t p = 0; p < n; ++p) {
      if (init[p] == Label::unchanged) anchor[2 * p] = 1.0;
      if (init[p] == Label::changed) anchor[2 * p + 1] = 1.0;
    }
  }

  const double alpha = options.alpha;
  const auto& blocks = t.blocks();
  std::vector<double> y = anchor;
  std::vector<bool> active(blocks.size(), true);
  std::vector<double> next;
  PropagationStats local;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    double residual = 0.0;
    bool any_active = false;
    for (std::size_t r = 0; r < blocks.size(); ++r) {
      if (!active[r]) continue;
      any_active = true;
      const RegionBlock& b = blocks[r];
      const std::size_t m = b.size();
      next.assign(2 * m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const double* row = b.values.data() + i * m;
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          s0 += row[j] * y[2 * b.pixels[j]];
          s1 += row[j] * y[2 * b.pixels[j] + 1];
        }
        const std::size_t p = b.pixels[i];
        next[2 * i] = alpha * s0 + (1.0 - alpha) * anchor[2 * p];
        next[2 * i + 1] = alpha * s1 + (1.0 - alpha) * anchor[2 * p + 1];
      }
      double max_change = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t p = b.pixels[i];
        for (int c = 0; c < 2; ++c) {
          const double d = std::abs(next[2 * i + c] - y[2 * p + c]);
          max_change = std::max(max_change, d);
          residual += d;
          y[2 * p + c] = next[2 * i + c];
        }
      }
      if (max_change < options.tol) active[r] = false;
    }
    if (!any_active) break;
    local.iterations = iter + 1;
    local.residuals.push_back(residual);
  }
  local.converged = std::find(active.begin(), active.end(), true) == active.end();
  if (stats) *stats = std::move(local);

  std::vector<SoftLabel> soft(n);
  for (std::size_t p = 0; p < n; ++p) soft[p] = {y[2 * p], y[2 * p + 1]};
  LabelField out(init.width(), init.height(), Label::unchanged);
  out.set_soft(std::move(soft));
  return out;
}

int default_region_count(std::size_t pixel_count) {
  return std::max(1, static_cast<int>(pixel_count / 64));
}

LabelField clean_labels(const TransitionMatrix& t, const LabelField& pseudo, const CleaningOptions& options,
                        std::uint64_t seed) {
  if (pseudo.width() != t.width() || pseudo.height() != t.height()) throw ShapeError("label field does not match T");
  if (options.rounds < 1) throw ParameterError("rounds must be >= 1");
  if (!(options.labeled_fraction > 0.0 && options.labeled_fraction <= 1.0)) {
    throw ParameterError("labeled fraction must lie in (0, 1]");
  }
  if (pseudo.count(Label::changed) < 2 || pseudo.count(Label::unchanged) < 2) {
    throw InputError("label cleaning needs at least two labeled pixels per class");
  }

  std::vector<std::size_t> labeled;
  for (std::size_t p = 0; p < pseudo.size(); ++p) {
    if (pseudo[p] != Label::unlabeled) labeled.push_back(p);
  }
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(options.labeled_fraction * static_cast<double>(labeled.size()))));
  const PropagationOptions prop{options.alpha, options.max_iter, options.tol};

  std::vector<int> changed_votes(labeled.size(), 0);
  for (int round = 0; round < options.rounds; ++round) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(round)));
    LabelField split(pseudo.width(), pseudo.height(), Label::unlabeled);
    constexpr int kMaxRedraws = 10;
    for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
      for (std::size_t i = 0; i < pseudo.size(); ++i) split[i] = Label::unlabeled;
      for (std::size_t i : sample_without_replacement(labeled.size(), keep, rng)) {
        split[labeled[i]] = pseudo[labeled[i]];
      }
      if (split.count(Label::changed) > 0 && split.count(Label::unchanged) > 0) break;
    }
    const LabelField predicted = propagate(t, split, prop);
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      if (predicted[labeled[i]] == Label::changed) ++changed_votes[i];
    }
  }

  LabelField out(pseudo.width(), pseudo.height(), Label::unlabeled);
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    out[labeled[i]] = 2 * changed_votes[i] > options.rounds ? Label::changed : Label::unchanged;
  }
  return out;
}

LabelField clean_labels(const Raster& img, const LabelField& pseudo, const CleaningOptions& options,
                        std::uint64_t seed) {
  if (img.width() != pseudo.width() || img.height() != pseudo.height()) {
    throw ShapeError("image and labels differ in size");
  }
  SuperpixelOptions seg;
  seg.n_regions = options.n_regions > 0 ? options.n_regions : default_region_count(img.pixel_count());
  seg.compactness = options.compactness;
  seg.seed = derive_seed(seed, 0xC0FFEEULL);
  const RegionMap regions = segment_superpixels(img, seg);
  const TransitionMatrix t = build_transition(build_weights(img, regions));
  return clean_labels(t, pseudo, options, seed);
}

}  // namespace dpdnet
