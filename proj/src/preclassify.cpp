#include "dpdnet/preclassify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dpdnet/error.hpp"
#include "dpdnet/random.hpp"

namespace dpdnet {
namespace {

double squared_distance(const double* a, const double* b, int dim) noexcept {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

struct LloydRun {
  std::vector<int> ids;
  std::vector<double> centroids;
  double wcss = 0.0;
  int iterations = 0;
  bool degenerate = false;
  std::vector<double> trace;
};

LloydRun lloyd(std::span<const double> points, int dim, int k, int max_iter, std::uint64_t seed) {
  const std::size_t n = points.size() / dim;
  const double* pts = points.data();
  Rng rng(seed);

  // Distinct initial centroids, visiting points in a random order.
  LloydRun run;
  run.centroids.reserve(static_cast<std::size_t>(k) * dim);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> chosen;
  for (std::size_t idx : order) {
    if (chosen.size() == static_cast<std::size_t>(k)) break;
    const double* p = pts + idx * dim;
    bool duplicate = false;
    for (std::size_t c : chosen) {
      if (squared_distance(p, pts + c * dim, dim) == 0.0) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) chosen.push_back(idx);
  }
  run.degenerate = chosen.size() < static_cast<std::size_t>(k);
  for (int c = 0; c < k; ++c) {
    const std::size_t idx = chosen[std::min<std::size_t>(c, chosen.size() - 1)];
    run.centroids.insert(run.centroids.end(), pts + idx * dim, pts + (idx + 1) * dim);
  }

  run.ids.assign(n, -1);
  std::vector<double> dist(n);
  std::vector<std::size_t> sizes(k);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = squared_distance(pts + i * dim, run.centroids.data() + c * dim, dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.ids[i] != best) changed = true;
      run.ids[i] = best;
      dist[i] = best_d;
    }
    if (!changed && iter > 0) break;
    run.iterations = iter + 1;

    // Re-seed empty clusters at the point farthest from its own centroid.
    std::fill(sizes.begin(), sizes.end(), 0);
    for (int id : run.ids) ++sizes[id];
    for (int c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n;
      double far_d = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[run.ids[i]] > 1 && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      if (far == n) {
        run.degenerate = true;
        continue;
      }
      --sizes[run.ids[far]];
      run.ids[far] = c;
      sizes[c] = 1;
      dist[far] = 0.0;
      std::copy(pts + far * dim, pts + (far + 1) * dim, run.centroids.begin() + c * dim);
    }

    std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) sums[run.ids[i] * dim + d] += pts[i * dim + d];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      for (int d = 0; d < dim; ++d) run.centroids[c * dim + d] = sums[c * dim + d] / static_cast<double>(sizes[c]);
    }
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wcss += squared_distance(pts + i * dim, run.centroids.data() + run.ids[i] * dim, dim);
    }
    run.trace.push_back(wcss);
  }
  run.wcss = within_cluster_ss(points, dim, run.ids, k);
  return run;
}

}  // namespace

double within_cluster_ss(std::span<const double> points, int dim, std::span<const int> ids, int k) {
  const std::size_t n = points.size() / dim;
  std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++sizes[ids[i]];
    for (int d = 0; d < dim; ++d) sums[ids[i] * dim + d] += points[i * dim + d];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) {
      const double diff = points[i * dim + d] - sums[ids[i] * dim + d] / static_cast<double>(sizes[ids[i]]);
      total += diff * diff;
    }
  }
  return total;
}

KMeansResult kmeans_cluster(std::span<const double> points, int dim, const KMeansOptions& options) {
  if (dim <= 0 || points.empty() || points.size() % dim != 0) {
    throw InputError("k-means needs a non-empty set of equal-length vectors");
  }
  if (options.k < 1) throw ParameterError("k-means needs k >= 1");
  if (options.max_iter < 1 || options.restarts < 1) throw ParameterError("k-means needs max_iter, restarts >= 1");

  KMeansResult best;
  bool have = false;
  for (int r = 0; r < options.restarts; ++r) {
    LloydRun run = lloyd(points, dim, options.k, options.max_iter, derive_seed(options.seed, r));
    if (!have || run.wcss < best.wcss) {
      best.ids = std::move(run.ids);
      best.centroids = std::move(run.centroids);
      best.wcss = run.wcss;
      best.iterations = run.iterations;
      best.degenerate = run.degenerate;
      best.objective_trace = std::move(run.trace);
      have = true;
    }
  }
  return best;
}

Raster local_mean(const Raster& r, int w) {
  if (w < 1 || w % 2 == 0) throw ParameterError("window size must be odd and positive");
  const int half = w / 2;
  const int channels = r.channels();
  Raster out(r.width(), r.height(), channels);
  // Separable box filter over mirrored borders.
  Raster rows(r.width(), r.height(), channels);
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        double s = 0.0;
        for (int dx = -half; dx <= half; ++dx) s += r.at(y, reflect_index(x + dx, r.width()), c);
        rows.at(y, x, c) = s;
      }
    }
  }
  const double norm = 1.0 / (static_cast<double>(w) * w);
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        double s = 0.0;
        for (int dy = -half; dy <= half; ++dy) s += rows.at(reflect_index(y + dy, r.height()), x, c);
        out.at(y, x, c) = s * norm;
      }
    }
  }
  return out;
}

LabelField preclassify_di(const Raster& di, int w, std::uint64_t seed) {
  if (di.channels() != 1) throw ShapeError("preclassification expects a single-channel DI");
  if (w < 3 || w % 2 == 0) throw ParameterError("patch size w must be odd and >= 3");
  const Raster mean = local_mean(di, w);
  const std::size_t n = di.pixel_count();
  std::vector<double> features(2 * n);
  for (std::size_t p = 0; p < n; ++p) {
    features[2 * p] = di.data()[p];
    features[2 * p + 1] = mean.data()[p];
  }
  // z-score both columns; raw DI variance would otherwise swamp the local mean.
  for (int d = 0; d < 2; ++d) {
    double m = 0.0;
    for (std::size_t p = 0; p < n; ++p) m += features[2 * p + d];
    m /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t p = 0; p < n; ++p) var += (features[2 * p + d] - m) * (features[2 * p + d] - m);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t p = 0; p < n; ++p) features[2 * p + d] = sd > 0.0 ? (features[2 * p + d] - m) / sd : 0.0;
  }
  const KMeansResult km = kmeans_cluster(features, 2, {.k = 2, .max_iter = 100, .restarts = 3, .seed = seed});

  // Mean DI per cluster; empty clusters never win.
  double sum[2] = {0.0, 0.0};
  std::size_t size[2] = {0, 0};
  for (std::size_t p = 0; p < n; ++p) {
    sum[km.ids[p]] += di.data()[p];
    ++size[km.ids[p]];
  }
  int changed_cluster = -1;
  if (size[0] > 0 && size[1] > 0) {
    const double m0 = sum[0] / static_cast<double>(size[0]);
    const double m1 = sum[1] / static_cast<double>(size[1]);
    if (m0 > m1) changed_cluster = 0;
    if (m1 > m0) changed_cluster = 1;
  }
  LabelField out(di.width(), di.height(), Label::unchanged);
  for (std::size_t p = 0; p < n; ++p) {
    if (km.ids[p] == changed_cluster) out[p] = Label::changed;
  }
  return out;
}

LabelField sample_training(const LabelField& labels, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ParameterError("sample ratio must lie in (0, 1]");
  std::vector<std::size_t> changed, unchanged;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (labels[p] == Label::changed) changed.push_back(p);
    if (labels[p] == Label::unchanged) unchanged.push_back(p);
  }
  const std::size_t total = changed.size() + unchanged.size();
  const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(total)));
  auto take_c = static_cast<std::ptrdiff_t>(std::llround(ratio * static_cast<double>(changed.size())));
  auto take_u = static_cast<std::ptrdiff_t>(std::llround(ratio * static_cast<double>(unchanged.size())));
  const auto diff = static_cast<std::ptrdiff_t>(target) - (take_c + take_u);
  if (changed.size() > unchanged.size()) {
    take_c += diff;
  } else {
    take_u += diff;
  }
  // Spill whatever a stratum cannot supply into the other one.
  const auto nc = static_cast<std::ptrdiff_t>(changed.size());
  const auto nu = static_cast<std::ptrdiff_t>(unchanged.size());
  if (take_c > nc) {
    take_u += take_c - nc;
    take_c = nc;
  }
  if (take_u > nu) {
    take_c += take_u - nu;
    take_u = nu;
  }
  take_c = std::clamp<std::ptrdiff_t>(take_c, 0, nc);
  take_u = std::clamp<std::ptrdiff_t>(take_u, 0, nu);

  Rng rng(seed);
  LabelField out(labels.width(), labels.height(), Label::unlabeled);
  for (std::size_t i : sample_without_replacement(changed.size(), static_cast<std::size_t>(take_c), rng)) {
    out[changed[i]] = Label::changed;
  }
  for (std::size_t i : sample_without_replacement(unchanged.size(), static_cast<std::size_t>(take_u), rng)) {
    out[unchanged[i]] = Label::unchanged;
  }
  return out;
}

}  // namespace dpdnet
