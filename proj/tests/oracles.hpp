#pragma once

// Reference computations used only by tests. Each one takes the slow, obvious
// route and shares no code with the library path it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// Mirror an index into [0, n) by repeated folding.
inline int mirror(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

// img: h x w x c interleaved; kernel: k x k x c interleaved. One output
// channel, ReLU applied.
inline std::vector<double> naive_conv(const std::vector<double>& img, int w, int h, int c,
                                      const std::vector<double>& kernel, int k) {
  std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
  const int r = k / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = 0; dy < k; ++dy) {
        for (int dx = 0; dx < k; ++dx) {
          const int sy = mirror(y + dy - r, h);
          const int sx = mirror(x + dx - r, w);
          for (int ch = 0; ch < c; ++ch) {
            acc += kernel[(static_cast<std::size_t>(dy) * k + dx) * c + ch] *
                   img[(static_cast<std::size_t>(sy) * w + sx) * c + ch];
          }
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = acc > 0.0 ? acc : 0.0;
    }
  }
  return out;
}

// Cyclic Jacobi rotations on a symmetric n x n matrix (row-major). Returns
// eigenvalues sorted descending.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n) {
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(at(p, q)) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = cs * akp - sn * akq;
          at(k, q) = sn * akp + cs * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = cs * apk - sn * aqk;
          at(q, k) = sn * apk + cs * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = at(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

// Sample covariance (n - 1) of row-major samples.
inline std::vector<double> covariance(const std::vector<double>& x, std::size_t n, int c) {
  std::vector<double> mean(static_cast<std::size_t>(c), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < c; ++j) mean[j] += x[i * c + j];
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<double> cov(static_cast<std::size_t>(c) * c, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < c; ++a)
      for (int b = 0; b < c; ++b) cov[a * c + b] += (x[i * c + a] - mean[a]) * (x[i * c + b] - mean[b]);
  for (double& v : cov) v /= static_cast<double>(n - 1);
  return cov;
}

// P(score_pos > score_neg) + 0.5 P(tie) over all pairs.
inline double mann_whitney_auc(const std::vector<double>& scores, const std::vector<int>& positive) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Minimum within-cluster sum of squares over every split into two non-empty
// groups. Point 0 is pinned to group A, so each partition is seen once.
inline double best_two_partition_wcss(const std::vector<double>& pts, std::size_t n, int dim) {
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    std::vector<int> g(n, 0);
    for (std::size_t i = 1; i < n; ++i) g[i] = (mask >> (i - 1)) & 1;
    double total = 0.0;
    bool empty = false;
    for (int grp = 0; grp < 2; ++grp) {
      std::vector<double> c(static_cast<std::size_t>(dim), 0.0);
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (g[i] != grp) continue;
        ++cnt;
        for (int d = 0; d < dim; ++d) c[d] += pts[i * dim + d];
      }
      if (cnt == 0) {
        empty = true;
        break;
      }
      for (double& v : c) v /= static_cast<double>(cnt);
      for (std::size_t i = 0; i < n; ++i) {
        if (g[i] != grp) continue;
        for (int d = 0; d < dim; ++d) total += (pts[i * dim + d] - c[d]) * (pts[i * dim + d] - c[d]);
      }
    }
    if (!empty) best = std::min(best, total);
  }
  return best;
}

// Gaussian elimination with partial pivoting; a is n x n row-major.
inline std::vector<double> solve(std::vector<double> a, std::vector<double> b, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (piv != col) {
      for (int k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
    x[r] = s / a[r * n + r];
  }
  return x;
}

}  // namespace oracle
