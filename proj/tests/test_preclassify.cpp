#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "dpdnet/difference.hpp"
#include "dpdnet/error.hpp"
#include "dpdnet/preclassify.hpp"
#include "dpdnet/random.hpp"
#include "dpdnet/synth.hpp"
#include "oracles.hpp"

using namespace dpdnet;

TEST_CASE("well separated 1-D points split cleanly") {
  const std::vector<double> pts{0.0, 0.1, 10.0, 10.1};
  const KMeansResult r = kmeans_cluster(pts, 1, {2, 100, 1, 4});
  CHECK(r.ids[0] == r.ids[1]);
  CHECK(r.ids[2] == r.ids[3]);
  CHECK(r.ids[0] != r.ids[2]);
  CHECK(r.wcss == doctest::Approx(0.01));
}

TEST_CASE("identical points terminate with valid ids") {
  const std::vector<double> pts(10, 3.0);
  const KMeansResult r = kmeans_cluster(pts, 1, {2, 100, 2, 0});
  CHECK(r.degenerate);
  for (int id : r.ids) CHECK((id == 0 || id == 1));
  CHECK(r.wcss == 0.0);
}

TEST_CASE("restarted k-means reaches the exhaustive two-partition optimum") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> pts(12);
    for (double& v : pts) v = g(rng);
    const double best = oracle::best_two_partition_wcss(pts, 6, 2);
    const KMeansResult r = kmeans_cluster(pts, 2, {2, 100, 10, static_cast<std::uint64_t>(trial)});
    CHECK(r.wcss == doctest::Approx(best).epsilon(1e-12));
    CHECK(within_cluster_ss(pts, 2, r.ids, 2) == doctest::Approx(r.wcss).epsilon(1e-12));
  }
}

TEST_CASE("k-means objective never increases across Lloyd updates") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> pts(300);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = g(rng) + (i % 6 < 2 ? 2.0 : 0.0);
    const KMeansResult r = kmeans_cluster(pts, 3, {3, 100, 1, static_cast<std::uint64_t>(trial)});
    REQUIRE(!r.objective_trace.empty());
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] * (1.0 + 1e-12));
    }
    std::set<int> used(r.ids.begin(), r.ids.end());
    CHECK(used.size() == 3);
  }
}

TEST_CASE("k-means rejects invalid parameters") {
  const std::vector<double> pts{1.0, 2.0};
  CHECK_THROWS_AS(kmeans_cluster(pts, 1, {0, 10, 1, 0}), ParameterError);
  CHECK_THROWS_AS(kmeans_cluster({}, 1, {2, 10, 1, 0}), InputError);
}

TEST_CASE("bright block is preclassified as changed") {
  const int w = 7;
  Raster di(40, 40, 1, 0.0);
  for (int r = 16; r < 16 + w; ++r)
    for (int c = 20; c < 20 + w; ++c) di.at(r, c) = 1.0;
  const LabelField lf = preclassify_di(di, w, 3);
  CHECK(lf.fully_labeled());
  for (int r = 17; r < 16 + w - 1; ++r)
    for (int c = 21; c < 20 + w - 1; ++c) CHECK(lf.at(r, c) == Label::changed);
  CHECK(lf.at(0, 0) == Label::unchanged);
  CHECK(lf.at(39, 5) == Label::unchanged);
  CHECK(lf.at(5, 39) == Label::unchanged);
}

TEST_CASE("constant difference image is all unchanged") {
  const LabelField lf = preclassify_di(Raster(12, 9, 1, 0.4), 3, 1);
  CHECK(lf.count(Label::unchanged) == lf.size());
}

TEST_CASE("preclassify validates the patch size") {
  CHECK_THROWS_AS(preclassify_di(Raster(8, 8), 4, 0), ParameterError);
  CHECK_THROWS_AS(preclassify_di(Raster(8, 8), 1, 0), ParameterError);
}

TEST_CASE("pseudo labels on the default scene stay under 20% error") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ScenePair pair = gen_pair(default_scene(s));
    const LabelField lf = preclassify_di(log_ratio_di(pair.i1, pair.i2), 7, derive_seed(s, 1));
    CHECK(label_error_rate(lf, pair.truth) < 0.20);
  }
}

TEST_CASE("stratified sampling arithmetic") {
  std::vector<Label> labels(100, Label::unchanged);
  for (int i = 0; i < 20; ++i) labels[i * 5] = Label::changed;
  const LabelField lf(10, 10, labels);
  const LabelField s = sample_training(lf, 0.1, 42);
  CHECK(s.labeled_count() == 10);
  CHECK(s.count(Label::changed) == 2);
  CHECK(s.count(Label::unchanged) == 8);
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (s[p] != Label::unlabeled) CHECK(s[p] == lf[p]);
  }
  CHECK(sample_training(lf, 0.1, 42) == s);
  CHECK(sample_training(lf, 1.0, 7) == lf);
}

TEST_CASE("sampled count is round(ratio * N) for random fields") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 5 + trial % 11, h = 3 + trial % 7;
    std::vector<Label> labels(static_cast<std::size_t>(w * h));
    const double pc = u(rng);
    for (Label& l : labels) l = u(rng) < pc ? Label::changed : Label::unchanged;
    const LabelField lf(w, h, labels);
    const double ratio = 0.05 + 0.9 * u(rng);
    const LabelField s = sample_training(lf, ratio, static_cast<std::uint64_t>(trial));
    CHECK(s.labeled_count() == static_cast<std::size_t>(std::llround(ratio * w * h)));
  }
}

TEST_CASE("empty stratum spills over to the other class") {
  const LabelField lf(5, 4, Label::unchanged);
  const LabelField s = sample_training(lf, 0.25, 1);
  CHECK(s.labeled_count() == 5);
  CHECK(s.count(Label::changed) == 0);
  CHECK_THROWS_AS(sample_training(lf, 0.0, 1), ParameterError);
}

TEST_CASE("local mean of a constant raster is that constant") {
  const Raster m = local_mean(Raster(7, 5, 1, 2.5), 5);
  for (double v : m.data()) CHECK(v == doctest::Approx(2.5));
}
