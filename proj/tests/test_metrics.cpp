#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "dpdnet/error.hpp"
#include "dpdnet/metrics.hpp"
#include "oracles.hpp"

using namespace dpdnet;

namespace {

LabelField random_labels(int w, int h, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LabelField lf(w, h, Label::unchanged);
  for (std::size_t i = 0; i < lf.size(); ++i) lf[i] = u(rng) < p ? Label::changed : Label::unchanged;
  return lf;
}

}  // namespace

TEST_CASE("worked confusion counts") {
  const ConfusionCounts c{80, 10, 20, 890};
  CHECK(std::abs(pcc(c) - 0.97) <= 1e-9);
  CHECK(std::abs(kappa_expected(c) - 0.828) <= 1e-9);
  CHECK(std::abs(kappa(c) - (0.97 - 0.828) / 0.172) <= 1e-9);
  CHECK(std::abs(f1(c) - 160.0 / 190.0) <= 1e-9);
  CHECK(pcc(ConfusionCounts{0, 10, 20, 970}) == doctest::Approx(0.97).epsilon(1e-15));
}

TEST_CASE("pcc equals plain accuracy") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> u(0, 5000);
  for (int i = 0; i < 1000; ++i) {
    const ConfusionCounts c{u(rng), u(rng), u(rng), u(rng) + 1};
    const double acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    CHECK(std::abs(pcc(c) - acc) <= 1e-12);
    CHECK(pcc(c) >= 0.0);
    CHECK(pcc(c) <= 1.0);
    CHECK(kappa(c) <= 1.0);
  }
}

TEST_CASE("degenerate metric definitions") {
  CHECK(pcc(ConfusionCounts{5, 0, 0, 5}) == 1.0);
  CHECK(f1(ConfusionCounts{0, 0, 0, 9}) == 0.0);
  CHECK(f1(ConfusionCounts{0, 3, 2, 9}) == 0.0);
  CHECK(f1(ConfusionCounts{4, 0, 0, 9}) == 1.0);
  CHECK(kappa(ConfusionCounts{0, 0, 0, 9}) == 0.0);  // PRE = 1
  CHECK(kappa(ConfusionCounts{4, 0, 0, 9}) == 1.0);
  CHECK_THROWS_AS(pcc(ConfusionCounts{}), InputError);
}

TEST_CASE("constant predictors have zero kappa") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const LabelField truth = random_labels(9, 7, 0.3, rng);
    if (truth.count(Label::changed) == 0) continue;
    CHECK(std::abs(kappa(confusion(LabelField(9, 7, Label::unchanged), truth))) < 1e-12);
    CHECK(std::abs(kappa(confusion(LabelField(9, 7, Label::changed), truth))) < 1e-12);
  }
}

TEST_CASE("confusion matches a per-pixel count") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const LabelField a = random_labels(16, 16, 0.4, rng);
    const LabelField b = random_labels(16, 16, 0.3, rng);
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t p = 0; p < a.size(); ++p) {
      const bool pc = a[p] == Label::changed, tc = b[p] == Label::changed;
      tp += pc && tc, fp += pc && !tc, fn += !pc && tc, tn += !pc && !tc;
    }
    const ConfusionCounts c = confusion(a, b);
    CHECK(c.tp == tp);
    CHECK(c.fp == fp);
    CHECK(c.fn == fn);
    CHECK(c.tn == tn);
  }
  const LabelField t = random_labels(5, 5, 0.5, rng);
  CHECK(confusion(t, t).fp == 0);
  CHECK(confusion(t, t).fn == 0);
  LabelField comp = t;
  for (std::size_t p = 0; p < comp.size(); ++p) comp[p] = flipped(t[p]);
  CHECK(confusion(comp, t).tp == 0);
  CHECK(confusion(comp, t).tn == 0);
}

TEST_CASE("confusion rejects unlabeled pixels and shape mismatch") {
  LabelField a(3, 3, Label::changed);
  const LabelField b(3, 3, Label::unchanged);
  CHECK_THROWS_AS(confusion(a, LabelField(3, 2, Label::changed)), InputError);
  a[4] = Label::unlabeled;
  CHECK_THROWS_AS(confusion(a, b), InputError);
}

TEST_CASE("auc equals the Mann-Whitney statistic") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const LabelField truth = random_labels(20, 10, 0.35, rng);
    Raster scores(20, 10);
    for (std::size_t p = 0; p < truth.size(); ++p) {
      // Half the trials use a 7-level score so ties are common.
      const double base = trial % 2 ? static_cast<double>(coarse(rng)) : g(rng);
      scores.data()[p] = base + (truth[p] == Label::changed && trial % 2 == 0 ? 0.8 : 0.0);
    }
    std::vector<double> s(scores.data().begin(), scores.data().end());
    std::vector<int> pos(truth.size());
    for (std::size_t p = 0; p < truth.size(); ++p) pos[p] = truth[p] == Label::changed;
    const RocCurve roc = roc_auc(scores, truth);
    CHECK(std::abs(roc.auc - oracle::mann_whitney_auc(s, pos)) <= 1e-9);
    CHECK(roc.points.front().fpr == 0.0);
    CHECK(roc.points.front().tpr == 0.0);
    CHECK(roc.points.back().fpr == 1.0);
    CHECK(roc.points.back().tpr == 1.0);
  }
}

TEST_CASE("auc extremes and invariance") {
  LabelField truth(4, 1, std::vector<Label>{Label::changed, Label::unchanged, Label::changed, Label::unchanged});
  Raster perfect(4, 1, 1, std::vector<double>{0.9, 0.1, 0.8, 0.2});
  CHECK(roc_auc(perfect, truth).auc == 1.0);
  const RocCurve flat = roc_auc(Raster(4, 1, 1, 0.3), truth);
  CHECK(flat.auc == 0.5);
  CHECK(flat.points.size() == 2);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  const LabelField t2 = random_labels(30, 5, 0.4, rng);
  Raster s(30, 5);
  for (double& v : s.data()) v = g(rng);
  Raster e = s;
  for (double& v : e.data()) v = std::exp(3.0 * v) + 2.0;
  CHECK(roc_auc(s, t2).auc == doctest::Approx(roc_auc(e, t2).auc).epsilon(1e-15));
  CHECK_THROWS_AS(roc_auc(s, LabelField(30, 5, Label::changed)), InputError);
}

TEST_CASE("report serialisation") {
  const LabelField truth(2, 2, std::vector<Label>{Label::changed, Label::unchanged, Label::unchanged, Label::changed});
  Raster scores(2, 2, 1, std::vector<double>{1.0, -1.0, 0.5, 2.0});
  LabelField pred = truth;
  pred[2] = Label::changed;
  const MetricReport r = evaluate(pred, scores, truth);
  const auto j = to_json(r);
  CHECK(j.at("fp").get<std::uint64_t>() == 1);
  CHECK(j.at("pcc").get<double>() == doctest::Approx(0.75));
  const auto path = std::filesystem::temp_directory_path() / "dpdnet_roc_test.csv";
  write_roc_csv(roc_auc(scores, truth), path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "fpr,tpr");
}
