#include "dpdnet/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "dpdnet/error.hpp"

namespace dpdnet {

ConfusionCounts confusion(const LabelField& predicted, const LabelField& truth) {
  if (!predicted.same_shape(truth)) throw InputError("prediction and ground truth differ in size");
  ConfusionCounts c;
  for (std::size_t p = 0; p < truth.size(); ++p) {
    const Label pr = predicted[p];
    const Label gt = truth[p];
    if (pr == Label::unlabeled || gt == Label::unlabeled) throw InputError("unlabeled pixel in evaluation");
    if (gt == Label::changed) {
      (pr == Label::changed ? c.tp : c.fn) += 1;
    } else {
      (pr == Label::changed ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

double pcc(const ConfusionCounts& c) {
  const auto n = static_cast<double>(c.changed() + c.unchanged());
  if (n == 0.0) throw InputError("empty image");
  return 1.0 - static_cast<double>(c.fp + c.fn) / n;
}

double kappa_expected(const ConfusionCounts& c) {
  const auto n = static_cast<double>(c.total());
  if (n == 0.0) throw InputError("empty image");
  const auto nc = static_cast<double>(c.changed());
  const auto nuc = static_cast<double>(c.unchanged());
  const auto fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn);
  return ((nc + fp - fn) * nc + (nuc + fn - fp) * nuc) / (n * n);
}

double kappa(const ConfusionCounts& c) {
  const double pre = kappa_expected(c);
  if (pre >= 1.0) return 0.0;
  return (pcc(c) - pre) / (1.0 - pre);
}

double f1(const ConfusionCounts& c) {
  const auto denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
  return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
}

RocCurve roc_auc(const Raster& scores, const LabelField& truth) {
  if (scores.channels() != 1 || scores.width() != truth.width() || scores.height() != truth.height()) {
    throw InputError("scores and ground truth differ in size");
  }
  const std::size_t n = truth.size();
  std::size_t positives = 0, negatives = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (truth[p] == Label::changed) ++positives;
    else if (truth[p] == Label::unchanged) ++negatives;
    else throw InputError("unlabeled pixel in ground truth");
  }
  if (positives == 0 || negatives == 0) throw InputError("ROC needs both classes in the ground truth");

  const auto s = scores.data();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < n;) {
    const double value = s[order[i]];
    for (; i < n && s[order[i]] == value; ++i) {
      (truth[order[i]] == Label::changed ? tp : fp) += 1;
    }
    const RocPoint next{static_cast<double>(fp) / negatives, static_cast<double>(tp) / positives};
    const RocPoint& prev = curve.points.back();
    area += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) * 0.5;
    curve.points.push_back(next);
  }
  curve.auc = area;
  return curve;
}

MetricReport evaluate(const LabelField& predicted, const Raster& scores, const LabelField& truth) {
  MetricReport r;
  r.counts = confusion(predicted, truth);
  r.pcc = pcc(r.counts);
  r.kc = kappa(r.counts);
  r.f1 = f1(r.counts);
  r.auc = roc_auc(scores, truth).auc;
  return r;
}

nlohmann::json to_json(const MetricReport& report) {
  return {{"tp", report.counts.tp}, {"fp", report.counts.fp}, {"fn", report.counts.fn},
          {"tn", report.counts.tn}, {"pcc", report.pcc},       {"kc", report.kc},
          {"f1", report.f1},        {"auc", report.auc}};
}

void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "fpr,tpr\n" << std::setprecision(17);
  for (const RocPoint& p : curve.points) out << p.fpr << ',' << p.tpr << '\n';
}

}  // namespace dpdnet
