#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpdnet/labels.hpp"
#include "dpdnet/raster.hpp"

namespace dpdnet {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t changed() const noexcept { return tp + fn; }    // N_c
  std::uint64_t unchanged() const noexcept { return tn + fp; }  // N_uc
  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
};

ConfusionCounts confusion(const LabelField& predicted, const LabelField& truth);

/// 1 - (FP + FN) / (N_c + N_uc).
double pcc(const ConfusionCounts& c);
/// Chance-agreement term of Cohen's kappa.
double kappa_expected(const ConfusionCounts& c);
/// (PCC - PRE) / (1 - PRE); defined as 0 when PRE = 1.
double kappa(const ConfusionCounts& c);
/// 2TP / (2TP + FP + FN); 0 when the denominator vanishes.
double f1(const ConfusionCounts& c);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Sweeps thresholds over distinct scores, highest first; equal scores move
/// together, which gives tied pairs half credit in the trapezoidal AUC.
RocCurve roc_auc(const Raster& scores, const LabelField& truth);

struct MetricReport {
  ConfusionCounts counts;
  double pcc = 0.0;
  double kc = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
};

MetricReport evaluate(const LabelField& predicted, const Raster& scores, const LabelField& truth);

nlohmann::json to_json(const MetricReport& report);
void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path);

}  // namespace dpdnet
