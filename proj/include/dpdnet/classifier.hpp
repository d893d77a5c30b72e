#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpdnet/dpconv.hpp"
#include "dpdnet/labels.hpp"
#include "dpdnet/raster.hpp"

namespace dpdnet {

/// Per-dimension affine standardisation fitted on the labeled pixels.
/// Zero-variance dimensions keep stdev 1 and are listed in `dropped`; their
/// standardised value is always 0.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> stdev;
  std::vector<int> dropped;

  void apply(std::span<const double> in, std::span<double> out) const;
};

struct SampleSet {
  int dim = 0;
  std::vector<double> x;  // rows * dim, standardised
  std::vector<int> y;     // +1 changed, -1 unchanged
  std::vector<std::size_t> pixels;
  Standardization scaler;

  std::size_t rows() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const noexcept {
    return {x.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// One standardised sample per labeled pixel. Throws DegenerateTrainingError
/// unless both classes are present.
SampleSet build_samples(const FeatureStack& features, const LabelField& labels);

struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double c = 1.0;
  Standardization scaler;

  /// Raw feature vector -> decision value w . standardise(x) + b.
  double decision(std::span<const double> features) const;
};

struct SvmOptions {
  double c = 1.0;
  int epochs = 20;
  std::uint64_t seed = 0;
};

/// (1/2)|w|^2 + C * sum_i max(0, 1 - y_i (w . x_i + b)).
double svm_objective(std::span<const double> w, double b, const SampleSet& samples, double c);

/// A subgradient of `svm_objective` (exact gradient away from hinge kinks).
/// `grad_w` must have `samples.dim` entries.
void svm_subgradient(std::span<const double> w, double b, const SampleSet& samples, double c,
                     std::span<double> grad_w, double& grad_b);

/// Linear soft-margin SVM by seeded stochastic subgradient descent with step
/// 1 / (lambda t), lambda = 1 / (C n). The bias is shrunk with w during
/// descent; w is the averaged iterate of the final epoch and b is then the
/// exact unregularised hinge minimiser for that w. The scaler of `samples` is
/// attached to the model.
SvmModel train_svm(const SampleSet& samples, const SvmOptions& options);

struct ChangePrediction {
  LabelField map;
  Raster scores;
};

/// changed iff decision value > 0.
ChangePrediction predict_map(const SvmModel& model, const FeatureStack& features);

nlohmann::json to_json(const SvmModel& model);
SvmModel svm_from_json(const nlohmann::json& j);

}  // namespace dpdnet
