#include "dpdnet/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "dpdnet/error.hpp"
#include "dpdnet/random.hpp"

namespace dpdnet {

void Standardization::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t d = 0; d < mean.size(); ++d) out[d] = (in[d] - mean[d]) / stdev[d];
  for (int d : dropped) out[d] = 0.0;
}

SampleSet build_samples(const FeatureStack& features, const LabelField& labels) {
  const Raster& data = features.data;
  if (data.width() != labels.width() || data.height() != labels.height()) {
    throw ShapeError("features and labels differ in size");
  }
  if (labels.count(Label::changed) == 0 || labels.count(Label::unchanged) == 0) {
    throw DegenerateTrainingError("training labels must contain both classes");
  }
  SampleSet s;
  s.dim = data.channels();
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (labels[p] == Label::unlabeled) continue;
    const auto v = data.pixel(p);
    for (double x : v) {
      if (!std::isfinite(x)) throw InputError("non-finite feature value");
    }
    s.x.insert(s.x.end(), v.begin(), v.end());
    s.y.push_back(labels[p] == Label::changed ? 1 : -1);
    s.pixels.push_back(p);
  }

  const std::size_t n = s.rows();
  const auto dim = static_cast<std::size_t>(s.dim);
  s.scaler.mean.assign(dim, 0.0);
  s.scaler.stdev.assign(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) s.scaler.mean[d] += s.x[i * dim + d];
  }
  for (double& m : s.scaler.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = s.x[i * dim + d] - s.scaler.mean[d];
      s.scaler.stdev[d] += diff * diff;
    }
  }
  for (std::size_t d = 0; d < dim; ++d) {
    const double sd = std::sqrt(s.scaler.stdev[d] / static_cast<double>(n));
    if (sd > 1e-12 * std::max(1.0, std::abs(s.scaler.mean[d]))) {
      s.scaler.stdev[d] = sd;
    } else {
      s.scaler.stdev[d] = 1.0;
      s.scaler.dropped.push_back(static_cast<int>(d));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> row(s.x.data() + i * dim, dim);
    s.scaler.apply(row, row);
  }
  return s;
}

double SvmModel::decision(std::span<const double> features) const {
  double s = bias;
  for (std::size_t d = 0; d < weights.size(); ++d) {
    const double z = (features[d] - scaler.mean[d]) / scaler.stdev[d];
    s += weights[d] * z;
  }
  return s;
}

double svm_objective(std::span<const double> w, double b, const SampleSet& samples, double c) {
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const auto x = samples.row(i);
    const double f = std::inner_product(w.begin(), w.end(), x.begin(), b);
    loss += std::max(0.0, 1.0 - samples.y[i] * f);
  }
  return 0.5 * reg + c * loss;
}

void svm_subgradient(std::span<const double> w, double b, const SampleSet& samples, double c,
                     std::span<double> grad_w, double& grad_b) {
  std::copy(w.begin(), w.end(), grad_w.begin());
  grad_b = 0.0;
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const auto x = samples.row(i);
    const double f = std::inner_product(w.begin(), w.end(), x.begin(), b);
    if (samples.y[i] * f < 1.0) {
      for (std::size_t d = 0; d < w.size(); ++d) grad_w[d] -= c * samples.y[i] * x[d];
      grad_b -= c * samples.y[i];
    }
  }
}

namespace {

// Exact minimiser of the hinge sum over b for fixed w. The sum is convex and
// piecewise linear with kinks at y_i - f_i; its slope just right of a kink is
// (#negatives at or left of it) - (#positives right of it).
double refit_bias(const std::vector<double>& w, const SampleSet& samples) {
  const std::size_t n = samples.rows();
  std::vector<std::pair<double, int>> kinks(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = samples.row(i);
    const double f = std::inner_product(w.begin(), w.end(), x.begin(), 0.0);
    kinks[i] = {samples.y[i] - f, samples.y[i]};
  }
  std::sort(kinks.begin(), kinks.end());
  long long pos_right = 0;
  for (const auto& k : kinks) pos_right += k.second > 0;
  long long neg_left = 0;
  for (const auto& k : kinks) {
    (k.second > 0 ? pos_right : neg_left) += k.second > 0 ? -1 : 1;
    if (neg_left - pos_right >= 0) return k.first;
  }
  return kinks.back().first;
}

}  // namespace

SvmModel train_svm(const SampleSet& samples, const SvmOptions& options) {
  if (!(options.c > 0.0)) throw ParameterError("SVM C must be positive");
  if (options.epochs < 1) throw ParameterError("SVM needs at least one epoch");
  const std::size_t n = samples.rows();
  if (n == 0) throw DegenerateTrainingError("no training samples");
  bool pos = false, neg = false;
  for (int y : samples.y) (y > 0 ? pos : neg) = true;
  if (!pos || !neg) throw DegenerateTrainingError("training labels must contain both classes");
  for (double v : samples.x) {
    if (!std::isfinite(v)) throw InputError("non-finite feature value");
  }

  const auto dim = static_cast<std::size_t>(samples.dim);
  const double lambda = 1.0 / (options.c * static_cast<double>(n));
  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  std::vector<double> avg_w(dim, 0.0);

  Rng rng(options.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const bool last = epoch + 1 == options.epochs;
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto x = samples.row(i);
      const double y = samples.y[i];
      const double f = std::inner_product(w.begin(), w.end(), x.begin(), b);
      const double shrink = 1.0 - eta * lambda;
      for (double& v : w) v *= shrink;
      b *= shrink;
      if (y * f < 1.0) {
        for (std::size_t d = 0; d < dim; ++d) w[d] += eta * y * x[d];
        b += eta * y;
      }
      if (last) {
        for (std::size_t d = 0; d < dim; ++d) avg_w[d] += w[d];
      }
    }
  }
  SvmModel model;
  model.weights.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) model.weights[d] = avg_w[d] / static_cast<double>(n);
  for (int d : samples.scaler.dropped) model.weights[d] = 0.0;
  model.bias = refit_bias(model.weights, samples);
  model.c = options.c;
  model.scaler = samples.scaler;
  return model;
}

ChangePrediction predict_map(const SvmModel& model, const FeatureStack& features) {
  const Raster& data = features.data;
  if (static_cast<std::size_t>(data.channels()) != model.weights.size()) {
    throw ShapeError("model expects " + std::to_string(model.weights.size()) + " features, stack has " +
                     std::to_string(data.channels()));
  }
  ChangePrediction out{LabelField(data.width(), data.height(), Label::unchanged),
                       Raster(data.width(), data.height(), 1)};
  for (std::size_t p = 0; p < data.pixel_count(); ++p) {
    const double s = model.decision(data.pixel(p));
    out.scores.data()[p] = s;
    if (s > 0.0) out.map[p] = Label::changed;
  }
  return out;
}

nlohmann::json to_json(const SvmModel& model) {
  return {{"weights", model.weights},
          {"bias", model.bias},
          {"c", model.c},
          {"mean", model.scaler.mean},
          {"stdev", model.scaler.stdev},
          {"dropped", model.scaler.dropped}};
}

SvmModel svm_from_json(const nlohmann::json& j) {
  SvmModel m;
  try {
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.c = j.at("c").get<double>();
    m.scaler.mean = j.at("mean").get<std::vector<double>>();
    m.scaler.stdev = j.at("stdev").get<std::vector<double>>();
    m.scaler.dropped = j.value("dropped", std::vector<int>{});
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad SVM model record: ") + e.what());
  }
  if (m.scaler.mean.size() != m.weights.size() || m.scaler.stdev.size() != m.weights.size()) {
    throw InputError("SVM model record has inconsistent lengths");
  }
  for (double s : m.scaler.stdev) {
    if (!(s > 0.0)) throw InputError("SVM model record has non-positive stdev");
  }
  return m;
}

}  // namespace dpdnet
