#include "dpdnet/labels.hpp"

#include <algorithm>
#include <cmath>

#include "dpdnet/error.hpp"

namespace dpdnet {

LabelField::LabelField(int width, int height, Label fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw ShapeError("label field dimensions must be positive");
  labels_.assign(static_cast<std::size_t>(width) * height, fill);
}

LabelField::LabelField(int width, int height, std::vector<Label> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width <= 0 || height <= 0) throw ShapeError("label field dimensions must be positive");
  if (labels_.size() != static_cast<std::size_t>(width) * height) throw ShapeError("label count mismatch");
}

void LabelField::set_soft(std::vector<SoftLabel> soft) {
  if (soft.size() != labels_.size()) throw ShapeError("soft label count mismatch");
  for (std::size_t p = 0; p < soft.size(); ++p) {
    if (!std::isfinite(soft[p].unchanged) || !std::isfinite(soft[p].changed)) {
      throw InputError("soft labels must be finite");
    }
    labels_[p] = hard_label(soft[p]);
  }
  soft_ = std::move(soft);
}

std::size_t LabelField::count(Label l) const noexcept {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), l));
}

double label_error_rate(const LabelField& a, const LabelField& truth) {
  if (!a.same_shape(truth)) throw ShapeError("label fields differ in size");
  std::size_t labeled = 0;
  std::size_t wrong = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    if (a[p] == Label::unlabeled) continue;
    ++labeled;
    if (a[p] != truth[p]) ++wrong;
  }
  return labeled == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(labeled);
}

}  // namespace dpdnet
