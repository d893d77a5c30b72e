#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dpdnet {

enum class Label : std::int8_t { unlabeled = -1, unchanged = 0, changed = 1 };

struct SoftLabel {
  double unchanged = 0.0;
  double changed = 0.0;
};

/// Argmax of a soft pair; ties resolve to unchanged.
constexpr Label hard_label(SoftLabel s) noexcept {
  return s.changed > s.unchanged ? Label::changed : Label::unchanged;
}

constexpr Label flipped(Label l) noexcept {
  switch (l) {
    case Label::changed: return Label::unchanged;
    case Label::unchanged: return Label::changed;
    default: return Label::unlabeled;
  }
}

/// Per-pixel hard labels with an optional soft pair per pixel.
class LabelField {
 public:
  LabelField() = default;
  LabelField(int width, int height, Label fill = Label::unlabeled);
  LabelField(int width, int height, std::vector<Label> labels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return labels_.size(); }

  Label operator[](std::size_t p) const noexcept { return labels_[p]; }
  Label& operator[](std::size_t p) noexcept { return labels_[p]; }
  Label at(int row, int col) const noexcept { return labels_[static_cast<std::size_t>(row) * width_ + col]; }
  Label& at(int row, int col) noexcept { return labels_[static_cast<std::size_t>(row) * width_ + col]; }

  std::span<const Label> labels() const noexcept { return labels_; }

  bool has_soft() const noexcept { return !soft_.empty(); }
  std::span<const SoftLabel> soft() const noexcept { return soft_; }
  /// Installs soft labels and re-derives every hard label from them.
  void set_soft(std::vector<SoftLabel> soft);
  void clear_soft() noexcept { soft_.clear(); }

  std::size_t count(Label l) const noexcept;
  std::size_t labeled_count() const noexcept { return size() - count(Label::unlabeled); }
  bool fully_labeled() const noexcept { return count(Label::unlabeled) == 0; }
  bool same_shape(const LabelField& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const LabelField& a, const LabelField& b) noexcept {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.labels_ == b.labels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Label> labels_;
  std::vector<SoftLabel> soft_;
};

/// Fraction of pixels labeled in `a` whose label differs from `truth`.
/// Pixels unlabeled in `a` are skipped; returns 0 when nothing is labeled.
double label_error_rate(const LabelField& a, const LabelField& truth);

}  // namespace dpdnet
