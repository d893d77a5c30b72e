#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpdnet/labels.hpp"
#include "dpdnet/raster.hpp"

namespace dpdnet {

enum class ShapeKind { rectangle, ellipse };

/// Axis-aligned rectangle [x, x + w) x [y, y + h), or the ellipse inscribed in
/// that box.
struct Shape {
  ShapeKind kind = ShapeKind::rectangle;
  double x = 0, y = 0, w = 0, h = 0;

  bool contains(int row, int col) const noexcept;
};

struct ReflectancePatch {
  Shape shape;
  double reflectance = 0.5;
};

struct ChangeRegion {
  Shape shape;
  double multiplier = 1.0;
};

/// Description of a synthetic two-date scene. The base reflectance is a
/// linear gradient (left -> right) overlaid with constant patches; change
/// regions scale the reflectance on the second date.
struct SceneSpec {
  int width = 128;
  int height = 128;
  double gradient_from = 0.3;
  double gradient_to = 0.6;
  std::vector<ReflectancePatch> patches;
  std::vector<ChangeRegion> changes;
  double looks = 4.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// The 128 x 128, L = 4 scene with three change shapes covering about 8% of
/// the pixels.
SceneSpec default_scene(std::uint64_t seed = 0);

SceneSpec scene_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SceneSpec& spec);

struct ScenePair {
  Raster i1;
  Raster i2;
  LabelField truth;
  Raster reflectance1;
  Raster reflectance2;
};

/// Reflectance fields of both dates (noise free).
std::pair<Raster, Raster> reflectance_fields(const SceneSpec& spec);

/// Ground truth: changed exactly inside change regions whose multiplier is
/// not 1. Depends only on geometry.
LabelField change_truth(const SceneSpec& spec);

/// Gamma(L, 1/L) speckle, one independent stream per (seed, image, pixel).
Raster speckle_field(int width, int height, double looks, std::uint64_t seed, std::uint64_t image_index);

ScenePair gen_pair(const SceneSpec& spec);

/// Flips exactly floor(rate * labeled) labeled pixels chosen uniformly.
LabelField inject_label_noise(const LabelField& labels, double rate, std::uint64_t seed);

}  // namespace dpdnet
