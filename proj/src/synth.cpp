#include "dpdnet/synth.hpp"

#include <cmath>
#include <random>

#include "dpdnet/error.hpp"
#include "dpdnet/random.hpp"

namespace dpdnet {

bool Shape::contains(int row, int col) const noexcept {
  const double px = col + 0.5;
  const double py = row + 0.5;
  if (kind == ShapeKind::rectangle) return px >= x && px < x + w && py >= y && py < y + h;
  const double rx = w / 2.0, ry = h / 2.0;
  const double dx = (px - (x + rx)) / rx;
  const double dy = (py - (y + ry)) / ry;
  return dx * dx + dy * dy <= 1.0;
}

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0) throw ParameterError("scene dimensions must be positive");
  if (!(looks > 0.0)) throw ParameterError("number of looks must be positive");
  if (!(gradient_from > 0.0) || !(gradient_to > 0.0)) throw ParameterError("base reflectance must be positive");
  auto inside = [&](const Shape& s) {
    return s.w > 0 && s.h > 0 && s.x >= 0 && s.y >= 0 && s.x + s.w <= width && s.y + s.h <= height;
  };
  for (const auto& p : patches) {
    if (!inside(p.shape)) throw ParameterError("reflectance patch outside the scene");
    if (!(p.reflectance > 0.0)) throw ParameterError("patch reflectance must be positive");
  }
  for (const auto& c : changes) {
    if (!inside(c.shape)) throw ParameterError("change region outside the scene");
    if (!(c.multiplier > 0.0)) throw ParameterError("change multiplier must be positive");
  }
}

SceneSpec default_scene(std::uint64_t seed) {
  SceneSpec s;
  s.width = 128;
  s.height = 128;
  s.gradient_from = 0.3;
  s.gradient_to = 0.6;
  s.patches = {
      {{ShapeKind::rectangle, 8, 66, 44, 30}, 0.85},
      {{ShapeKind::ellipse, 78, 8, 38, 30}, 0.15},
  };
  // 432 + 518 + 360 pixels, about 8% of the scene.
  s.changes = {
      {{ShapeKind::rectangle, 20, 20, 24, 18}, 4.0},
      {{ShapeKind::ellipse, 75, 60, 30, 22}, 0.25},
      {{ShapeKind::rectangle, 40, 95, 20, 18}, 3.0},
  };
  s.looks = 4.0;
  s.seed = seed;
  return s;
}

namespace {

ShapeKind parse_shape(const std::string& name) {
  if (name == "rectangle" || name == "rect") return ShapeKind::rectangle;
  if (name == "ellipse") return ShapeKind::ellipse;
  throw ParameterError("unknown shape '" + name + "'");
}

Shape shape_from_json(const nlohmann::json& j) {
  return {parse_shape(j.at("shape").get<std::string>()), j.at("x").get<double>(), j.at("y").get<double>(),
          j.at("w").get<double>(), j.at("h").get<double>()};
}

nlohmann::json shape_to_json(const Shape& s) {
  return {{"shape", s.kind == ShapeKind::rectangle ? "rectangle" : "ellipse"},
          {"x", s.x},
          {"y", s.y},
          {"w", s.w},
          {"h", s.h}};
}

}  // namespace

SceneSpec scene_from_json(const nlohmann::json& j) {
  SceneSpec s;
  try {
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.looks = j.value("looks", s.looks);
    s.seed = j.value("seed", s.seed);
    if (j.contains("gradient")) {
      s.gradient_from = j.at("gradient").at("from").get<double>();
      s.gradient_to = j.at("gradient").at("to").get<double>();
    }
    for (const auto& p : j.value("patches", nlohmann::json::array())) {
      s.patches.push_back({shape_from_json(p), p.at("reflectance").get<double>()});
    }
    for (const auto& c : j.value("changes", nlohmann::json::array())) {
      s.changes.push_back({shape_from_json(c), c.at("multiplier").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("bad scene description: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const SceneSpec& spec) {
  nlohmann::json patches = nlohmann::json::array();
  for (const auto& p : spec.patches) {
    auto j = shape_to_json(p.shape);
    j["reflectance"] = p.reflectance;
    patches.push_back(j);
  }
  nlohmann::json changes = nlohmann::json::array();
  for (const auto& c : spec.changes) {
    auto j = shape_to_json(c.shape);
    j["multiplier"] = c.multiplier;
    changes.push_back(j);
  }
  return {{"width", spec.width},
          {"height", spec.height},
          {"looks", spec.looks},
          {"seed", spec.seed},
          {"gradient", {{"from", spec.gradient_from}, {"to", spec.gradient_to}}},
          {"patches", patches},
          {"changes", changes}};
}

std::pair<Raster, Raster> reflectance_fields(const SceneSpec& spec) {
  spec.validate();
  Raster r1(spec.width, spec.height, 1);
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      const double t = spec.width > 1 ? static_cast<double>(col) / (spec.width - 1) : 0.0;
      double v = spec.gradient_from + t * (spec.gradient_to - spec.gradient_from);
      for (const auto& p : spec.patches) {
        if (p.shape.contains(row, col)) v = p.reflectance;
      }
      r1.at(row, col) = v;
    }
  }
  Raster r2 = r1;
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      for (const auto& c : spec.changes) {
        if (c.shape.contains(row, col)) r2.at(row, col) *= c.multiplier;
      }
    }
  }
  return {std::move(r1), std::move(r2)};
}

LabelField change_truth(const SceneSpec& spec) {
  spec.validate();
  LabelField gt(spec.width, spec.height, Label::unchanged);
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      double m = 1.0;
      for (const auto& c : spec.changes) {
        if (c.shape.contains(row, col)) m *= c.multiplier;
      }
      if (m != 1.0) gt.at(row, col) = Label::changed;
    }
  }
  return gt;
}

Raster speckle_field(int width, int height, double looks, std::uint64_t seed, std::uint64_t image_index) {
  if (!(looks > 0.0)) throw ParameterError("number of looks must be positive");
  Raster s(width, height, 1);
  const std::uint64_t image_seed = derive_seed(seed, image_index);
  auto d = s.data();
  for (std::size_t p = 0; p < d.size(); ++p) {
    SplitMix64 engine(derive_seed(image_seed, p));
    std::gamma_distribution<double> gamma(looks, 1.0 / looks);
    d[p] = gamma(engine);
  }
  return s;
}

ScenePair gen_pair(const SceneSpec& spec) {
  auto [r1, r2] = reflectance_fields(spec);
  const Raster s1 = speckle_field(spec.width, spec.height, spec.looks, spec.seed, 1);
  const Raster s2 = speckle_field(spec.width, spec.height, spec.looks, spec.seed, 2);
  ScenePair out{r1, r2, change_truth(spec), r1, r2};
  for (std::size_t p = 0; p < r1.pixel_count(); ++p) {
    out.i1.data()[p] = r1.data()[p] * s1.data()[p];
    out.i2.data()[p] = r2.data()[p] * s2.data()[p];
  }
  return out;
}

LabelField inject_label_noise(const LabelField& labels, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ParameterError("noise rate must lie in [0, 1]");
  std::vector<std::size_t> labeled;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (labels[p] != Label::unlabeled) labeled.push_back(p);
  }
  const auto flips = static_cast<std::size_t>(std::floor(rate * static_cast<double>(labeled.size()) + 1e-9));
  Rng rng(seed);
  LabelField out = labels;
  out.clear_soft();
  for (std::size_t i : sample_without_replacement(labeled.size(), flips, rng)) {
    out[labeled[i]] = flipped(out[labeled[i]]);
  }
  return out;
}

}  // namespace dpdnet
