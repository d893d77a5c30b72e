#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dpdnet/error.hpp"
#include "dpdnet/pipeline.hpp"
#include "dpdnet/raster_io.hpp"

using namespace dpdnet;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dpdnet_pipeline_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Small scene keeps the end-to-end cases fast.
SceneSpec small_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.width = spec.height = 48;
  spec.gradient_from = 0.3;
  spec.gradient_to = 0.5;
  spec.changes.push_back({{ShapeKind::rectangle, 8, 8, 14, 12}, 3.0});
  spec.changes.push_back({{ShapeKind::ellipse, 26, 28, 12, 12}, 0.3});
  spec.looks = 4.0;
  spec.seed = seed;
  return spec;
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.depth = 2;
  cfg.kernels = 8;
  cfg.sample_ratio = 0.3;
  return cfg;
}

}  // namespace

TEST_CASE("configuration defaults validate and JSON overrides apply") {
  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.alpha == 0.7);
  CHECK(cfg.patch_size == 7);
  CHECK(cfg.depth == 4);
  CHECK(cfg.kernels == 30);
  CHECK(cfg.kernel_size == 5);
  CHECK(cfg.threshold == 0.7);
  CHECK(cfg.sample_ratio == 0.12);

  apply_json(cfg, {{"alpha", 0.9}, {"kernel_mode", "random"}, {"clean", false}, {"seed", 42}});
  CHECK(cfg.alpha == 0.9);
  CHECK(cfg.kernel_mode == KernelMode::random);
  CHECK(!cfg.clean);
  CHECK(cfg.seed == 42);

  PipelineConfig back;
  apply_json(back, to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));

  CHECK_THROWS_AS(apply_json(cfg, {{"alhpa", 0.5}}), ParameterError);
  CHECK_THROWS_AS(apply_json(cfg, {{"depth", "deep"}}), ParameterError);
  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::array()), ParameterError);
}

TEST_CASE("invalid configurations are rejected") {
  auto bad = [](auto mutate) {
    PipelineConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
  };
  bad([](PipelineConfig& c) { c.alpha = 1.0; });
  bad([](PipelineConfig& c) { c.patch_size = 6; });
  bad([](PipelineConfig& c) { c.sample_ratio = 0.0; });
  bad([](PipelineConfig& c) { c.depth = 0; });
  bad([](PipelineConfig& c) { c.kernel_size = 4; });
  bad([](PipelineConfig& c) { c.labeled_fraction = 0.0; });
  bad([](PipelineConfig& c) { c.svm_c = -1.0; });
}

TEST_CASE("label rasters encode changed as one") {
  LabelField lf(3, 1, std::vector<Label>{Label::changed, Label::unchanged, Label::changed});
  const Raster r = label_to_raster(lf);
  CHECK(std::vector<double>(r.data().begin(), r.data().end()) == std::vector<double>{1.0, 0.0, 1.0});
  CHECK(raster_to_label(r) == lf);
  CHECK(raster_to_label(Raster(2, 1, 1, std::vector<double>{0.5, 0.51}))[1] == Label::changed);
  CHECK(raster_to_label(Raster(2, 1, 1, std::vector<double>{0.5, 0.51}))[0] == Label::unchanged);
  CHECK_THROWS_AS(raster_to_label(Raster(2, 1, 2)), ShapeError);
}

TEST_CASE("pipeline runs are deterministic and record every stage") {
  const ScenePair pair = gen_pair(small_scene(3));
  const PipelineConfig cfg = small_config();
  const PipelineResult a = run_pipeline(pair.i1, pair.i2, &pair.truth, cfg);
  const PipelineResult b = run_pipeline(pair.i1, pair.i2, &pair.truth, cfg);
  CHECK(a.prediction.map == b.prediction.map);
  CHECK(a.prediction.scores == b.prediction.scores);
  REQUIRE(a.report.has_value());
  CHECK(a.report->pcc == b.report->pcc);
  CHECK(a.report->pcc > 0.8);

  std::vector<std::string> stages;
  for (const auto& t : a.timings) stages.push_back(t.stage);
  CHECK(stages == std::vector<std::string>{"difference", "preclassify", "sample", "clean", "features", "train",
                                           "predict", "evaluate"});

  const PipelineResult none = run_pipeline(pair.i1, pair.i2, nullptr, cfg);
  CHECK(!none.report.has_value());
  CHECK(none.prediction.map == a.prediction.map);

  PipelineConfig off = cfg;
  off.clean = false;
  CHECK(run_pipeline(pair.i1, pair.i2, nullptr, off).cleaned == a.training);
}

TEST_CASE("stage failures name the stage") {
  const ScenePair pair = gen_pair(small_scene(1));
  Raster other(pair.i1.width() + 1, pair.i1.height());
  try {
    run_pipeline(pair.i1, other, nullptr, small_config());
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage_name == "difference");
  }
}

TEST_CASE("file runs write outputs and omit metrics without ground truth") {
  const auto dir = scratch_dir("files");
  const ScenePair pair = gen_pair(small_scene(5));
  save_raster(pair.i1, dir / "t1.f32", RasterFormat::f32raw);
  save_raster(pair.i2, dir / "t2.f32", RasterFormat::f32raw);
  save_raster(label_to_raster(pair.truth), dir / "gt.pgm", RasterFormat::pgm8);

  PipelineConfig cfg = small_config();
  cfg.t1 = dir / "t1.f32";
  cfg.t2 = dir / "t2.f32";
  cfg.out_dir = dir / "nogt";
  run_pipeline_files(cfg);
  CHECK(std::filesystem::exists(cfg.out_dir / "change_map.pgm"));
  CHECK(std::filesystem::exists(cfg.out_dir / "scores.f32"));
  CHECK(std::filesystem::exists(cfg.out_dir / "timing.json"));
  CHECK(!std::filesystem::exists(cfg.out_dir / "metrics.json"));
  CHECK(!std::filesystem::exists(cfg.out_dir / "roc.csv"));

  cfg.gt = dir / "gt.pgm";
  cfg.out_dir = dir / "gt";
  const PipelineResult r = run_pipeline_files(cfg);
  REQUIRE(r.report.has_value());
  std::ifstream in(cfg.out_dir / "metrics.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j.at("pcc").get<double>() == r.report->pcc);
  CHECK(std::filesystem::exists(cfg.out_dir / "roc.csv"));

  const LabelField written = raster_to_label(load_raster(cfg.out_dir / "change_map.pgm", RasterFormat::pgm8));
  CHECK(written == r.prediction.map);

  PipelineConfig missing = small_config();
  missing.t1 = dir / "absent.pgm";
  missing.t2 = dir / "t2.f32";
  missing.out_dir = dir / "missing";
  CHECK_THROWS_AS(run_pipeline_files(missing), StageError);
}

TEST_CASE("ablation rows and bench summary") {
  const auto rows = ablation_rows();
  REQUIRE(rows.size() == 4);
  CHECK((!rows[0].conv && !rows[0].clean));
  CHECK((rows[1].conv && rows[1].mode == KernelMode::random && !rows[1].clean));
  CHECK((!rows[2].conv && rows[2].clean));
  CHECK((rows[3].conv && rows[3].mode == KernelMode::distinctive && rows[3].clean));

  const auto results = run_ablation(small_scene(7), small_config(), 2, rows);
  const auto summary = bench_summary(results);
  REQUIRE(summary.at("rows").size() == 4);
  for (const auto& row : summary.at("rows")) {
    CHECK(row.at("runs").get<int>() == 2);
    const double pcc = row.at("pcc").at("mean").get<double>();
    CHECK(pcc >= 0.0);
    CHECK(pcc <= 1.0);
    CHECK(row.at("pcc").at("stdev").get<double>() >= 0.0);
  }
  CHECK_THROWS_AS(run_ablation(small_scene(7), small_config(), 0, rows), ParameterError);

  // Same scene and seed: the ablation row reproduces a direct run.
  PipelineConfig direct = small_config();
  direct.conv = false;
  direct.clean = false;
  const ScenePair pair = gen_pair(small_scene(7));
  CHECK(run_pipeline(pair.i1, pair.i2, &pair.truth, direct).report->pcc == results[0].runs[0].pcc);
}

TEST_CASE("the full method beats the baseline on the default scene") {
  const std::vector<AblationRow> rows{ablation_rows()[0], ablation_rows()[3]};
  const auto results = run_ablation(default_scene(0), PipelineConfig{}, 5, rows);
  double baseline = 0.0, full = 0.0;
  for (int i = 0; i < 5; ++i) baseline += results[0].runs[i].pcc, full += results[1].runs[i].pcc;
  CHECK(full >= baseline);
}
