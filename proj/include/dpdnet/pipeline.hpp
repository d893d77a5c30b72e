#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpdnet/classifier.hpp"
#include "dpdnet/dpconv.hpp"
#include "dpdnet/labels.hpp"
#include "dpdnet/metrics.hpp"
#include "dpdnet/raster.hpp"
#include "dpdnet/synth.hpp"

namespace dpdnet {

struct PipelineConfig {
  double alpha = 0.7;
  int patch_size = 7;  // w
  double sample_ratio = 0.12;
  int depth = 4;  // D
  int kernels = 30;  // m
  int kernel_size = 5;  // k
  double threshold = 0.7;
  KernelMode kernel_mode = KernelMode::distinctive;
  KernelNorm kernel_norm = KernelNorm::zero_mean_unit;
  bool clean = true;
  bool conv = true;
  bool include_input = true;
  int rounds = 10;
  double labeled_fraction = 0.5;
  int regions = 0;  // 0 -> pixel_count / 64
  double compactness = 10.0;
  double svm_c = 1.0;
  int svm_epochs = 20;
  std::uint64_t seed = 0;

  std::filesystem::path t1;
  std::filesystem::path t2;
  std::filesystem::path gt;
  std::filesystem::path out_dir = ".";

  void validate() const;
};

/// Overrides fields present in `j` (snake_case keys); unknown keys throw.
void apply_json(PipelineConfig& cfg, const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& cfg);

/// Stage indices for derived seeds.
enum class Stage : std::uint64_t { preclassify = 1, sample = 2, clean = 3, features = 4, svm = 5 };

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineResult {
  Raster di;
  LabelField pseudo;
  LabelField training;
  LabelField cleaned;  // equals `training` when cleaning is off
  ChangePrediction prediction;
  std::optional<MetricReport> report;
  std::vector<StageTiming> timings;
};

/// Runs DI -> preclassify -> sample -> [clean] -> features -> SVM -> predict
/// -> [metrics] in memory.
PipelineResult run_pipeline(const Raster& i1, const Raster& i2, const LabelField* truth,
                            const PipelineConfig& cfg);

/// Input feature raster handed to the classifier or to DPConv: the DI.
Raster pipeline_input(const Raster& di);

/// Loads cfg.t1 / cfg.t2 (and cfg.gt if set), runs the pipeline and writes
/// change_map.pgm, scores.f32 (+ sidecar), metrics.json (when ground truth is
/// given), roc.csv (likewise) and timing.json into cfg.out_dir.
PipelineResult run_pipeline_files(const PipelineConfig& cfg);

/// Thrown when a named pipeline stage fails.
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_name(stage) {}
  std::string stage_name;
};

struct AblationRow {
  std::string name;
  bool conv = false;
  KernelMode mode = KernelMode::distinctive;
  bool clean = false;
};

/// Rows 1, 3, 4 and 6 of the ablation grid: baseline, random-patch conv,
/// cleaning only, distinctive conv with cleaning.
std::vector<AblationRow> ablation_rows();

struct BenchRowResult {
  AblationRow row;
  std::vector<MetricReport> runs;
  std::vector<std::vector<StageTiming>> timings;
};

/// Generates one scene per seed (scene seed = base seed + i) and runs every
/// ablation row on it with the same pipeline seed.
std::vector<BenchRowResult> run_ablation(const SceneSpec& spec, const PipelineConfig& base, int n_seeds,
                                         const std::vector<AblationRow>& rows);

nlohmann::json bench_summary(const std::vector<BenchRowResult>& results);

/// Label-map encodings used by the CLI: 0 / 255 PGM bytes.
Raster label_to_raster(const LabelField& labels);
LabelField raster_to_label(const Raster& r);

}  // namespace dpdnet
