#include "dpdnet/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "dpdnet/difference.hpp"
#include "dpdnet/error.hpp"
#include "dpdnet/preclassify.hpp"
#include "dpdnet/random.hpp"
#include "dpdnet/raster_io.hpp"
#include "dpdnet/rlpa.hpp"

namespace dpdnet {
namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

  template <class Fn>
  auto run(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(name, start);
      } else {
        auto result = fn();
        record(name, start);
        return result;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    sink_.push_back({name, dt.count()});
  }

  std::vector<StageTiming>& sink_;
};

std::uint64_t stage_seed(const PipelineConfig& cfg, Stage stage) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(stage));
}

KernelNorm parse_kernel_norm(const std::string& name) {
  if (name == "none") return KernelNorm::none;
  if (name == "unit") return KernelNorm::unit;
  if (name == "zero_mean_unit") return KernelNorm::zero_mean_unit;
  throw ParameterError("unknown kernel normalisation '" + name + "'");
}

std::string kernel_norm_name(KernelNorm norm) {
  switch (norm) {
    case KernelNorm::none: return "none";
    case KernelNorm::unit: return "unit";
    case KernelNorm::zero_mean_unit: return "zero_mean_unit";
  }
  return "unit";
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Raster load_input(const std::filesystem::path& path) {
  const RasterFormat format = format_from_path(path);
  return format == RasterFormat::f32raw ? load_raster(path, format) : load_pgm(path);
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (patch_size < 3 || patch_size % 2 == 0) throw ParameterError("patch size must be odd and >= 3");
  if (!(sample_ratio > 0.0 && sample_ratio <= 1.0)) throw ParameterError("sample ratio must lie in (0, 1]");
  if (depth < 1) throw ParameterError("depth must be >= 1");
  if (kernels < 1) throw ParameterError("kernel count must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw ParameterError("kernel size must be odd");
  if (rounds < 1) throw ParameterError("rounds must be >= 1");
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) throw ParameterError("labeled fraction must lie in (0, 1]");
  if (regions < 0) throw ParameterError("region count must be >= 0");
  if (!(compactness > 0.0)) throw ParameterError("compactness must be positive");
  if (!(svm_c > 0.0)) throw ParameterError("SVM C must be positive");
  if (svm_epochs < 1) throw ParameterError("SVM epochs must be >= 1");
}

void apply_json(PipelineConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "patch_size") cfg.patch_size = value.get<int>();
      else if (key == "sample_ratio") cfg.sample_ratio = value.get<double>();
      else if (key == "depth") cfg.depth = value.get<int>();
      else if (key == "kernels") cfg.kernels = value.get<int>();
      else if (key == "kernel_size") cfg.kernel_size = value.get<int>();
      else if (key == "threshold") cfg.threshold = value.get<double>();
      else if (key == "kernel_mode") cfg.kernel_mode = parse_kernel_mode(value.get<std::string>());
      else if (key == "kernel_norm") cfg.kernel_norm = parse_kernel_norm(value.get<std::string>());
      else if (key == "clean") cfg.clean = value.get<bool>();
      else if (key == "conv") cfg.conv = value.get<bool>();
      else if (key == "include_input") cfg.include_input = value.get<bool>();
      else if (key == "rounds") cfg.rounds = value.get<int>();
      else if (key == "labeled_fraction") cfg.labeled_fraction = value.get<double>();
      else if (key == "regions") cfg.regions = value.get<int>();
      else if (key == "compactness") cfg.compactness = value.get<double>();
      else if (key == "svm_c") cfg.svm_c = value.get<double>();
      else if (key == "svm_epochs") cfg.svm_epochs = value.get<int>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "t1") cfg.t1 = value.get<std::string>();
      else if (key == "t2") cfg.t2 = value.get<std::string>();
      else if (key == "gt") cfg.gt = value.get<std::string>();
      else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
      else throw ParameterError("unknown configuration key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError("configuration key '" + key + "': " + e.what());
    }
  }
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  return {{"alpha", cfg.alpha},
          {"patch_size", cfg.patch_size},
          {"sample_ratio", cfg.sample_ratio},
          {"depth", cfg.depth},
          {"kernels", cfg.kernels},
          {"kernel_size", cfg.kernel_size},
          {"threshold", cfg.threshold},
          {"kernel_mode", std::string(to_string(cfg.kernel_mode))},
          {"kernel_norm", kernel_norm_name(cfg.kernel_norm)},
          {"clean", cfg.clean},
          {"conv", cfg.conv},
          {"include_input", cfg.include_input},
          {"rounds", cfg.rounds},
          {"labeled_fraction", cfg.labeled_fraction},
          {"regions", cfg.regions},
          {"compactness", cfg.compactness},
          {"svm_c", cfg.svm_c},
          {"svm_epochs", cfg.svm_epochs},
          {"seed", cfg.seed}};
}

Raster pipeline_input(const Raster& di) { return di; }

PipelineResult run_pipeline(const Raster& i1, const Raster& i2, const LabelField* truth,
                            const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult out;
  StageClock clock(out.timings);

  out.di = clock.run("difference", [&] { return log_ratio_di(i1, i2); });
  out.pseudo = clock.run("preclassify",
                         [&] { return preclassify_di(out.di, cfg.patch_size, stage_seed(cfg, Stage::preclassify)); });
  out.training = clock.run(
      "sample", [&] { return sample_training(out.pseudo, cfg.sample_ratio, stage_seed(cfg, Stage::sample)); });
  if (cfg.clean) {
    out.cleaned = clock.run("clean", [&] {
      CleaningOptions opts;
      opts.alpha = cfg.alpha;
      opts.n_regions = cfg.regions;
      opts.compactness = cfg.compactness;
      opts.rounds = cfg.rounds;
      opts.labeled_fraction = cfg.labeled_fraction;
      return clean_labels(out.di, out.training, opts, stage_seed(cfg, Stage::clean));
    });
  } else {
    out.cleaned = out.training;
  }
  const FeatureStack features = clock.run("features", [&] {
    const Raster input = pipeline_input(out.di);
    if (!cfg.conv) return input_features(input);
    StackOptions opts;
    opts.depth = cfg.depth;
    opts.selection = {cfg.kernel_mode, cfg.kernels, cfg.kernel_size, cfg.threshold, cfg.kernel_norm};
    opts.include_input = cfg.include_input;
    return stack_features(input, opts, stage_seed(cfg, Stage::features));
  });
  const SvmModel model = clock.run("train", [&] {
    const SampleSet samples = build_samples(features, out.cleaned);
    return train_svm(samples, {cfg.svm_c, cfg.svm_epochs, stage_seed(cfg, Stage::svm)});
  });
  out.prediction = clock.run("predict", [&] { return predict_map(model, features); });
  if (truth) {
    out.report = clock.run("evaluate", [&] { return evaluate(out.prediction.map, out.prediction.scores, *truth); });
  }
  return out;
}

Raster label_to_raster(const LabelField& labels) {
  Raster r(labels.width(), labels.height(), 1);
  for (std::size_t p = 0; p < labels.size(); ++p) r.data()[p] = labels[p] == Label::changed ? 1.0 : 0.0;
  return r;
}

LabelField raster_to_label(const Raster& r) {
  if (r.channels() != 1) throw ShapeError("label raster must have one channel");
  LabelField out(r.width(), r.height(), Label::unchanged);
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (r.data()[p] > 0.5) out[p] = Label::changed;
  }
  return out;
}

PipelineResult run_pipeline_files(const PipelineConfig& cfg) {
  if (cfg.t1.empty() || cfg.t2.empty()) throw ParameterError("both --t1 and --t2 are required");
  Raster i1, i2;
  std::optional<LabelField> truth;
  std::vector<StageTiming> load_time;
  StageClock clock(load_time);
  clock.run("load", [&] {
    i1 = load_input(cfg.t1);
    i2 = load_input(cfg.t2);
    if (!cfg.gt.empty()) truth = raster_to_label(load_input(cfg.gt));
  });

  PipelineResult result = run_pipeline(i1, i2, truth ? &*truth : nullptr, cfg);
  result.timings.insert(result.timings.begin(), load_time.begin(), load_time.end());

  StageClock writer(result.timings);
  writer.run("write", [&] {
    std::filesystem::create_directories(cfg.out_dir);
    save_raster(label_to_raster(result.prediction.map), cfg.out_dir / "change_map.pgm", RasterFormat::pgm8);
    save_raster(result.prediction.scores, cfg.out_dir / "scores.f32", RasterFormat::f32raw);
    if (result.report && truth) {
      write_json(to_json(*result.report), cfg.out_dir / "metrics.json");
      write_roc_csv(roc_auc(result.prediction.scores, *truth), cfg.out_dir / "roc.csv");
    }
  });
  nlohmann::json timing = nlohmann::json::object();
  double total = 0.0;
  for (const auto& t : result.timings) {
    timing[t.stage] = t.seconds;
    total += t.seconds;
  }
  timing["total"] = total;
  write_json(timing, cfg.out_dir / "timing.json");
  return result;
}

std::vector<AblationRow> ablation_rows() {
  return {
      {"#1 baseline", false, KernelMode::distinctive, false},
      {"#3 rpconv", true, KernelMode::random, false},
      {"#4 rlpa", false, KernelMode::distinctive, true},
      {"#6 dpconv+rlpa", true, KernelMode::distinctive, true},
  };
}

std::vector<BenchRowResult> run_ablation(const SceneSpec& spec, const PipelineConfig& base, int n_seeds,
                                         const std::vector<AblationRow>& rows) {
  if (n_seeds < 1) throw ParameterError("need at least one seed");
  std::vector<BenchRowResult> results;
  for (const auto& row : rows) results.push_back({row, {}, {}});
  for (int i = 0; i < n_seeds; ++i) {
    SceneSpec scene = spec;
    scene.seed = spec.seed + static_cast<std::uint64_t>(i);
    const ScenePair pair = gen_pair(scene);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      PipelineConfig cfg = base;
      cfg.conv = rows[r].conv;
      cfg.kernel_mode = rows[r].mode;
      cfg.clean = rows[r].clean;
      cfg.seed = base.seed + static_cast<std::uint64_t>(i);
      PipelineResult res = run_pipeline(pair.i1, pair.i2, &pair.truth, cfg);
      results[r].runs.push_back(*res.report);
      results[r].timings.push_back(std::move(res.timings));
    }
  }
  return results;
}

nlohmann::json bench_summary(const std::vector<BenchRowResult>& results) {
  auto stats = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    return nlohmann::json{{"mean", mean}, {"stdev", sd}};
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : results) {
    std::vector<double> pccs, kcs, f1s, aucs;
    for (const auto& m : r.runs) {
      pccs.push_back(m.pcc);
      kcs.push_back(m.kc);
      f1s.push_back(m.f1);
      aucs.push_back(m.auc);
    }
    std::map<std::string, double> stage_seconds;
    for (const auto& run : r.timings) {
      for (const auto& t : run) stage_seconds[t.stage] += t.seconds / static_cast<double>(r.timings.size());
    }
    rows.push_back({{"name", r.row.name},
                    {"conv", r.row.conv},
                    {"kernel_mode", std::string(to_string(r.row.mode))},
                    {"clean", r.row.clean},
                    {"runs", r.runs.size()},
                    {"pcc", stats(pccs)},
                    {"kc", stats(kcs)},
                    {"f1", stats(f1s)},
                    {"auc", stats(aucs)},
                    {"mean_stage_seconds", stage_seconds}});
  }
  return {{"rows", rows}};
}

}  // namespace dpdnet
