// Command-line front end: run the change-detection pipeline on an image pair,
// generate synthetic speckled scenes, and benchmark the ablation rows.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "dpdnet/pipeline.hpp"
#include "dpdnet/raster_io.hpp"
#include "dpdnet/synth.hpp"

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

// Registers the pipeline parameters shared by `run` and `bench`.
void add_pipeline_flags(CLI::App* app, dpdnet::PipelineConfig& cfg, std::string& mode, bool& no_clean,
                        bool& no_conv, bool& no_input) {
  app->add_option("--alpha", cfg.alpha, "Propagation balance alpha in (0,1)")->capture_default_str();
  app->add_option("--patch-size", cfg.patch_size, "Preclassification window w (odd)")->capture_default_str();
  app->add_option("--sample-ratio", cfg.sample_ratio, "Fraction of pixels used for training")->capture_default_str();
  app->add_option("--depth", cfg.depth, "Number of convolution layers D")->capture_default_str();
  app->add_option("--kernels", cfg.kernels, "Kernels per layer m")->capture_default_str();
  app->add_option("--kernel-size", cfg.kernel_size, "Kernel size k (odd)")->capture_default_str();
  app->add_option("--threshold", cfg.threshold, "Distinctive activation threshold")->capture_default_str();
  app->add_option("--kernel-mode", mode, "distinctive | random")->capture_default_str();
  app->add_flag("--no-clean", no_clean, "Skip label-noise cleaning");
  app->add_flag("--no-conv", no_conv, "Classify the raw input instead of convolution features");
  app->add_flag("--no-input", no_input, "Do not append the input channels to the feature stack");
  app->add_option("--rounds", cfg.rounds, "Label propagation rounds")->capture_default_str();
  app->add_option("--regions", cfg.regions, "Superpixel count (0 = pixels/64)")->capture_default_str();
  app->add_option("--svm-c", cfg.svm_c, "SVM regularisation C")->capture_default_str();
  app->add_option("--seed", cfg.seed, "Base seed")->capture_default_str();
}

void finish_flags(dpdnet::PipelineConfig& cfg, const std::string& mode, bool no_clean, bool no_conv,
                  bool no_input) {
  cfg.kernel_mode = dpdnet::parse_kernel_mode(mode);
  if (no_clean) cfg.clean = false;
  if (no_conv) cfg.conv = false;
  if (no_input) cfg.include_input = false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised SAR change detection with label-noise cleaning and distinctive patch convolution"};
  app.require_subcommand(1);

  dpdnet::PipelineConfig cfg;
  std::string mode = "distinctive";
  bool no_clean = false, no_conv = false, no_input = false;
  std::string config_path;

  auto* run = app.add_subcommand("run", "Detect changes between two co-registered images");
  run->add_option("--t1", cfg.t1, "First-date image (.pgm or .f32)")->required();
  run->add_option("--t2", cfg.t2, "Second-date image (.pgm or .f32)")->required();
  run->add_option("--gt", cfg.gt, "Ground-truth change map (.pgm, changed > 0.5)");
  run->add_option("--out-dir", cfg.out_dir, "Output directory")->capture_default_str();
  run->add_option("--config", config_path, "JSON file overriding defaults (flags given on the command line win)");
  add_pipeline_flags(run, cfg, mode, no_clean, no_conv, no_input);

  std::string spec_path;
  std::string synth_out = ".";
  std::uint64_t synth_seed = 0;
  bool synth_pgm16 = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic speckled image pair with ground truth");
  synth->add_option("--spec", spec_path, "Scene description JSON (default scene when omitted)");
  synth->add_option("--out-dir", synth_out, "Output directory")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Override the scene seed");
  synth->add_flag("--pgm16", synth_pgm16, "Also write 16-bit PGM copies of the intensities");

  int n_seeds = 5;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Run ablation rows #1, #3, #4, #6 over synthetic scenes");
  bench->add_option("--spec", spec_path, "Scene description JSON (default scene when omitted)");
  bench->add_option("--seeds", n_seeds, "Number of scene seeds")->capture_default_str();
  bench->add_option("--out", bench_out, "Write the summary JSON here as well as to stdout");
  bench->add_option("--config", config_path, "JSON file overriding pipeline defaults");
  add_pipeline_flags(bench, cfg, mode, no_clean, no_conv, no_input);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      // Re-parse so explicit flags override the file.
      dpdnet::PipelineConfig from_file;
      dpdnet::apply_json(from_file, read_json(config_path));
      const dpdnet::PipelineConfig defaults;
      auto* sub = run->parsed() ? run : bench;
      auto given = [&](const char* flag) { return sub->count(flag) > 0; };
      if (!given("--alpha")) cfg.alpha = from_file.alpha;
      if (!given("--patch-size")) cfg.patch_size = from_file.patch_size;
      if (!given("--sample-ratio")) cfg.sample_ratio = from_file.sample_ratio;
      if (!given("--depth")) cfg.depth = from_file.depth;
      if (!given("--kernels")) cfg.kernels = from_file.kernels;
      if (!given("--kernel-size")) cfg.kernel_size = from_file.kernel_size;
      if (!given("--threshold")) cfg.threshold = from_file.threshold;
      if (!given("--kernel-mode")) mode = std::string(dpdnet::to_string(from_file.kernel_mode));
      if (!given("--no-clean")) cfg.clean = from_file.clean;
      if (!given("--no-conv")) cfg.conv = from_file.conv;
      if (!given("--no-input")) cfg.include_input = from_file.include_input;
      if (!given("--rounds")) cfg.rounds = from_file.rounds;
      if (!given("--regions")) cfg.regions = from_file.regions;
      if (!given("--svm-c")) cfg.svm_c = from_file.svm_c;
      if (!given("--seed")) cfg.seed = from_file.seed;
      cfg.kernel_norm = from_file.kernel_norm;
      cfg.labeled_fraction = from_file.labeled_fraction;
      cfg.compactness = from_file.compactness;
      cfg.svm_epochs = from_file.svm_epochs;
      if (run->parsed()) {
        if (!given("--gt") && !from_file.gt.empty()) cfg.gt = from_file.gt;
        if (!given("--out-dir") && from_file.out_dir != defaults.out_dir) cfg.out_dir = from_file.out_dir;
      }
    }
    finish_flags(cfg, mode, no_clean, no_conv, no_input);

    if (run->parsed()) {
      const auto result = dpdnet::run_pipeline_files(cfg);
      if (result.report) std::cout << dpdnet::to_json(*result.report).dump(2) << '\n';
      return 0;
    }

    dpdnet::SceneSpec spec =
        spec_path.empty() ? dpdnet::default_scene() : dpdnet::scene_from_json(read_json(spec_path));

    if (synth->parsed()) {
      if (synth->count("--seed") > 0) spec.seed = synth_seed;
      const dpdnet::ScenePair pair = dpdnet::gen_pair(spec);
      const std::filesystem::path dir = synth_out;
      std::filesystem::create_directories(dir);
      dpdnet::save_raster(pair.i1, dir / "t1.f32", dpdnet::RasterFormat::f32raw);
      dpdnet::save_raster(pair.i2, dir / "t2.f32", dpdnet::RasterFormat::f32raw);
      dpdnet::save_raster(dpdnet::label_to_raster(pair.truth), dir / "gt.pgm", dpdnet::RasterFormat::pgm8);
      if (synth_pgm16) {
        // PGM holds [0, 1]; intensities are divided by their maximum first.
        for (auto [img, name] : {std::pair{&pair.i1, "t1.pgm"}, std::pair{&pair.i2, "t2.pgm"}}) {
          dpdnet::Raster scaled = *img;
          double peak = 0.0;
          for (double v : scaled.data()) peak = std::max(peak, v);
          for (double& v : scaled.data()) v = peak > 0.0 ? v / peak : 0.0;
          dpdnet::save_raster(scaled, dir / name, dpdnet::RasterFormat::pgm16);
        }
      }
      std::ofstream(dir / "scene.json") << dpdnet::to_json(spec).dump(2) << '\n';
      return 0;
    }

    if (bench->parsed()) {
      const auto results = dpdnet::run_ablation(spec, cfg, n_seeds, dpdnet::ablation_rows());
      nlohmann::json summary = dpdnet::bench_summary(results);
      summary["seeds"] = n_seeds;
      summary["config"] = dpdnet::to_json(cfg);
      summary["scene"] = dpdnet::to_json(spec);
      std::cout << summary.dump(2) << '\n';
      if (!bench_out.empty()) std::ofstream(bench_out) << summary.dump(2) << '\n';
      return 0;
    }
  } catch (const dpdnet::StageError& e) {
    std::cerr << "error in stage '" << e.stage_name << "': " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
