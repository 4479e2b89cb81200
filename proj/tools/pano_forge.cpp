// pano-forge: 360-degree video -> calibrated multi-view correspondence data.
//
// Pipeline subcommands hand manifests to each other:
//   synth -> search -> propagate -> calibrate (-> stats / validate)
// losscheck runs the masked-loss kernel verification suite.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "panoforge/errors.hpp"
#include "panoforge/pipeline.hpp"

namespace {

using namespace panoforge;

struct CommonOpts {
  std::optional<std::filesystem::path> config;
  std::optional<int> workers;
  std::optional<double> tau;
  std::optional<double> fps;
  std::optional<int> window;
  std::optional<double> min_translation;
  std::optional<double> fov;
  std::optional<int> view_size;
  std::optional<int> k_max;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> estimator_fixture;
  std::optional<std::string> estimator_endpoint;
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--config", opts->config,
                  "Pipeline config JSON (falls back to $PANO_FORGE_CONFIG)");
  cmd->add_option("--workers", opts->workers, "Worker threads (0 = logical CPUs)");
  cmd->add_option("--tau", opts->tau, "Mean-confidence acceptance threshold");
  cmd->add_option("--fps", opts->fps, "Temporal sampling rate r");
  cmd->add_option("--window", opts->window, "Frame window L");
  cmd->add_option("--min-translation", opts->min_translation,
                  "Minimum metric translation, meters");
  cmd->add_option("--fov", opts->fov, "View horizontal field of view, radians");
  cmd->add_option("--view-size", opts->view_size, "Square view resolution");
  cmd->add_option("--k-max", opts->k_max, "Propagation component size cap");
  cmd->add_option("--seed", opts->seed, "Root seed");
  cmd->add_option("--oracle-fixture", opts->estimator_fixture,
                  "Oracle fixture path (selects the oracle estimator)");
  cmd->add_option("--remote-endpoint", opts->estimator_endpoint,
                  "Estimator service URL (selects the remote estimator)");
}

// precedence: flag > config file > default
PipelineConfig resolve_config(const CommonOpts& opts) {
  PipelineConfig cfg = load_pipeline_config(opts.config);
  if (opts.workers) cfg.workers = *opts.workers;
  if (opts.tau) cfg.search.tau = *opts.tau;
  if (opts.fps) cfg.search.fps = *opts.fps;
  if (opts.window) cfg.search.window = *opts.window;
  if (opts.min_translation) cfg.search.min_translation = *opts.min_translation;
  if (opts.fov) cfg.fov = *opts.fov;
  if (opts.view_size) {
    cfg.view_width = *opts.view_size;
    cfg.view_height = *opts.view_size;
  }
  if (opts.k_max) cfg.k_max = *opts.k_max;
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.estimator_fixture) {
    cfg.estimator = EstimatorSelection{"oracle", *opts.estimator_fixture, ""};
    cfg.depth_estimator = cfg.estimator;
  }
  if (opts.estimator_endpoint) {
    cfg.estimator = EstimatorSelection{"remote", "", *opts.estimator_endpoint};
    cfg.depth_estimator = cfg.estimator;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"360-degree video correspondence pipeline"};
  app.require_subcommand(1);

  // synth
  SynthArgs synth_args;
  std::string scene_path;
  auto* synth = app.add_subcommand("synth", "Render a synthetic fixture");
  synth->add_option("scene", scene_path, "Scene JSON ('default' for built-in)")
      ->required();
  synth->add_option("out_dir", synth_args.out_dir, "Fixture output directory")
      ->required();
  synth->add_option("--n", synth_args.frame_count, "Frame count");
  synth->add_option("--kind", synth_args.kind, "Trajectory kind: line | loop");
  synth->add_option("--speed", synth_args.speed_mps, "Camera speed, m/s");
  synth->add_option("--s-star", synth_args.s_star, "Planted dimensionless scale");
  synth->add_option("--conf-scale", synth_args.conf_scale, "Oracle confidence scale");
  synth->add_option("--video-id", synth_args.video_id, "Fixture video id");
  synth->add_option("--pano-width", synth_args.pano_width, "Panorama width (2x height)");
  synth->add_option("--rot-sigma", synth_args.noise.rot_sigma, "Pose rotation noise");
  synth->add_option("--trans-sigma", synth_args.noise.trans_sigma,
                    "Pose translation noise");
  synth->add_option("--depth-sigma", synth_args.noise.depth_sigma,
                    "Lognormal depth noise");

  // search
  CommonOpts search_opts;
  std::filesystem::path search_frames, search_out;
  std::optional<std::filesystem::path> search_log;
  auto* search = app.add_subcommand("search", "Windowed correspondence search");
  search->add_option("frames_root", search_frames, "Extracted frames root")->required();
  search->add_option("out_manifest", search_out, "Raw manifest output")->required();
  search->add_option("--log", search_log, "Per-pair JSONL log (default <out>.log)");
  add_common(search, &search_opts);

  // propagate
  CommonOpts prop_opts;
  std::filesystem::path prop_manifest, prop_frames, prop_out;
  auto* prop = app.add_subcommand("propagate", "Graph correspondence propagation");
  prop->add_option("manifest", prop_manifest, "Raw manifest input")->required();
  prop->add_option("frames_root", prop_frames, "Extracted frames root")->required();
  prop->add_option("out_manifest", prop_out, "Augmented manifest output")->required();
  add_common(prop, &prop_opts);

  // calibrate
  CommonOpts cal_opts;
  std::filesystem::path cal_manifest, cal_frames, cal_out;
  auto* cal = app.add_subcommand("calibrate", "Metric scale calibration");
  cal->add_option("manifest", cal_manifest, "Raw manifest input")->required();
  cal->add_option("frames_root", cal_frames, "Extracted frames root")->required();
  cal->add_option("out_manifest", cal_out, "Metric manifest output")->required();
  add_common(cal, &cal_opts);

  // stats
  std::filesystem::path stats_catalog, stats_manifest;
  auto* stats = app.add_subcommand("stats", "Catalog + manifest statistics");
  stats->add_option("catalog", stats_catalog, "Catalog JSONL")->required();
  stats->add_option("manifest", stats_manifest, "Manifest")->required();

  // losscheck
  std::uint64_t loss_seed = 1234;
  int loss_size = 16;
  double loss_lambda = 1.0;
  bool loss_inject = false;
  auto* loss = app.add_subcommand("losscheck", "Masked-loss kernel verification");
  loss->add_option("--seed", loss_seed, "RNG seed");
  loss->add_option("--size", loss_size, "Instance grid side");
  loss->add_option("--lambda", loss_lambda, "Auxiliary loss coefficient");
  loss->add_flag("--inject-sign-error", loss_inject,
                 "Flip a gradient sign (harness self-test)");

  // validate
  std::filesystem::path val_manifest, val_frames;
  auto* val = app.add_subcommand("validate", "Check manifest frame references");
  val->add_option("manifest", val_manifest, "Manifest")->required();
  val->add_option("frames_root", val_frames, "Extracted frames root")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      if (scene_path != "default") synth_args.scene_json = scene_path;
      if (synth_args.pano_width % 2 != 0) {
        throw UsageError("pano width must be even (W = 2H)");
      }
      synth_args.pano_height = synth_args.pano_width / 2;
      cmd_synth(synth_args);
      std::cout << "wrote " << synth_args.frame_count << " frames + sidecar to "
                << synth_args.out_dir.string() << "\n";
    } else if (search->parsed()) {
      const PipelineConfig cfg = resolve_config(search_opts);
      const SearchSummary s = cmd_search(search_frames, cfg, search_out, search_log);
      std::cout << "evaluated " << s.candidates << " pairs, accepted " << s.accepted
                << ", errors " << s.errors << "\n";
    } else if (prop->parsed()) {
      const PipelineConfig cfg = resolve_config(prop_opts);
      const PropagateSummary s = cmd_propagate(prop_manifest, prop_frames, cfg, prop_out);
      std::cout << "evaluated " << s.candidates << " pairs, " << s.new_records
                << " new records, errors " << s.errors << "\n";
    } else if (cal->parsed()) {
      const PipelineConfig cfg = resolve_config(cal_opts);
      const CalibrateSummary s = cmd_calibrate(cal_manifest, cal_frames, cfg, cal_out);
      std::cout << "calibrated " << s.calibrated << " records, dropped "
                << s.dropped_translation << " below the translation floor\n";
    } else if (stats->parsed()) {
      std::cout << cmd_stats(stats_catalog, stats_manifest);
    } else if (loss->parsed()) {
      const LossCheckResult r =
          cmd_losscheck(loss_seed, loss_size, loss_lambda, loss_inject);
      std::cout << r.report;
      if (!r.ok) return 2;
    } else if (val->parsed()) {
      const ValidationReport r = cmd_validate(val_manifest, val_frames);
      std::cout << "ok " << r.ok << ", missing " << r.missing << ", corrupt "
                << r.corrupt << "\n";
      for (const std::string& issue : r.issues) std::cout << issue << "\n";
      if (r.missing > 0 || r.corrupt > 0) return 2;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ServiceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
