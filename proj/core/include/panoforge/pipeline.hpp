#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "panoforge/ingest.hpp"
#include "panoforge/manifest.hpp"
#include "panoforge/oracle.hpp"
#include "panoforge/remote.hpp"
#include "panoforge/search.hpp"

namespace panoforge {

inline constexpr const char* kConfigEnvVar = "PANO_FORGE_CONFIG";

struct EstimatorSelection {
  std::string type = "oracle";  // "oracle" | "remote"
  std::string fixture;          // ground-truth sidecar path (oracle)
  std::string endpoint;         // service URL (remote)
};

struct PipelineConfig {
  SearchConfig search;
  double fov = kPi / 2.0;
  int view_width = 256;
  int view_height = 256;
  EstimatorSelection estimator;
  EstimatorSelection depth_estimator;
  int k_max = 50;
  int hamming_max = 10;
  std::string decoder_cmd;
  int workers = 0;  // 0 = logical CPUs
  std::uint64_t seed = 0;
  RemoteConfig remote;  // timeout/retry/pool knobs for remote estimators
};

void validate_pipeline_config(const PipelineConfig& cfg);

PipelineConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const PipelineConfig& cfg);

/// Loads the config file (or PANO_FORGE_CONFIG, or defaults when neither is
/// given).
PipelineConfig load_pipeline_config(const std::optional<std::filesystem::path>& path);

std::unique_ptr<PoseEstimator> make_pose_estimator(const PipelineConfig& cfg);
std::unique_ptr<DepthEstimator> make_depth_estimator(const PipelineConfig& cfg);

// ---- subcommand entry points (shared by the CLI and the test suites) ----

struct SynthArgs {
  std::filesystem::path scene_json;  // empty -> built-in default scene
  std::filesystem::path out_dir;
  int frame_count = 60;
  std::string kind = "line";
  double speed_mps = 1.0;
  double s_star = 1.0;
  double conf_scale = 8.0;
  NoiseConfig noise;
  std::string video_id = "synthetic";
  int pano_width = 256;
  int pano_height = 128;
};

/// Renders the fixture frames plus the ground-truth sidecar
/// (out_dir/ground_truth.json). Reruns are byte-identical.
void cmd_synth(const SynthArgs& args);

struct SearchSummary {
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::size_t errors = 0;
};

/// Full 3.1 pass: subsample, cardinal views, window pairs, evaluate/refine,
/// raw manifest out. Per-pair estimator errors are logged and skipped;
/// throws DataError when more than 10% of pairs error.
SearchSummary cmd_search(const std::filesystem::path& frames_root,
                         const PipelineConfig& cfg,
                         const std::filesystem::path& out_manifest,
                         const std::optional<std::filesystem::path>& log_path = {});

struct PropagateSummary {
  std::size_t candidates = 0;
  std::size_t new_records = 0;
  std::size_t errors = 0;
};

PropagateSummary cmd_propagate(const std::filesystem::path& manifest,
                               const std::filesystem::path& frames_root,
                               const PipelineConfig& cfg,
                               const std::filesystem::path& out_manifest);

struct CalibrateSummary {
  std::size_t calibrated = 0;
  std::size_t dropped_translation = 0;
};

/// Calibrates every record to metric scale, then applies the minimum
/// translation filter. Rejects already-metric input.
CalibrateSummary cmd_calibrate(const std::filesystem::path& manifest,
                               const std::filesystem::path& frames_root,
                               const PipelineConfig& cfg,
                               const std::filesystem::path& out_manifest);

/// Stats JSON for a catalog + manifest pair.
std::string cmd_stats(const std::filesystem::path& catalog,
                      const std::filesystem::path& manifest);

struct LossCheckResult {
  bool ok = false;
  std::string report;  // one line per property
};

/// Runs the loss-kernel verification suite (gradient checks, optimal-mask
/// grid comparison, convergence). inject_sign_error flips a gradient sign to
/// prove the harness can fail.
LossCheckResult cmd_losscheck(std::uint64_t seed, int size, double lambda,
                              bool inject_sign_error);

ValidationReport cmd_validate(const std::filesystem::path& manifest,
                              const std::filesystem::path& frames_root);

// Exposed for reuse by propagate/calibrate and tests: loads
// frames_root/{video_id}/{timestamp_ms}.png, subsampled at cfg.search.fps.
std::vector<PanoFrame> load_video_frames(const std::filesystem::path& frames_root,
                                         const std::string& video_id,
                                         const PipelineConfig& cfg);
std::vector<std::string> list_videos(const std::filesystem::path& frames_root);

}  // namespace panoforge
