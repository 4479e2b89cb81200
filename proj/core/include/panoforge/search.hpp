#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "panoforge/pose.hpp"
#include "panoforge/projection.hpp"

namespace panoforge {

/// Pipeline constants of the windowed correspondence search.
struct SearchConfig {
  double fps = 1.0;               // r, sampling rate
  int window = 20;                // L, frame window
  double tau = 4.0;               // mean-confidence acceptance threshold
  double min_translation = 0.25;  // meters, post-calibration filter
  int refine_iters = 20;
  double refine_step = 0.05;      // finite-difference delta, radians
  double refine_lr = 0.02;        // ascent step length, radians
};

void validate_search_config(const SearchConfig& cfg);

/// Greedy temporal subsampling: keeps the first timestamp, then each next
/// one at least 1000/fps ms after the last kept.
std::vector<std::int64_t> subsample(const std::vector<std::int64_t>& sorted_unique_ts,
                                    double fps);

/// One view pair to evaluate. frame_* index the subsampled frame list,
/// yaw_* are cardinal slots 0..3.
struct Candidate {
  std::size_t index = 0;  // canonical enumeration position
  int frame_a = 0;
  int frame_b = 0;
  int yaw_a = 0;
  int yaw_b = 0;
};

/// All 4x4 cardinal view pairs for frame indices (i, j) with
/// i < j <= i + window and timestamp gap <= window/fps seconds, ordered by
/// (i, j, yaw_a, yaw_b). No within-frame pairs.
std::vector<Candidate> window_pairs(const std::vector<std::int64_t>& timestamps,
                                    const SearchConfig& cfg);

enum class Provenance { window, propagated };
const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// An accepted view pair with refined angles and its (raw or metric) pose.
struct CorrespondenceRecord {
  std::string video_id;
  std::int64_t ts_a = 0;
  std::int64_t ts_b = 0;
  ViewAngles angles_a;
  ViewAngles angles_b;
  RelativePose pose;
  double mean_conf = 0.0;
  double sigma = 1.0;  // meters per estimator unit once metric
  Provenance provenance = Provenance::window;
};

struct RefineResult {
  ViewAngles angles_a;
  ViewAngles angles_b;
  PoseEstimate estimate;
  double mu = 0.0;
  std::vector<double> mu_trace;  // accepted mu values, starting at the input
};

/// Finite-difference ascent on (pitch_a, yaw_a, pitch_b, yaw_b) maximizing
/// mean confidence. Views are re-projected from the panoramas at every trial.
/// Steps are taken along the normalized central-difference gradient and kept
/// only when mu strictly increases; stops after cfg.refine_iters iterations
/// or 3 consecutive rejected steps. Pitch is clamped to
/// [-pi/2 + fov/2, pi/2 - fov/2].
RefineResult refine_pair(const PanoFrame& pano_a, const PanoFrame& pano_b,
                         const ViewAngles& angles_a, const ViewAngles& angles_b,
                         const PoseEstimator& estimator, const SearchConfig& cfg,
                         int view_h, int view_w, const PoseEstimate& initial,
                         double initial_mu);

struct PairEvaluation {
  Candidate cand;
  std::int64_t ts_a = 0;
  std::int64_t ts_b = 0;
  double mu_initial = 0.0;
  bool accepted = false;
  std::optional<CorrespondenceRecord> record;
  std::vector<double> mu_trace;
  std::string error;  // set when the estimator failed for this pair

  std::string candidate_id(const std::string& video_id) const;
};

/// Holds one video's subsampled frames, their cardinal views, and the
/// evaluation machinery. Evaluation is embarrassingly parallel; results are
/// merged in canonical candidate order regardless of worker count.
class SearchContext {
 public:
  SearchContext(std::vector<PanoFrame> frames, const PoseEstimator* estimator,
                const SearchConfig& cfg, double fov, int view_h, int view_w);

  const std::vector<PanoFrame>& frames() const { return frames_; }
  const std::string& video_id() const { return video_id_; }
  const SearchConfig& config() const { return cfg_; }
  double fov() const { return fov_; }
  int view_height() const { return view_h_; }
  int view_width() const { return view_w_; }
  const PerspectiveView& cardinal_view(int frame, int yaw_slot) const;
  std::vector<std::int64_t> timestamps() const;

  /// Estimate, threshold against tau, refine on acceptance. Estimator errors
  /// are rethrown with the candidate identity attached.
  PairEvaluation evaluate(const Candidate& cand, Provenance provenance) const;

  /// Evaluates all candidates across the worker pool; per-pair errors are
  /// captured in the result slots.
  std::vector<PairEvaluation> run(const std::vector<Candidate>& candidates,
                                  Provenance provenance, int workers) const;

 private:
  std::vector<PanoFrame> frames_;
  std::vector<PerspectiveView> views_;  // 4 per frame
  const PoseEstimator* estimator_;
  SearchConfig cfg_;
  double fov_;
  int view_h_;
  int view_w_;
  std::string video_id_;
};

/// Keeps metric records with translation norm >= min_translation. Rejects
/// raw-scale input (the filter is only meaningful after calibration).
std::vector<CorrespondenceRecord> translation_filter(
    const std::vector<CorrespondenceRecord>& records, double min_translation);

}  // namespace panoforge
