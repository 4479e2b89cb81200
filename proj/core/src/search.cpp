#include "panoforge/search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "panoforge/errors.hpp"
#include "panoforge/parallel.hpp"

namespace panoforge {

void validate_search_config(const SearchConfig& cfg) {
  if (!(cfg.fps > 0.0)) throw DataError("fps must be positive");
  if (cfg.window < 1) throw DataError("window must be >= 1");
  if (!(cfg.tau >= 0.0)) throw DataError("tau must be nonnegative");
  if (!(cfg.min_translation >= 0.0)) throw DataError("min_translation must be >= 0");
  if (cfg.refine_iters <= 0 || !(cfg.refine_step > 0.0) || !(cfg.refine_lr > 0.0)) {
    throw DataError("refinement parameters must be positive");
  }
}

std::vector<std::int64_t> subsample(const std::vector<std::int64_t>& sorted_unique_ts,
                                    double fps) {
  if (!(fps > 0.0)) throw DataError("fps must be positive");
  std::vector<std::int64_t> out;
  const double gap_ms = 1000.0 / fps;
  for (std::int64_t ts : sorted_unique_ts) {
    if (out.empty() || static_cast<double>(ts - out.back()) >= gap_ms) {
      out.push_back(ts);
    }
  }
  return out;
}

std::vector<Candidate> window_pairs(const std::vector<std::int64_t>& timestamps,
                                    const SearchConfig& cfg) {
  validate_search_config(cfg);
  std::vector<Candidate> out;
  const int n = static_cast<int>(timestamps.size());
  const double max_gap_ms = cfg.window * 1000.0 / cfg.fps;
  std::size_t index = 0;
  for (int i = 0; i < n; ++i) {
    const int j_end = std::min(n - 1, i + cfg.window);
    for (int j = i + 1; j <= j_end; ++j) {
      if (static_cast<double>(timestamps[j] - timestamps[i]) > max_gap_ms) break;
      for (int ya = 0; ya < 4; ++ya) {
        for (int yb = 0; yb < 4; ++yb) {
          out.push_back(Candidate{index++, i, j, ya, yb});
        }
      }
    }
  }
  return out;
}

const char* to_string(Provenance p) {
  return p == Provenance::window ? "window" : "propagated";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "window") return Provenance::window;
  if (s == "propagated") return Provenance::propagated;
  throw DataError("unknown provenance: " + s);
}

std::string PairEvaluation::candidate_id(const std::string& video_id) const {
  return video_id + ":" + std::to_string(ts_a) + ":" + std::to_string(ts_b) + ":" +
         std::to_string(cand.yaw_a) + ":" + std::to_string(cand.yaw_b);
}

namespace {

struct ParamPoint {
  std::array<double, 4> p;  // pitch_a, yaw_a, pitch_b, yaw_b

  bool operator<(const ParamPoint& o) const { return p < o.p; }
};

double clamp_pitch(double pitch, double fov) {
  const double lim = kPi / 2.0 - fov / 2.0;
  return std::clamp(pitch, -lim, lim);
}

}  // namespace

RefineResult refine_pair(const PanoFrame& pano_a, const PanoFrame& pano_b,
                         const ViewAngles& angles_a, const ViewAngles& angles_b,
                         const PoseEstimator& estimator, const SearchConfig& cfg,
                         int view_h, int view_w, const PoseEstimate& initial,
                         double initial_mu) {
  const double fov_a = angles_a.fov;
  const double fov_b = angles_b.fov;

  auto angles_at = [&](const ParamPoint& pt) {
    return std::pair<ViewAngles, ViewAngles>(
        make_view_angles(clamp_pitch(pt.p[0], fov_a), pt.p[1], fov_a),
        make_view_angles(clamp_pitch(pt.p[2], fov_b), pt.p[3], fov_b));
  };

  // Deterministic estimators make memoizing mu by parameter point exact;
  // it collapses the repeated gradient evaluations around rejected steps.
  std::map<ParamPoint, double> mu_cache;
  auto mu_at = [&](const ParamPoint& pt) {
    const auto it = mu_cache.find(pt);
    if (it != mu_cache.end()) return it->second;
    const auto [aa, ab] = angles_at(pt);
    const PerspectiveView va = project(pano_a, aa, view_h, view_w);
    const PerspectiveView vb = project(pano_b, ab, view_h, view_w);
    const double mu = mean_confidence(estimator.estimate(va, vb).confidence);
    mu_cache.emplace(pt, mu);
    return mu;
  };

  ParamPoint best{{clamp_pitch(angles_a.pitch, fov_a), angles_a.yaw,
                   clamp_pitch(angles_b.pitch, fov_b), angles_b.yaw}};
  double best_mu = initial_mu;
  mu_cache.emplace(best, best_mu);

  RefineResult result;
  result.mu_trace.push_back(best_mu);

  int rejected_streak = 0;
  for (int iter = 0; iter < cfg.refine_iters && rejected_streak < 3; ++iter) {
    std::array<double, 4> grad{};
    double norm_sq = 0.0;
    for (int k = 0; k < 4; ++k) {
      ParamPoint hi = best;
      ParamPoint lo = best;
      hi.p[k] += cfg.refine_step;
      lo.p[k] -= cfg.refine_step;
      if (k == 0 || k == 2) {
        const double fov = (k == 0) ? fov_a : fov_b;
        hi.p[k] = clamp_pitch(hi.p[k], fov);
        lo.p[k] = clamp_pitch(lo.p[k], fov);
      }
      const double span = hi.p[k] - lo.p[k];
      grad[k] = span > 1e-12 ? (mu_at(hi) - mu_at(lo)) / span : 0.0;
      norm_sq += grad[k] * grad[k];
    }

    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
      ++rejected_streak;  // flat gradient: no step to take
      continue;
    }

    ParamPoint trial = best;
    for (int k = 0; k < 4; ++k) trial.p[k] += cfg.refine_lr * grad[k] / norm;
    trial.p[0] = clamp_pitch(trial.p[0], fov_a);
    trial.p[2] = clamp_pitch(trial.p[2], fov_b);
    trial.p[1] = wrap_yaw(trial.p[1]);
    trial.p[3] = wrap_yaw(trial.p[3]);

    const double trial_mu = mu_at(trial);
    if (trial_mu > best_mu) {
      best = trial;
      best_mu = trial_mu;
      result.mu_trace.push_back(best_mu);
      rejected_streak = 0;
    } else {
      ++rejected_streak;
    }
  }

  const auto [aa, ab] = angles_at(best);
  result.angles_a = aa;
  result.angles_b = ab;
  if (result.mu_trace.size() == 1) {
    // never moved; the initial estimate is the final one
    result.estimate = initial;
    result.mu = initial_mu;
  } else {
    const PerspectiveView va = project(pano_a, aa, view_h, view_w);
    const PerspectiveView vb = project(pano_b, ab, view_h, view_w);
    result.estimate = estimator.estimate(va, vb);
    result.mu = mean_confidence(result.estimate.confidence);
  }
  return result;
}

SearchContext::SearchContext(std::vector<PanoFrame> frames,
                             const PoseEstimator* estimator, const SearchConfig& cfg,
                             double fov, int view_h, int view_w)
    : frames_(std::move(frames)),
      estimator_(estimator),
      cfg_(cfg),
      fov_(fov),
      view_h_(view_h),
      view_w_(view_w) {
  validate_search_config(cfg_);
  if (!estimator_) throw DataError("search context needs an estimator");
  if (frames_.empty()) throw DataError("search context needs frames");
  video_id_ = frames_.front().video_id;
  views_.reserve(frames_.size() * 4);
  for (const PanoFrame& f : frames_) {
    if (f.video_id != video_id_) {
      throw DataError("search context frames must share one video");
    }
    auto quad = cardinal_views(f, fov_, view_h_, view_w_);
    for (auto& v : quad) views_.push_back(std::move(v));
  }
}

const PerspectiveView& SearchContext::cardinal_view(int frame, int yaw_slot) const {
  return views_[static_cast<std::size_t>(frame) * 4 + yaw_slot];
}

std::vector<std::int64_t> SearchContext::timestamps() const {
  std::vector<std::int64_t> ts;
  ts.reserve(frames_.size());
  for (const PanoFrame& f : frames_) ts.push_back(f.timestamp_ms);
  return ts;
}

PairEvaluation SearchContext::evaluate(const Candidate& cand,
                                       Provenance provenance) const {
  PairEvaluation ev;
  ev.cand = cand;
  ev.ts_a = frames_[cand.frame_a].timestamp_ms;
  ev.ts_b = frames_[cand.frame_b].timestamp_ms;

  const PerspectiveView& va = cardinal_view(cand.frame_a, cand.yaw_a);
  const PerspectiveView& vb = cardinal_view(cand.frame_b, cand.yaw_b);
  try {
    const PoseEstimate initial = estimator_->estimate(va, vb);
    ev.mu_initial = mean_confidence(initial.confidence);
    if (ev.mu_initial < cfg_.tau) {
      ev.accepted = false;
      return ev;
    }
    RefineResult refined =
        refine_pair(frames_[cand.frame_a], frames_[cand.frame_b], va.angles, vb.angles,
                    *estimator_, cfg_, view_h_, view_w_, initial, ev.mu_initial);
    ev.accepted = true;
    ev.mu_trace = refined.mu_trace;
    CorrespondenceRecord rec;
    rec.video_id = video_id_;
    rec.ts_a = ev.ts_a;
    rec.ts_b = ev.ts_b;
    rec.angles_a = refined.angles_a;
    rec.angles_b = refined.angles_b;
    rec.pose = refined.estimate.pose;
    rec.mean_conf = refined.mu;
    rec.sigma = 1.0;
    rec.provenance = provenance;
    ev.record = std::move(rec);
  } catch (const std::exception& e) {
    throw DataError("candidate " + ev.candidate_id(video_id_) + ": " + e.what());
  }
  return ev;
}

std::vector<PairEvaluation> SearchContext::run(const std::vector<Candidate>& candidates,
                                               Provenance provenance,
                                               int workers) const {
  std::vector<PairEvaluation> results(candidates.size());
  parallel_for(candidates.size(), workers, [&](std::size_t i) {
    try {
      results[i] = evaluate(candidates[i], provenance);
    } catch (const std::exception& e) {
      PairEvaluation ev;
      ev.cand = candidates[i];
      ev.ts_a = frames_[candidates[i].frame_a].timestamp_ms;
      ev.ts_b = frames_[candidates[i].frame_b].timestamp_ms;
      ev.error = e.what();
      results[i] = std::move(ev);
    }
  });
  return results;
}

std::vector<CorrespondenceRecord> translation_filter(
    const std::vector<CorrespondenceRecord>& records, double min_translation) {
  std::vector<CorrespondenceRecord> kept;
  for (const CorrespondenceRecord& rec : records) {
    if (rec.pose.scale_state != ScaleState::metric) {
      throw DataError("translation filter requires metric records");
    }
    if (rec.pose.translation.norm() >= min_translation) kept.push_back(rec);
  }
  return kept;
}

}  // namespace panoforge
