#include <doctest.h>

#include <cmath>
#include <memory>

#include "panoforge/errors.hpp"
#include "panoforge/manifest.hpp"
#include "panoforge/oracle.hpp"
#include "panoforge/search.hpp"
#include "panoforge/synth.hpp"

using namespace panoforge;

namespace {

struct ConstantEstimator final : PoseEstimator {
  double conf;
  explicit ConstantEstimator(double c) : conf(c) {}

  PoseEstimate do_estimate(const PerspectiveView& a,
                           const PerspectiveView&) const override {
    PoseEstimate e;
    e.confidence.map = make_float_map(a.image.width, a.image.height, conf);
    e.pointmap.width = a.image.width;
    e.pointmap.height = a.image.height;
    e.pointmap.points.assign(
        static_cast<std::size_t>(a.image.width) * a.image.height,
        Eigen::Vector3d(0, 0, 1));
    return e;
  }
};

std::shared_ptr<FixtureGroundTruth> wide_room_fixture(int n) {
  auto gt = std::make_shared<FixtureGroundTruth>();
  gt->video_id = "vid";
  gt->scene.room.min = {-30, -30, 0};
  gt->scene.room.max = {30, 30, 8};
  gt->scene.room.checker_size = 1.0;
  gt->pano_width = 128;
  gt->pano_height = 64;
  const auto traj = make_trajectory(gt->scene, n, TrajectoryKind::line, 1.0);
  for (int k = 0; k < n; ++k) gt->frames.push_back(FixtureFrame{k * 1000, traj[k]});
  return gt;
}

std::vector<PanoFrame> render_fixture_frames(const FixtureGroundTruth& gt) {
  std::vector<PanoFrame> frames;
  for (const FixtureFrame& f : gt.frames) {
    RenderResult r =
        render_equirect(gt.scene, f.pose, gt.pano_width, gt.pano_height);
    frames.push_back(make_pano_frame(gt.video_id, f.timestamp_ms, std::move(r.image)));
  }
  return frames;
}

}  // namespace

TEST_CASE("subsample keeps greedy 1-second spacing") {
  const std::vector<std::int64_t> ts = {0, 500, 1000, 1500, 2000};
  CHECK(subsample(ts, 1.0) == std::vector<std::int64_t>{0, 1000, 2000});
  CHECK(subsample({}, 1.0).empty());
}

TEST_CASE("subsampled gaps respect 1000/r for random inputs") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> step(1, 400);
  std::vector<std::int64_t> ts;
  std::int64_t t = 0;
  for (int i = 0; i < 500; ++i) {
    ts.push_back(t);
    t += step(rng);
  }
  for (double fps : {0.5, 1.0, 3.0}) {
    const auto kept = subsample(ts, fps);
    for (std::size_t i = 1; i < kept.size(); ++i) {
      CHECK(static_cast<double>(kept[i] - kept[i - 1]) >= 1000.0 / fps);
    }
  }
}

TEST_CASE("600 seconds of 30 fps subsample to 600 frames at r = 1") {
  std::vector<std::int64_t> ts;
  for (int k = 0; k < 18000; ++k) {
    ts.push_back(std::llround(k * 1000.0 / 30.0));
  }
  CHECK(subsample(ts, 1.0).size() == 600);
}

TEST_CASE("window pair counts match direct enumeration") {
  SearchConfig cfg;
  auto regular = [](int n) {
    std::vector<std::int64_t> ts;
    for (int i = 0; i < n; ++i) ts.push_back(i * 1000);
    return ts;
  };

  CHECK(window_pairs(regular(3), cfg).size() == 48);

  SearchConfig l1 = cfg;
  l1.window = 1;
  CHECK(window_pairs(regular(10), l1).size() == 9 * 16);

  const auto candidates = window_pairs(regular(100), cfg);
  // direct enumeration oracle
  std::size_t frame_pairs = 0;
  for (int i = 0; i < 100; ++i) {
    for (int j = i + 1; j <= std::min(99, i + 20); ++j) ++frame_pairs;
  }
  CHECK(frame_pairs == 1790);
  CHECK(candidates.size() == 28640);

  // canonical ordering (i, j, yaw_a, yaw_b)
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const auto& p = candidates[k - 1];
    const auto& q = candidates[k];
    CHECK(std::tuple(p.frame_a, p.frame_b, p.yaw_a, p.yaw_b) <
          std::tuple(q.frame_a, q.frame_b, q.yaw_a, q.yaw_b));
    CHECK(q.index == k);
  }
}

TEST_CASE("sparse timestamps cap the pair gap at window/fps seconds") {
  SearchConfig cfg;  // L = 20, r = 1
  const std::vector<std::int64_t> ts = {0, 30000, 60000};
  CHECK(window_pairs(ts, cfg).empty());  // gaps of 30 s exceed 20 s
}

TEST_CASE("mu exactly at tau is accepted") {
  auto gt = wide_room_fixture(3);
  ConstantEstimator est(4.0);  // equals the default tau
  SearchContext ctx(render_fixture_frames(*gt), &est, SearchConfig{}, kPi / 2, 16, 16);
  const auto evals =
      ctx.run(window_pairs(ctx.timestamps(), SearchConfig{}), Provenance::window, 1);
  for (const auto& ev : evals) {
    CHECK(ev.accepted);
    CHECK(ev.record->mean_conf >= 4.0);
  }
}

TEST_CASE("overlapping pairs accepted, disjoint pairs rejected") {
  auto gt = wide_room_fixture(3);
  OracleEstimator est(gt, 0);
  SearchConfig cfg;
  SearchContext ctx(render_fixture_frames(*gt), &est, cfg, kPi / 2, 24, 24);

  // same-yaw neighbors overlap heavily
  const PairEvaluation same = ctx.evaluate(Candidate{0, 0, 1, 0, 0}, Provenance::window);
  CHECK(same.accepted);
  CHECK(same.mu_initial >= cfg.tau);
  CHECK(same.record->provenance == Provenance::window);
  CHECK(same.record->pose.scale_state == ScaleState::raw);

  // opposite-yaw views share nothing
  const PairEvaluation opp = ctx.evaluate(Candidate{0, 0, 1, 0, 2}, Provenance::window);
  CHECK_FALSE(opp.accepted);
  CHECK(opp.mu_initial < cfg.tau);
}

TEST_CASE("estimator failures carry the pair identity") {
  auto gt = wide_room_fixture(3);
  gt->frames.pop_back();  // camera for the last frame vanishes
  OracleEstimator est(gt, 0);
  auto full = wide_room_fixture(3);
  SearchContext ctx(render_fixture_frames(*full), &est, SearchConfig{}, kPi / 2, 16, 16);

  CHECK_THROWS_WITH_AS(ctx.evaluate(Candidate{0, 0, 2, 0, 0}, Provenance::window),
                       doctest::Contains("candidate vid:0:2000"), DataError);

  const auto evals =
      ctx.run(window_pairs(ctx.timestamps(), SearchConfig{}), Provenance::window, 2);
  bool saw_error = false;
  for (const auto& ev : evals) {
    if (ev.cand.frame_b == 2 && !ev.error.empty()) saw_error = true;
  }
  CHECK(saw_error);
}

TEST_CASE("refinement leaves an already-optimal alignment unchanged") {
  auto gt = std::make_shared<FixtureGroundTruth>();
  gt->video_id = "pair";
  gt->scene.room.min = {-8, -8, 0};
  gt->scene.room.max = {8, 8, 4};
  gt->pano_width = 256;
  gt->pano_height = 128;
  CameraPose cam;
  cam.position = {0, 0, 1.5};
  gt->frames = {FixtureFrame{0, cam}, FixtureFrame{1000, cam}};
  OracleEstimator est(gt, 0);

  const auto frames = render_fixture_frames(*gt);
  const ViewAngles a{0.0, 0.5, kPi / 2};
  const PerspectiveView va = project(frames[0], a, 32, 32);
  const PerspectiveView vb = project(frames[1], a, 32, 32);
  const PoseEstimate initial = est.estimate(va, vb);
  const double mu0 = mean_confidence(initial.confidence);
  CHECK(mu0 == doctest::Approx(8.0));

  SearchConfig cfg;
  const RefineResult r = refine_pair(frames[0], frames[1], a, a, est, cfg, 32, 32,
                                     initial, mu0);
  CHECK(r.angles_a.yaw == doctest::Approx(a.yaw));
  CHECK(r.angles_b.yaw == doctest::Approx(a.yaw));
  CHECK(r.mu == doctest::Approx(mu0));
  CHECK(r.mu_trace.size() == 1);  // no accepted steps
}

TEST_CASE("refinement recovers a 0.2 rad yaw offset to the grid optimum") {
  auto gt = std::make_shared<FixtureGroundTruth>();
  gt->video_id = "pair";
  gt->scene.room.min = {-8, -8, 0};
  gt->scene.room.max = {8, 8, 4};
  gt->pano_width = 256;
  gt->pano_height = 128;
  CameraPose cam;
  cam.position = {0, 0, 1.5};
  gt->frames = {FixtureFrame{0, cam}, FixtureFrame{1000, cam}};
  OracleEstimator est(gt, 0);
  const auto frames = render_fixture_frames(*gt);

  const double yaw_a = 0.3;
  const ViewAngles aa{0.0, yaw_a, kPi / 2};

  // dense grid search over view-b yaw: the known optimal alignment
  double best_mu = -1.0;
  double best_rel = 0.0;
  const PerspectiveView va = project(frames[0], aa, 32, 32);
  for (double rel = -0.35; rel <= 0.35; rel += 0.005) {
    const ViewAngles ab{0.0, yaw_a + rel, kPi / 2};
    const PerspectiveView vb = project(frames[1], ab, 32, 32);
    const double mu = mean_confidence(est.estimate(va, vb).confidence);
    if (mu > best_mu) {
      best_mu = mu;
      best_rel = rel;
    }
  }
  CHECK(std::abs(best_rel) < 0.01);  // pure-rotation pair peaks at equal yaw

  const ViewAngles ab_offset{0.0, yaw_a + best_rel + 0.2, kPi / 2};
  const PerspectiveView vb0 = project(frames[1], ab_offset, 32, 32);
  const PoseEstimate initial = est.estimate(va, vb0);
  const double mu0 = mean_confidence(initial.confidence);

  SearchConfig cfg;
  const RefineResult r = refine_pair(frames[0], frames[1], aa, ab_offset, est, cfg,
                                     32, 32, initial, mu0);
  const double recovered_rel = r.angles_b.yaw - r.angles_a.yaw;
  CHECK(std::abs(recovered_rel - best_rel) < 0.05);
  CHECK(r.mu > mu0);

  // accepted mu sequence strictly increases
  REQUIRE(r.mu_trace.size() > 1);
  for (std::size_t i = 1; i < r.mu_trace.size(); ++i) {
    CHECK(r.mu_trace[i] > r.mu_trace[i - 1]);
  }
}

TEST_CASE("refined pitch stays inside the clamp band") {
  auto gt = wide_room_fixture(2);
  OracleEstimator est(gt, 0);
  const auto frames = render_fixture_frames(*gt);
  const ViewAngles near_limit{kPi / 4 - 0.01, 0.0, kPi / 2};
  const PerspectiveView va = project(frames[0], near_limit, 16, 16);
  const PerspectiveView vb = project(frames[1], near_limit, 16, 16);
  const PoseEstimate initial = est.estimate(va, vb);
  const RefineResult r =
      refine_pair(frames[0], frames[1], near_limit, near_limit, est, SearchConfig{},
                  16, 16, initial, mean_confidence(initial.confidence));
  const double limit = kPi / 2 - near_limit.fov / 2 + 1e-12;
  CHECK(std::abs(r.angles_a.pitch) <= limit);
  CHECK(std::abs(r.angles_b.pitch) <= limit);
}

TEST_CASE("translation filter boundary behavior") {
  auto make_rec = [](double norm, ScaleState st) {
    CorrespondenceRecord rec;
    rec.video_id = "v";
    rec.ts_a = 0;
    rec.ts_b = 1000;
    rec.angles_a = rec.angles_b = ViewAngles{0.0, 0.0, kPi / 2};
    rec.pose.translation = {norm, 0.0, 0.0};
    rec.pose.scale_state = st;
    return rec;
  };

  const std::vector<CorrespondenceRecord> metric = {
      make_rec(0.10, ScaleState::metric), make_rec(0.30, ScaleState::metric),
      make_rec(0.25, ScaleState::metric)};
  const auto kept = translation_filter(metric, 0.25);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].pose.translation.norm() == doctest::Approx(0.30));
  CHECK(kept[1].pose.translation.norm() == doctest::Approx(0.25));

  const std::vector<CorrespondenceRecord> raw = {make_rec(0.5, ScaleState::raw)};
  CHECK_THROWS_AS(translation_filter(raw, 0.25), DataError);
}

TEST_CASE("evaluation results are invariant to worker count") {
  auto gt = wide_room_fixture(4);
  OracleEstimator est(gt, 99);
  SearchConfig cfg;
  SearchContext ctx(render_fixture_frames(*gt), &est, cfg, kPi / 2, 16, 16);
  const auto candidates = window_pairs(ctx.timestamps(), cfg);

  auto run_manifest = [&](int workers) {
    std::string lines;
    for (const auto& ev : ctx.run(candidates, Provenance::window, workers)) {
      if (ev.accepted) lines += manifest_line(to_manifest(*ev.record)) + "\n";
    }
    return lines;
  };
  const std::string w1 = run_manifest(1);
  CHECK(w1 == run_manifest(4));
  CHECK(w1 == run_manifest(8));
  CHECK(!w1.empty());
}

TEST_CASE("search config defaults pin the pipeline constants") {
  const SearchConfig cfg;
  CHECK(cfg.fps == 1.0);
  CHECK(cfg.window == 20);
  CHECK(cfg.tau == 4.0);
  CHECK(cfg.min_translation == 0.25);
  CHECK_THROWS_AS(validate_search_config(SearchConfig{-1.0, 20, 4.0, 0.25, 20, 0.05,
                                                      0.02}),
                  DataError);
}
