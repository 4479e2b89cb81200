#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>

#include "panoforge/errors.hpp"
#include "panoforge/oracle.hpp"
#include "panoforge/scale.hpp"
#include "panoforge/synth.hpp"

using namespace panoforge;

namespace {

PointMap points_along_rays(const std::vector<double>& z) {
  PointMap pm;
  pm.width = static_cast<int>(z.size());
  pm.height = 1;
  for (double v : z) pm.points.emplace_back(0.0, 0.0, v);
  return pm;
}

DepthMap depth_of(const std::vector<double>& d) {
  DepthMap out;
  out.map.width = static_cast<int>(d.size());
  out.map.height = 1;
  out.map.values = d;
  return out;
}

ConfidenceMap conf_of(const std::vector<double>& c) {
  ConfidenceMap out;
  out.map.width = static_cast<int>(c.size());
  out.map.height = 1;
  out.map.values = c;
  return out;
}

// Independent evaluation of the weighted L1 objective on a dense sigma grid.
// Prefix sums over sorted ratios keep the scan fast without touching the
// closed-form path under test.
struct GridOracle {
  std::vector<double> ratios;
  std::vector<double> weights;
  std::vector<double> w_prefix;
  std::vector<double> wr_prefix;
  double w_total = 0.0;
  double wr_total = 0.0;

  GridOracle(const PointMap& pm, const DepthMap& depth, const ConfidenceMap& conf) {
    std::vector<std::pair<double, double>> rw;
    for (std::size_t i = 0; i < conf.map.values.size(); ++i) {
      const double c = conf.map.values[i];
      const double z = pm.points[i].norm();
      if (!(c > 0.01) || !(z > 0.0)) continue;
      rw.emplace_back(depth.map.values[i] / z, c * z);
    }
    std::sort(rw.begin(), rw.end());
    w_prefix.push_back(0.0);
    wr_prefix.push_back(0.0);
    for (const auto& [r, w] : rw) {
      ratios.push_back(r);
      weights.push_back(w);
      w_total += w;
      wr_total += w * r;
      w_prefix.push_back(w_total);
      wr_prefix.push_back(wr_total);
    }
  }

  double objective(double sigma) const {
    const std::size_t k =
        std::upper_bound(ratios.begin(), ratios.end(), sigma) - ratios.begin();
    const double below = sigma * w_prefix[k] - wr_prefix[k];
    const double above = (wr_total - wr_prefix[k]) - sigma * (w_total - w_prefix[k]);
    return below + above;
  }

  std::pair<double, double> grid_minimum(double lo, double hi, double step) const {
    double best_sigma = lo;
    double best_obj = objective(lo);
    for (double s = lo + step; s <= hi + step / 2; s += step) {
      const double obj = objective(s);
      if (obj < best_obj) {
        best_obj = obj;
        best_sigma = s;
      }
    }
    return {best_sigma, best_obj};
  }
};

struct RandomInstance {
  PointMap pm;
  DepthMap depth;
  ConfidenceMap conf;
  double planted;
};

RandomInstance random_instance(std::mt19937_64& rng, double planted,
                               double outlier_frac) {
  std::uniform_int_distribution<int> dim(4, 64);
  std::uniform_real_distribution<double> zdist(0.5, 5.0);
  std::uniform_real_distribution<double> cdist(0.5, 2.0);
  std::uniform_real_distribution<double> out_d(0.1, 50.0);
  std::uniform_real_distribution<double> out_c(0.02, 0.05);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int w = dim(rng);
  const int h = dim(rng);
  std::vector<double> z, d, c;
  for (int i = 0; i < w * h; ++i) {
    const double zi = zdist(rng);
    z.push_back(zi);
    if (unit(rng) < outlier_frac) {
      d.push_back(out_d(rng));
      c.push_back(out_c(rng));
    } else {
      d.push_back(planted * zi);
      c.push_back(cdist(rng));
    }
  }
  RandomInstance inst{points_along_rays(z), depth_of(d), conf_of(c), planted};
  inst.pm.width = w;
  inst.pm.height = h;
  inst.depth.map.width = w;
  inst.depth.map.height = h;
  inst.conf.map.width = w;
  inst.conf.map.height = h;
  return inst;
}

}  // namespace

TEST_CASE("exact agreement gives sigma 1 and zero objective") {
  const std::vector<double> z = {0.5, 1.0, 2.0, 4.0};
  const ScaleFit fit = fit_scale(points_along_rays(z), depth_of(z),
                                 conf_of({1.0, 0.7, 2.0, 0.1}));
  CHECK(fit.sigma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.objective == doctest::Approx(0.0));
  CHECK(fit.valid_pixel_count == 4);
}

TEST_CASE("single pixel solves exactly") {
  const ScaleFit fit = fit_scale(points_along_rays({2.0}), depth_of({6.0}),
                                 conf_of({1.0}));
  CHECK(fit.sigma == doctest::Approx(3.0));
}

TEST_CASE("planted scale with outliers matches the dense grid oracle") {
  std::mt19937_64 rng(41);
  const RandomInstance inst = random_instance(rng, 2.5, 0.2);
  const ScaleFit fit = fit_scale(inst.pm, inst.depth, inst.conf);
  const GridOracle oracle(inst.pm, inst.depth, inst.conf);
  const auto [grid_sigma, grid_obj] = oracle.grid_minimum(0.1, 10.0, 1e-4);
  CHECK(std::abs(fit.sigma - grid_sigma) <= 2e-4);
  CHECK(fit.objective <= grid_obj + 1e-9);
  CHECK(fit.sigma == doctest::Approx(2.5).epsilon(0.01));
}

TEST_CASE("fit_scale rejects empty or invalid input") {
  CHECK_THROWS_AS(fit_scale(points_along_rays({1.0}), depth_of({1.0}),
                            conf_of({0.0})),
                  DataError);  // no pixel above the validity floor
  CHECK_THROWS_AS(fit_scale(points_along_rays({1.0, 2.0}), depth_of({1.0}),
                            conf_of({1.0})),
                  DataError);  // dims disagree
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_scale(points_along_rays({1.0}), depth_of({nan}),
                            conf_of({1.0})),
                  DataError);
}

TEST_CASE("fit_scale is scale-equivariant and weight-invariant") {
  std::mt19937_64 rng(42);
  const RandomInstance inst = random_instance(rng, 1.7, 0.1);
  const ScaleFit base = fit_scale(inst.pm, inst.depth, inst.conf);

  DepthMap d2 = inst.depth;
  for (double& v : d2.map.values) v *= 3.0;
  CHECK(fit_scale(inst.pm, d2, inst.conf).sigma ==
        doctest::Approx(base.sigma * 3.0).epsilon(1e-12));

  PointMap p2 = inst.pm;
  for (auto& p : p2.points) p *= 2.0;
  CHECK(fit_scale(p2, inst.depth, inst.conf).sigma ==
        doctest::Approx(base.sigma / 2.0).epsilon(1e-12));

  ConfidenceMap c2 = inst.conf;
  for (double& v : c2.map.values) v *= 7.0;
  CHECK(fit_scale(inst.pm, inst.depth, c2).sigma ==
        doctest::Approx(base.sigma).epsilon(1e-12));
}

TEST_CASE("closed form beats the grid on random instances") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> planted(0.3, 9.0);
  std::uniform_real_distribution<double> frac(0.0, 0.2);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomInstance inst = random_instance(rng, planted(rng), frac(rng));
    const ScaleFit fit = fit_scale(inst.pm, inst.depth, inst.conf);
    const GridOracle oracle(inst.pm, inst.depth, inst.conf);
    const auto [grid_sigma, grid_obj] = oracle.grid_minimum(0.1, 10.0, 1e-4);
    CHECK(fit.objective <= grid_obj + 1e-9);
    CHECK(std::abs(fit.sigma - grid_sigma) <= 2e-4);
  }
}

TEST_CASE("light corruption moves sigma by less than a percent") {
  std::mt19937_64 rng(44);
  const RandomInstance clean = random_instance(rng, 2.0, 0.0);
  const ScaleFit base = fit_scale(clean.pm, clean.depth, clean.conf);

  RandomInstance corrupted = clean;
  double total_w = 0.0;
  for (std::size_t i = 0; i < clean.conf.map.values.size(); ++i) {
    total_w += clean.conf.map.values[i] * clean.pm.points[i].norm();
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double corrupted_w = 0.0;
  for (std::size_t i = 0; i < corrupted.depth.map.values.size(); ++i) {
    if (unit(rng) < 0.15 && corrupted_w < 0.08 * total_w) {
      corrupted.depth.map.values[i] *= 20.0;
      corrupted.conf.map.values[i] = 0.02;
      corrupted_w += 0.02 * corrupted.pm.points[i].norm();
    }
  }
  const ScaleFit fit = fit_scale(corrupted.pm, corrupted.depth, corrupted.conf);
  CHECK(std::abs(fit.sigma - base.sigma) / base.sigma < 0.01);
}

TEST_CASE("to_metric scales the translation once") {
  RelativePose raw;
  raw.translation = {1.0, 0.0, 0.0};
  const RelativePose metric = to_metric(raw, 2.5);
  CHECK(metric.translation.x() == doctest::Approx(2.5));
  CHECK(metric.scale_state == ScaleState::metric);
  CHECK_THROWS_AS(to_metric(metric, 2.5), DataError);  // double scaling

  const RelativePose unchanged = to_metric(raw, 1.0);
  CHECK(unchanged.translation == raw.translation);
  CHECK(unchanged.scale_state == ScaleState::metric);
  CHECK_THROWS_AS(to_metric(raw, 0.0), DataError);
}

namespace {

std::shared_ptr<FixtureGroundTruth> calibration_fixture(double s_star,
                                                        double depth_sigma) {
  auto gt = std::make_shared<FixtureGroundTruth>();
  gt->video_id = "cal";
  gt->scene.room.min = {-30, -30, 0};
  gt->scene.room.max = {30, 30, 8};
  gt->s_star = s_star;
  gt->noise.depth_sigma = depth_sigma;
  gt->pano_width = 128;
  gt->pano_height = 64;
  const auto traj = make_trajectory(gt->scene, 24, TrajectoryKind::line, 1.0);
  for (int k = 0; k < 24; ++k) gt->frames.push_back(FixtureFrame{k * 1000, traj[k]});
  return gt;
}

PerspectiveView fixture_view(const FixtureGroundTruth& gt, int frame, double yaw) {
  const ViewAngles angles{0.0, yaw, kPi / 2};
  RenderResult r =
      render_perspective(gt.scene, gt.frames[frame].pose, angles, 24, 24);
  PerspectiveView v;
  v.video_id = gt.video_id;
  v.timestamp_ms = gt.frames[frame].timestamp_ms;
  v.angles = angles;
  v.image = std::move(r.image);
  return v;
}

CorrespondenceRecord raw_record(const FixtureGroundTruth& gt, int fa, int fb,
                                const PoseEstimate& est) {
  CorrespondenceRecord rec;
  rec.video_id = gt.video_id;
  rec.ts_a = gt.frames[fa].timestamp_ms;
  rec.ts_b = gt.frames[fb].timestamp_ms;
  rec.angles_a = rec.angles_b = ViewAngles{0.0, 0.0, kPi / 2};
  rec.pose = est.pose;
  rec.mean_conf = mean_confidence(est.confidence);
  return rec;
}

}  // namespace

TEST_CASE("zero-noise oracle chain recovers the planted scale exactly") {
  auto gt = calibration_fixture(2.0, 0.0);
  OracleEstimator est(gt, 0);
  OracleDepthEstimator depth_est(gt, 0);

  const PerspectiveView va = fixture_view(*gt, 0, 0.0);
  const PerspectiveView vb = fixture_view(*gt, 2, 0.0);
  const PoseEstimate e = est.estimate(va, vb);
  const CorrespondenceRecord rec = raw_record(*gt, 0, 2, e);

  const CorrespondenceRecord metric = calibrate_record(rec, va, depth_est, e);
  CHECK(metric.sigma == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(metric.pose.scale_state == ScaleState::metric);

  const Eigen::Vector3d gt_baseline =
      ground_truth_view_pose(gt->frames[0].pose, va.angles, gt->frames[2].pose,
                             vb.angles)
          .translation;
  CHECK((metric.pose.translation - gt_baseline).norm() < 1e-6);

  CHECK_THROWS_AS(calibrate_record(metric, va, depth_est, e), DataError);
}

TEST_CASE("noisy depth keeps the median sigma within 5 percent") {
  auto gt = calibration_fixture(2.0, 0.05);
  OracleEstimator est(gt, 11);
  OracleDepthEstimator depth_est(gt, 11);
  std::vector<double> sigmas;
  for (int k = 0; k < 20; ++k) {
    const PerspectiveView va = fixture_view(*gt, k, 0.0);
    const PerspectiveView vb = fixture_view(*gt, k + 1, 0.0);
    const PoseEstimate e = est.estimate(va, vb);
    const CorrespondenceRecord rec = raw_record(*gt, k, k + 1, e);
    sigmas.push_back(calibrate_record(rec, va, depth_est, e).sigma);
  }
  std::sort(sigmas.begin(), sigmas.end());
  const double median = sigmas[sigmas.size() / 2];
  CHECK(std::abs(median - 2.0) / 2.0 < 0.05);
}
