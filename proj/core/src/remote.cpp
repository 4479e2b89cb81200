#include "panoforge/remote.hpp"

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "panoforge/errors.hpp"

namespace panoforge {

namespace {

using nlohmann::json;

std::string png_base64(const Image& image) {
  const std::vector<std::uint8_t> bytes = encode_png(image);
  return base64_encode(bytes.data(), bytes.size());
}

// Bounded pool of HTTP clients; httplib clients are not thread-safe, so each
// concurrent call checks one out.
class ClientPool {
 public:
  ClientPool(std::string endpoint, double timeout_s, int size)
      : endpoint_(std::move(endpoint)), timeout_s_(timeout_s), available_(size) {}

  std::unique_ptr<httplib::Client> acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
    if (!idle_.empty()) {
      auto cli = std::move(idle_.back());
      idle_.pop_back();
      return cli;
    }
    lock.unlock();
    auto cli = std::make_unique<httplib::Client>(endpoint_);
    const auto timeout = std::chrono::duration<double>(timeout_s_);
    cli->set_connection_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli->set_read_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli->set_write_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    return cli;
  }

  void release(std::unique_ptr<httplib::Client> cli) {
    std::lock_guard<std::mutex> lock(mutex_);
    idle_.push_back(std::move(cli));
    ++available_;
    cv_.notify_one();
  }

 private:
  std::string endpoint_;
  double timeout_s_;
  int available_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
  std::mutex mutex_;
  std::condition_variable cv_;
};

struct PoolLease {
  ClientPool& pool;
  std::unique_ptr<httplib::Client> client;

  explicit PoolLease(ClientPool& p) : pool(p), client(p.acquire()) {}
  ~PoolLease() { pool.release(std::move(client)); }
};

json post_json(ClientPool& pool, const RemoteConfig& cfg, const std::string& path,
               const json& request) {
  const std::string body = request.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    if (attempt > 0) {
      const double delay = cfg.backoff_s * static_cast<double>(1 << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    httplib::Result res = [&] {
      PoolLease lease(pool);
      return lease.client->Post(path, body, "application/json");
    }();
    if (!res) {
      last_error = "connection failure (" + httplib::to_string(res.error()) + ")";
      continue;  // retryable
    }
    if (res->status >= 500) {
      last_error = "server error status " + std::to_string(res->status);
      continue;  // retryable
    }
    if (res->status != 200) {
      throw ServiceError("estimator service " + path + " returned status " +
                         std::to_string(res->status));
    }
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw ServiceError("estimator service " + path +
                         " returned malformed JSON: " + e.what());
    }
  }
  throw ServiceError("estimator service " + path + " unreachable after " +
                     std::to_string(cfg.retries + 1) + " attempts: " + last_error);
}

FloatMap parse_plane(const json& j, const char* name) {
  try {
    const json& dims = j.at("dims");
    if (dims.size() != 2) throw ServiceError(std::string(name) + ".dims must be [h,w]");
    const int h = dims[0].get<int>();
    const int w = dims[1].get<int>();
    if (h <= 0 || w <= 0) throw ServiceError(std::string(name) + " dims invalid");
    const json& data = j.at("data");
    if (data.size() != static_cast<std::size_t>(h) * w) {
      throw ServiceError(std::string(name) + " data size mismatch");
    }
    FloatMap map = make_float_map(w, h);
    for (std::size_t i = 0; i < map.values.size(); ++i) {
      map.values[i] = data[i].get<double>();
    }
    return map;
  } catch (const json::exception& e) {
    throw ServiceError(std::string(name) + " malformed: " + e.what());
  }
}

PointMap parse_pointmap(const json& j) {
  try {
    const json& dims = j.at("dims");
    if (dims.size() != 3 || dims[2].get<int>() != 3) {
      throw ServiceError("pointmap.dims must be [h,w,3]");
    }
    const int h = dims[0].get<int>();
    const int w = dims[1].get<int>();
    if (h <= 0 || w <= 0) throw ServiceError("pointmap dims invalid");
    const json& data = j.at("data");
    if (data.size() != static_cast<std::size_t>(h) * w * 3) {
      throw ServiceError("pointmap data size mismatch");
    }
    PointMap pm;
    pm.width = w;
    pm.height = h;
    pm.points.resize(static_cast<std::size_t>(h) * w);
    for (std::size_t i = 0; i < pm.points.size(); ++i) {
      pm.points[i] = {data[3 * i].get<double>(), data[3 * i + 1].get<double>(),
                      data[3 * i + 2].get<double>()};
    }
    return pm;
  } catch (const json::exception& e) {
    throw ServiceError(std::string("pointmap malformed: ") + e.what());
  }
}

}  // namespace

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    const std::uint32_t b0 = data[i];
    const std::uint32_t b1 = i + 1 < len ? data[i + 1] : 0;
    const std::uint32_t b2 = i + 2 < len ? data[i + 2] : 0;
    const std::uint32_t triple = (b0 << 16) | (b1 << 8) | b2;
    out.push_back(alphabet[(triple >> 18) & 0x3f]);
    out.push_back(alphabet[(triple >> 12) & 0x3f]);
    out.push_back(i + 1 < len ? alphabet[(triple >> 6) & 0x3f] : '=');
    out.push_back(i + 2 < len ? alphabet[triple & 0x3f] : '=');
  }
  return out;
}

struct RemoteEstimator::Impl {
  RemoteConfig cfg;
  mutable ClientPool pool;

  explicit Impl(RemoteConfig c)
      : cfg(std::move(c)), pool(cfg.endpoint, cfg.timeout_s, cfg.pool_size) {}
};

RemoteEstimator::RemoteEstimator(RemoteConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(cfg))) {
  if (impl_->cfg.endpoint.empty()) throw UsageError("remote endpoint not configured");
}

RemoteEstimator::~RemoteEstimator() = default;

PoseEstimate RemoteEstimator::do_estimate(const PerspectiveView& a,
                                          const PerspectiveView& b) const {
  json request;
  request["image_a"] = png_base64(a.image);
  request["image_b"] = png_base64(b.image);
  const json response = post_json(impl_->pool, impl_->cfg, "/v1/estimate", request);

  PoseEstimate est;
  try {
    const json& q = response.at("rotation_wxyz");
    const json& t = response.at("translation");
    if (q.size() != 4 || t.size() != 3) {
      throw ServiceError("rotation_wxyz/translation of wrong arity");
    }
    est.pose.rotation = Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(),
                                           q[2].get<double>(), q[3].get<double>());
    est.pose.translation = {t[0].get<double>(), t[1].get<double>(),
                            t[2].get<double>()};
    est.pose.scale_state = ScaleState::raw;
    est.confidence.map = parse_plane(response.at("confidence"), "confidence");
    est.pointmap = parse_pointmap(response.at("pointmap"));
  } catch (const json::exception& e) {
    throw ServiceError(std::string("estimate response malformed: ") + e.what());
  }
  return est;
}

struct RemoteDepthEstimator::Impl {
  RemoteConfig cfg;
  mutable ClientPool pool;

  explicit Impl(RemoteConfig c)
      : cfg(std::move(c)), pool(cfg.endpoint, cfg.timeout_s, cfg.pool_size) {}
};

RemoteDepthEstimator::RemoteDepthEstimator(RemoteConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(cfg))) {
  if (impl_->cfg.endpoint.empty()) throw UsageError("remote endpoint not configured");
}

RemoteDepthEstimator::~RemoteDepthEstimator() = default;

DepthMap RemoteDepthEstimator::do_estimate_depth(const PerspectiveView& view) const {
  json request;
  request["image"] = png_base64(view.image);
  const json response = post_json(impl_->pool, impl_->cfg, "/v1/depth", request);
  DepthMap depth;
  try {
    depth.map = parse_plane(response.at("depth"), "depth");
  } catch (const json::exception& e) {
    throw ServiceError(std::string("depth response malformed: ") + e.what());
  }
  return depth;
}

}  // namespace panoforge
