#include "panoforge/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "panoforge/errors.hpp"

namespace panoforge {

int FrameGraph::node_index(std::int64_t ts) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), ts);
  if (it == nodes.end() || *it != ts) return -1;
  return static_cast<int>(it - nodes.begin());
}

FrameGraph build_graph(const std::vector<CorrespondenceRecord>& records) {
  FrameGraph g;
  if (records.empty()) return g;
  g.video_id = records.front().video_id;

  std::set<std::int64_t> ts_set;
  for (const CorrespondenceRecord& rec : records) {
    if (rec.video_id != g.video_id) {
      throw DataError("graph records must belong to one video");
    }
    if (rec.ts_a == rec.ts_b) throw DataError("self-loop record");
    ts_set.insert(rec.ts_a);
    ts_set.insert(rec.ts_b);
  }
  g.nodes.assign(ts_set.begin(), ts_set.end());

  for (const CorrespondenceRecord& rec : records) {
    int ia = g.node_index(rec.ts_a);
    int ib = g.node_index(rec.ts_b);
    if (ia > ib) std::swap(ia, ib);
    auto [it, inserted] = g.edges.try_emplace({ia, ib}, rec.mean_conf);
    if (!inserted) it->second = std::max(it->second, rec.mean_conf);
  }
  return g;
}

namespace {

std::vector<std::vector<int>> adjacency(const FrameGraph& g) {
  std::vector<std::vector<int>> adj(g.nodes.size());
  for (const auto& [edge, mu] : g.edges) {
    (void)mu;
    adj[edge.first].push_back(edge.second);
    adj[edge.second].push_back(edge.first);
  }
  return adj;
}

}  // namespace

std::vector<std::vector<int>> connected_components(const FrameGraph& graph) {
  const auto adj = adjacency(graph);
  std::vector<bool> seen(graph.nodes.size(), false);
  std::vector<std::vector<int>> components;
  for (std::size_t start = 0; start < graph.nodes.size(); ++start) {
    if (seen[start]) continue;
    std::vector<int> comp;
    std::deque<int> queue{static_cast<int>(start)};
    seen[start] = true;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      comp.push_back(u);
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          queue.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  // nodes are timestamp-sorted, so ascending start index == ascending
  // smallest timestamp
  return components;
}

std::vector<int> graph_distances(const FrameGraph& graph, int source) {
  const auto adj = adjacency(graph);
  std::vector<int> dist(graph.nodes.size(), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

PropagationResult propagate(const SearchContext& ctx,
                            const std::vector<CorrespondenceRecord>& records,
                            int k_max, int workers) {
  PropagationResult result;
  const FrameGraph g = build_graph(records);
  if (g.nodes.empty()) return result;

  const SearchConfig& cfg = ctx.config();
  const std::vector<std::int64_t> frame_ts = ctx.timestamps();
  auto frame_index = [&](std::int64_t ts) {
    const auto it = std::lower_bound(frame_ts.begin(), frame_ts.end(), ts);
    if (it == frame_ts.end() || *it != ts) {
      throw DataError("record references a frame missing from the context: " +
                      std::to_string(ts));
    }
    return static_cast<int>(it - frame_ts.begin());
  };

  const double max_gap_ms = cfg.window * 1000.0 / cfg.fps;
  auto window_covered = [&](int fa, int fb, std::int64_t ta, std::int64_t tb) {
    return (fb - fa) <= cfg.window && static_cast<double>(tb - ta) <= max_gap_ms;
  };

  std::size_t index = 0;
  for (const std::vector<int>& comp : connected_components(g)) {
    const bool banded = static_cast<int>(comp.size()) > k_max;
    std::vector<std::vector<int>> dist;
    if (banded) {
      dist.reserve(comp.size());
      for (int u : comp) dist.push_back(graph_distances(g, u));
    }
    for (std::size_t i = 0; i < comp.size(); ++i) {
      for (std::size_t j = i + 1; j < comp.size(); ++j) {
        const int u = comp[i];
        const int v = comp[j];
        if (g.edges.count({u, v})) continue;  // already recorded
        const std::int64_t ta = g.nodes[u];
        const std::int64_t tb = g.nodes[v];
        const int fa = frame_index(ta);
        const int fb = frame_index(tb);
        if (window_covered(fa, fb, ta, tb)) continue;  // window pass saw it
        if (banded) {
          const int d = dist[i][v];
          if (d < 2 || d > 4) continue;
        }
        for (int ya = 0; ya < 4; ++ya) {
          for (int yb = 0; yb < 4; ++yb) {
            result.candidates.push_back(Candidate{index++, fa, fb, ya, yb});
          }
        }
      }
    }
  }

  result.evaluations = ctx.run(result.candidates, Provenance::propagated, workers);
  return result;
}

}  // namespace panoforge
