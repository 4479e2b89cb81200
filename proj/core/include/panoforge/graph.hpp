#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "panoforge/search.hpp"

namespace panoforge {

/// Frame-correspondence graph of one video: nodes are frame timestamps,
/// an edge exists when at least one view pair between the two frames was
/// accepted. Edges carry the best mean confidence seen.
struct FrameGraph {
  std::string video_id;
  std::vector<std::int64_t> nodes;              // sorted timestamps
  std::map<std::pair<int, int>, double> edges;  // (ia < ib) -> best mu

  int node_index(std::int64_t ts) const;  // -1 when absent
};

/// One node per frame appearing in any record, one edge per frame pair with
/// an accepted record. Rejects records spanning multiple videos.
FrameGraph build_graph(const std::vector<CorrespondenceRecord>& records);

/// Maximal connected node sets, each sorted by timestamp, ordered by their
/// smallest timestamp.
std::vector<std::vector<int>> connected_components(const FrameGraph& graph);

/// BFS hop distances from `source` within the graph (-1 when unreachable).
std::vector<int> graph_distances(const FrameGraph& graph, int source);

struct PropagationResult {
  std::vector<Candidate> candidates;      // what was evaluated, canonical order
  std::vector<PairEvaluation> evaluations;
};

/// Evaluates every unordered frame pair inside a component that the window
/// pass could not have covered and that carries no record yet. Components
/// larger than k_max only contribute pairs at graph distance in [2, 4].
/// New records carry provenance = propagated.
PropagationResult propagate(const SearchContext& ctx,
                            const std::vector<CorrespondenceRecord>& records,
                            int k_max, int workers);

}  // namespace panoforge
