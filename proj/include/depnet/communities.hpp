#pragma once

#include <vector>

#include "depnet/graph.hpp"

namespace depnet {

/// Greedy modularity maximization on the symmetrized graph (Louvain-style
/// local moves plus aggregation), with a deterministic ascending node-visit
/// order. Returns one label per node; labels are dense and numbered by first
/// appearance. Isolated nodes keep their own label.
std::vector<int> detect_communities(const DependencyGraph& graph);

/// Modularity of a labeling on the symmetrized graph (weight g_ij + g_ji per
/// unordered pair). Exposed for tests and tooling.
Scalar modularity(const DependencyGraph& graph, const std::vector<int>& labels);

}  // namespace depnet
