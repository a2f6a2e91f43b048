#include "depnet/components.hpp"

#include <algorithm>

namespace depnet {

std::vector<Index> weak_components(const DependencyGraph& graph) {
  const Index n = graph.node_count();
  std::vector<Index> comp(static_cast<std::size_t>(n), -1);
  std::vector<Index> stack;
  Index next_id = 0;
  for (Index start = 0; start < n; ++start) {
    if (comp[static_cast<std::size_t>(start)] >= 0) continue;
    comp[static_cast<std::size_t>(start)] = next_id;
    stack.push_back(start);
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      auto visit = [&](Index u) {
        if (comp[static_cast<std::size_t>(u)] < 0) {
          comp[static_cast<std::size_t>(u)] = next_id;
          stack.push_back(u);
        }
      };
      for (Index u : graph.out_edges(v)) visit(u);
      for (Index u : graph.in_edges(v)) visit(u);
    }
    ++next_id;
  }
  return comp;
}

Index weak_component_count(const DependencyGraph& graph) {
  auto comp = weak_components(graph);
  Index max_id = -1;
  for (Index c : comp) max_id = std::max(max_id, c);
  return max_id + 1;
}

SubgraphResult induced_subgraph(const DependencyGraph& graph, const CovariateTable& cov,
                                const std::vector<Index>& nodes) {
  std::vector<Index> kept = nodes;
  std::sort(kept.begin(), kept.end());
  std::vector<Index> new_index(static_cast<std::size_t>(graph.node_count()), -1);
  for (std::size_t r = 0; r < kept.size(); ++r)
    new_index[static_cast<std::size_t>(kept[r])] = static_cast<Index>(r);

  std::vector<std::pair<Index, Index>> edges;
  std::vector<std::string> names;
  names.reserve(kept.size());
  for (Index v : kept) {
    names.push_back(graph.name(v));
    for (Index u : graph.out_edges(v)) {
      const Index nu = new_index[static_cast<std::size_t>(u)];
      if (nu >= 0) edges.emplace_back(new_index[static_cast<std::size_t>(v)], nu);
    }
  }
  SubgraphResult result;
  result.graph =
      DependencyGraph::from_edges(static_cast<Index>(kept.size()), edges, std::move(names));
  result.covariates = cov.row_count() == graph.node_count() ? cov.select_rows(kept)
                                                            : CovariateTable::empty(static_cast<Index>(kept.size()));
  result.kept_nodes = std::move(kept);
  return result;
}

SubgraphResult largest_weak_component(const DependencyGraph& graph, const CovariateTable& cov) {
  if (graph.node_count() == 0) throw DataError("largest_weak_component of empty graph");
  auto comp = weak_components(graph);
  Index count = 0;
  for (Index c : comp) count = std::max(count, c + 1);
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(count), 0);
  for (Index c : comp) ++sizes[static_cast<std::size_t>(c)];
  // Component ids are ordered by smallest member index, so the first id at
  // the maximum size is the required tie-break.
  Index best = 0;
  for (Index c = 1; c < count; ++c)
    if (sizes[static_cast<std::size_t>(c)] > sizes[static_cast<std::size_t>(best)]) best = c;

  std::vector<Index> nodes;
  nodes.reserve(static_cast<std::size_t>(sizes[static_cast<std::size_t>(best)]));
  for (Index v = 0; v < graph.node_count(); ++v)
    if (comp[static_cast<std::size_t>(v)] == best) nodes.push_back(v);
  return induced_subgraph(graph, cov, nodes);
}

}  // namespace depnet
