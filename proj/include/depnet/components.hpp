#pragma once

#include <utility>
#include <vector>

#include "depnet/covariates.hpp"
#include "depnet/graph.hpp"

namespace depnet {

/// One weak-component id per node (ids are dense, ordered by the smallest
/// node index contained in the component).
std::vector<Index> weak_components(const DependencyGraph& graph);

Index weak_component_count(const DependencyGraph& graph);

struct SubgraphResult {
  DependencyGraph graph;
  CovariateTable covariates;
  std::vector<Index> kept_nodes;  // original indices, ascending
};

/// Induced subgraph on the largest weakly connected component. Ties in size
/// are broken toward the component containing the smallest node index; node
/// order within the result is the original relative order.
SubgraphResult largest_weak_component(const DependencyGraph& graph, const CovariateTable& cov);

/// Induced subgraph on an arbitrary node set (ascending original order).
SubgraphResult induced_subgraph(const DependencyGraph& graph, const CovariateTable& cov,
                                const std::vector<Index>& nodes);

}  // namespace depnet
