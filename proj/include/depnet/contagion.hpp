#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "depnet/centrality.hpp"
#include "depnet/graph.hpp"

namespace depnet {

/// Nodes assumed invulnerable in a counterfactual: a protected node is never
/// counted and never transmits, and a protected seed scores 0.
using ProtectedSet = std::vector<bool>;

ProtectedSet no_protection(Index node_count);

/// Size of the set of repositories rendered vulnerable within k steps of a
/// vulnerable seed, seed included. Spread runs along reverse dependency
/// edges, from the vulnerable repository toward its direct and transitive
/// dependents.
std::int64_t k_step_systemicness(const DependencyGraph& graph, Index seed, int k,
                                 const ProtectedSet& protected_nodes);

/// Systemicness of every node for each depth in k_list, one BFS per seed.
/// result[ki][node] corresponds to k_list[ki].
std::vector<std::vector<std::int64_t>> systemicness_all(const DependencyGraph& graph,
                                                        const std::vector<int>& k_list,
                                                        const ProtectedSet& protected_nodes);

struct SystemicnessSummary {
  Scalar mean = 0, std_dev = 0, median = 0, p5 = 0, p95 = 0, p99 = 0, max = 0;
};

SystemicnessSummary summarize_systemicness(const std::vector<std::int64_t>& values);

/// Expected fatality ef(i) = sum over i's dependents j of 1 / (number of j's
/// dependents); dependents with no dependents of their own are skipped.
Scalar expected_fatality(const DependencyGraph& graph, Index i);

/// Exact directed unweighted betweenness (Brandes accumulation), divided by
/// the maximum so max = 1; all zeros when no node lies inside any shortest
/// path.
std::vector<Scalar> betweenness(const DependencyGraph& graph);

struct RankedNode {
  Index node = 0;
  Scalar score = 0;
};

/// Expected systemicness: equally weighted max-normalized betweenness and
/// expected fatality. Descending by score; ties favor higher in-degree
/// (dependents), then the smaller node index.
std::vector<RankedNode> expected_systemicness_ranking(const DependencyGraph& graph);

struct ProtectionSpec {
  enum class Strategy { ExpectedSystemicness, InDegree, ExplicitList };
  Strategy strategy = Strategy::ExpectedSystemicness;
  Index count = 0;                     // l
  std::vector<Index> explicit_nodes;   // for ExplicitList
};

std::string strategy_name(ProtectionSpec::Strategy strategy);

/// Nodes chosen by a protection strategy, in protection order.
std::vector<Index> resolve_protection(const DependencyGraph& graph, const ProtectionSpec& spec);

struct ProtectionCurvePoint {
  std::string strategy;
  Index protected_count = 0;  // l
  int k = 0;
  Scalar avg_systemicness = 0;            // over all nodes, protected count 0
  Scalar avg_excluding_protected = 0;     // averaged over unprotected seeds only
};

struct ContagionReport {
  std::vector<int> k_list;
  std::vector<std::vector<std::int64_t>> syst;  // [k index][node]
  std::vector<Scalar> expected_fatality;
  std::vector<Scalar> betweenness_norm;
  std::vector<Scalar> expected_systemicness;
  std::vector<SystemicnessSummary> summaries;   // per k, unprotected
  std::vector<ProtectionCurvePoint> curves;
};

/// Full per-node analytics plus protection counterfactuals for each spec and
/// each k in k_list.
ContagionReport protection_experiment(const DependencyGraph& graph,
                                      const std::vector<ProtectionSpec>& specs,
                                      const std::vector<int>& k_list);

}  // namespace depnet
