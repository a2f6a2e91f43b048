#include "depnet/communities.hpp"

#include <algorithm>
#include <unordered_map>

namespace depnet {

namespace {

// Symmetrized weighted adjacency; weight of {i,j} is g_ij + g_ji. Self-loop
// weights appear after aggregation and carry the internal weight of a block.
struct WeightedGraph {
  std::vector<std::vector<std::pair<Index, Scalar>>> adj;
  std::vector<Scalar> self_weight;
  std::vector<Scalar> strength;  // weighted degree incl. self weight
  Scalar total_weight = 0;       // 2m
};

WeightedGraph symmetrize(const DependencyGraph& graph) {
  WeightedGraph wg;
  const Index n = graph.node_count();
  wg.adj.resize(static_cast<std::size_t>(n));
  wg.self_weight.assign(static_cast<std::size_t>(n), 0.0);
  wg.strength.assign(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i) {
    std::unordered_map<Index, Scalar> row;
    for (Index j : graph.out_edges(i)) row[j] += 1.0;
    for (Index j : graph.in_edges(i)) row[j] += 1.0;
    auto& out = wg.adj[static_cast<std::size_t>(i)];
    out.assign(row.begin(), row.end());
    std::sort(out.begin(), out.end());
    for (auto& [j, w] : out) wg.strength[static_cast<std::size_t>(i)] += w;
  }
  for (Scalar s : wg.strength) wg.total_weight += s;
  return wg;
}

// One sweep of local moves in ascending node order; returns true if any node
// changed community. Ties keep the current community, then prefer the
// smallest community id.
bool local_moves(const WeightedGraph& wg, std::vector<int>& community,
                 std::vector<Scalar>& community_strength) {
  const auto n = static_cast<Index>(wg.adj.size());
  const Scalar two_m = wg.total_weight;
  bool moved_any = false;
  std::unordered_map<int, Scalar> weight_to;
  for (Index v = 0; v < n; ++v) {
    const int own = community[static_cast<std::size_t>(v)];
    weight_to.clear();
    weight_to[own] += 0.0;
    for (auto [u, w] : wg.adj[static_cast<std::size_t>(v)])
      if (u != v) weight_to[community[static_cast<std::size_t>(u)]] += w;

    const Scalar k_v = wg.strength[static_cast<std::size_t>(v)];
    community_strength[static_cast<std::size_t>(own)] -= k_v;

    std::vector<std::pair<int, Scalar>> candidates(weight_to.begin(), weight_to.end());
    std::sort(candidates.begin(), candidates.end());
    int best_c = own;
    Scalar best_gain = 0;
    for (auto [c, w] : candidates) {
      const Scalar gain = w - k_v * community_strength[static_cast<std::size_t>(c)] / two_m;
      if (c == own) {
        best_gain = gain;
      } else if (gain > best_gain + 1e-12) {
        best_gain = gain;
        best_c = c;
      }
    }
    community_strength[static_cast<std::size_t>(best_c)] += k_v;
    if (best_c != own) {
      community[static_cast<std::size_t>(v)] = best_c;
      moved_any = true;
    }
  }
  return moved_any;
}

std::vector<int> renumber(const std::vector<int>& labels) {
  std::unordered_map<int, int> dense;
  std::vector<int> out(labels.size());
  int next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = dense.emplace(labels[i], next);
    if (inserted) ++next;
    out[i] = it->second;
  }
  return out;
}

WeightedGraph aggregate(const WeightedGraph& wg, const std::vector<int>& community,
                        int comm_count) {
  WeightedGraph agg;
  agg.adj.resize(static_cast<std::size_t>(comm_count));
  agg.self_weight.assign(static_cast<std::size_t>(comm_count), 0.0);
  agg.strength.assign(static_cast<std::size_t>(comm_count), 0.0);
  std::vector<std::unordered_map<Index, Scalar>> rows(static_cast<std::size_t>(comm_count));
  for (std::size_t i = 0; i < wg.adj.size(); ++i) {
    const int ci = community[i];
    agg.self_weight[static_cast<std::size_t>(ci)] += wg.self_weight[i];
    for (auto [j, w] : wg.adj[i]) {
      const int cj = community[static_cast<std::size_t>(j)];
      if (ci == cj)
        agg.self_weight[static_cast<std::size_t>(ci)] += w;
      else
        rows[static_cast<std::size_t>(ci)][cj] += w;
    }
  }
  for (int c = 0; c < comm_count; ++c) {
    auto& out = agg.adj[static_cast<std::size_t>(c)];
    out.assign(rows[static_cast<std::size_t>(c)].begin(), rows[static_cast<std::size_t>(c)].end());
    std::sort(out.begin(), out.end());
    Scalar s = agg.self_weight[static_cast<std::size_t>(c)];
    for (auto& [j, w] : out) s += w;
    agg.strength[static_cast<std::size_t>(c)] = s;
  }
  agg.total_weight = wg.total_weight;
  return agg;
}

}  // namespace

Scalar modularity(const DependencyGraph& graph, const std::vector<int>& labels) {
  if (labels.size() != static_cast<std::size_t>(graph.node_count()))
    throw DataError("label count does not match node count");
  auto wg = symmetrize(graph);
  if (wg.total_weight == 0) return 0;
  const Scalar two_m = wg.total_weight;
  Scalar q = 0;
  for (std::size_t i = 0; i < wg.adj.size(); ++i)
    for (auto [j, w] : wg.adj[i])
      if (labels[i] == labels[static_cast<std::size_t>(j)]) q += w / two_m;
  std::unordered_map<int, Scalar> strength_of;
  for (std::size_t i = 0; i < wg.adj.size(); ++i) strength_of[labels[i]] += wg.strength[i];
  for (auto& [c, s] : strength_of) q -= (s / two_m) * (s / two_m);
  return q;
}

std::vector<int> detect_communities(const DependencyGraph& graph) {
  const Index n = graph.node_count();
  if (n == 0) return {};
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) assignment[static_cast<std::size_t>(i)] = i;
  if (graph.edge_count() == 0) return assignment;

  WeightedGraph level = symmetrize(graph);
  for (;;) {
    const auto level_n = static_cast<Index>(level.adj.size());
    std::vector<int> community(static_cast<std::size_t>(level_n));
    for (Index i = 0; i < level_n; ++i) community[static_cast<std::size_t>(i)] = i;
    std::vector<Scalar> community_strength = level.strength;

    bool any = false;
    for (int pass = 0; pass < 256; ++pass) {
      if (!local_moves(level, community, community_strength)) break;
      any = true;
    }
    if (!any) break;

    community = renumber(community);
    int comm_count = 0;
    for (int c : community) comm_count = std::max(comm_count, c + 1);
    for (auto& a : assignment) a = community[static_cast<std::size_t>(a)];
    if (comm_count == level_n) break;
    level = aggregate(level, community, comm_count);
  }
  return renumber(assignment);
}

}  // namespace depnet
