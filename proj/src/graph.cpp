#include "depnet/graph.hpp"

#include <algorithm>

namespace depnet {

DependencyGraph DependencyGraph::from_edges(Index node_count,
                                            const std::vector<std::pair<Index, Index>>& edges,
                                            std::vector<std::string> names) {
  if (node_count < 0) throw DataError("node count must be non-negative");
  DependencyGraph g;
  g.n_ = node_count;

  std::vector<std::pair<Index, Index>> cleaned;
  cleaned.reserve(edges.size());
  for (auto [s, t] : edges) {
    if (s < 0 || s >= node_count || t < 0 || t >= node_count)
      throw DataError("edge endpoint out of range");
    if (s == t) continue;  // self-dependency
    cleaned.emplace_back(s, t);
  }
  std::sort(cleaned.begin(), cleaned.end());
  cleaned.erase(std::unique(cleaned.begin(), cleaned.end()), cleaned.end());

  g.out_offsets_.assign(static_cast<std::size_t>(node_count) + 1, 0);
  g.in_offsets_.assign(static_cast<std::size_t>(node_count) + 1, 0);
  for (auto [s, t] : cleaned) {
    ++g.out_offsets_[static_cast<std::size_t>(s) + 1];
    ++g.in_offsets_[static_cast<std::size_t>(t) + 1];
  }
  for (Index i = 0; i < node_count; ++i) {
    g.out_offsets_[static_cast<std::size_t>(i) + 1] += g.out_offsets_[i];
    g.in_offsets_[static_cast<std::size_t>(i) + 1] += g.in_offsets_[i];
  }
  g.out_targets_.resize(cleaned.size());
  g.in_targets_.resize(cleaned.size());
  std::vector<std::int64_t> out_pos(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
  std::vector<std::int64_t> in_pos(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  for (auto [s, t] : cleaned) {
    g.out_targets_[static_cast<std::size_t>(out_pos[s]++)] = t;
    g.in_targets_[static_cast<std::size_t>(in_pos[t]++)] = s;
  }
  // Source-major fill of the transpose keeps each in-list sorted; out-lists
  // are sorted because the edge list was.

  if (names.empty()) {
    names.reserve(static_cast<std::size_t>(node_count));
    for (Index i = 0; i < node_count; ++i) names.push_back("n" + std::to_string(i));
  } else if (static_cast<Index>(names.size()) != node_count) {
    throw DataError("names size does not match node count");
  }
  g.names_ = std::move(names);
  return g;
}

bool DependencyGraph::has_edge(Index i, Index j) const {
  auto span = out_edges(i);
  return std::binary_search(span.begin(), span.end(), j);
}

std::vector<std::pair<Index, Index>> DependencyGraph::edge_list() const {
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(out_targets_.size());
  for (Index i = 0; i < n_; ++i)
    for (Index j : out_edges(i)) edges.emplace_back(i, j);
  return edges;
}

void DependencyGraph::check_invariants() const {
  std::int64_t out_sum = 0;
  std::int64_t in_sum = 0;
  for (Index i = 0; i < n_; ++i) {
    auto out = out_edges(i);
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (out[k] == i) throw DataError("self-loop at node " + std::to_string(i));
      if (k > 0 && out[k] <= out[k - 1])
        throw DataError("out list not sorted/unique at node " + std::to_string(i));
    }
    auto in = in_edges(i);
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (in[k] == i) throw DataError("self-loop at node " + std::to_string(i));
      if (k > 0 && in[k] <= in[k - 1])
        throw DataError("in list not sorted/unique at node " + std::to_string(i));
    }
    out_sum += static_cast<std::int64_t>(out.size());
    in_sum += static_cast<std::int64_t>(in.size());
  }
  if (out_sum != in_sum || out_sum != edge_count())
    throw DataError("degree sums disagree with edge count");
  for (Index i = 0; i < n_; ++i)
    for (Index j : out_edges(i)) {
      auto in = in_edges(j);
      if (!std::binary_search(in.begin(), in.end(), i))
        throw DataError("transpose inconsistency on edge " + std::to_string(i) + "->" +
                        std::to_string(j));
    }
}

}  // namespace depnet
