#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "depnet/types.hpp"

namespace depnet {

/// Sparse directed graph over repositories. Edge i -> j means i depends on j.
/// Adjacency is kept in compressed form in both directions: `out` answers
/// "what does i depend on", `in` answers "who depends on i". Self-loops and
/// duplicate edges are rejected at build time.
class DependencyGraph {
 public:
  DependencyGraph() = default;

  /// Builds from an edge list. Duplicates and self-loops are dropped.
  /// `names` may be empty, in which case synthetic names "n0", "n1", ... are
  /// assigned.
  static DependencyGraph from_edges(Index node_count,
                                    const std::vector<std::pair<Index, Index>>& edges,
                                    std::vector<std::string> names = {});

  Index node_count() const { return n_; }
  std::int64_t edge_count() const { return static_cast<std::int64_t>(out_targets_.size()); }

  std::span<const Index> out_edges(Index i) const {
    return {out_targets_.data() + out_offsets_[i],
            static_cast<std::size_t>(out_offsets_[i + 1] - out_offsets_[i])};
  }
  std::span<const Index> in_edges(Index i) const {
    return {in_targets_.data() + in_offsets_[i],
            static_cast<std::size_t>(in_offsets_[i + 1] - in_offsets_[i])};
  }

  Index out_degree(Index i) const { return static_cast<Index>(out_edges(i).size()); }
  Index in_degree(Index i) const { return static_cast<Index>(in_edges(i).size()); }

  /// Membership test by binary search on the sorted out list.
  bool has_edge(Index i, Index j) const;

  const std::string& name(Index i) const { return names_[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& names() const { return names_; }

  /// Edges in (source-major, target-ascending) order.
  std::vector<std::pair<Index, Index>> edge_list() const;

  /// Full-scan structural check: sorted unique lists, no self-loops,
  /// out/in transpose consistency. Throws DataError on violation.
  void check_invariants() const;

 private:
  Index n_ = 0;
  std::vector<std::int64_t> out_offsets_{0};
  std::vector<Index> out_targets_;
  std::vector<std::int64_t> in_offsets_{0};
  std::vector<Index> in_targets_;
  std::vector<std::string> names_;
};

}  // namespace depnet
