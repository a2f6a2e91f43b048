#include "depnet/contagion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "depnet/covariates.hpp"
#include "depnet/parallel.hpp"

namespace depnet {

ProtectedSet no_protection(Index node_count) {
  return ProtectedSet(static_cast<std::size_t>(node_count), false);
}

namespace {

// BFS over dependents (in-edges) up to depth max_k, reporting the cumulative
// reachable count at every depth in k_list. Protected nodes block.
void systemicness_bfs(const DependencyGraph& graph, Index seed, const std::vector<int>& k_list,
                      const ProtectedSet& protected_nodes, std::vector<Index>& queue,
                      std::vector<int>& seen_stamp, int stamp, std::vector<std::int64_t>& out) {
  const int max_k = k_list.empty() ? 0 : *std::max_element(k_list.begin(), k_list.end());
  if (protected_nodes[static_cast<std::size_t>(seed)]) {
    for (std::size_t ki = 0; ki < k_list.size(); ++ki) out[ki] = 0;
    return;
  }
  queue.clear();
  queue.push_back(seed);
  seen_stamp[static_cast<std::size_t>(seed)] = stamp;
  std::int64_t reached = 1;
  std::size_t frontier_begin = 0;
  int depth = 0;
  std::size_t next_ki = 0;
  while (next_ki < k_list.size() && k_list[next_ki] <= depth) out[next_ki++] = reached;
  while (depth < max_k && frontier_begin < queue.size()) {
    const std::size_t frontier_end = queue.size();
    for (std::size_t q = frontier_begin; q < frontier_end; ++q) {
      const Index v = queue[q];
      for (Index u : graph.in_edges(v)) {
        if (seen_stamp[static_cast<std::size_t>(u)] == stamp) continue;
        seen_stamp[static_cast<std::size_t>(u)] = stamp;
        if (protected_nodes[static_cast<std::size_t>(u)]) continue;  // blocked, not counted
        queue.push_back(u);
        ++reached;
      }
    }
    frontier_begin = frontier_end;
    ++depth;
    while (next_ki < k_list.size() && k_list[next_ki] == depth) out[next_ki++] = reached;
  }
  while (next_ki < k_list.size()) out[next_ki++] = reached;
}

}  // namespace

std::int64_t k_step_systemicness(const DependencyGraph& graph, Index seed, int k,
                                 const ProtectedSet& protected_nodes) {
  if (seed < 0 || seed >= graph.node_count()) throw DataError("unknown node");
  if (k < 1) throw ConfigError("k must be at least 1");
  std::vector<Index> queue;
  std::vector<int> stamp(static_cast<std::size_t>(graph.node_count()), 0);
  std::vector<std::int64_t> out(1);
  systemicness_bfs(graph, seed, {k}, protected_nodes, queue, stamp, 1, out);
  return out[0];
}

std::vector<std::vector<std::int64_t>> systemicness_all(const DependencyGraph& graph,
                                                        const std::vector<int>& k_list,
                                                        const ProtectedSet& protected_nodes) {
  for (int k : k_list)
    if (k < 1) throw ConfigError("k must be at least 1");
  const Index n = graph.node_count();
  std::vector<int> sorted_k = k_list;
  std::sort(sorted_k.begin(), sorted_k.end());
  std::vector<std::vector<std::int64_t>> by_sorted(
      sorted_k.size(), std::vector<std::int64_t>(static_cast<std::size_t>(n), 0));

  parallel_for_chunks(static_cast<std::size_t>(n), 256,
                      [&](std::size_t, std::size_t begin, std::size_t end) {
                        std::vector<Index> queue;
                        std::vector<int> stamp(static_cast<std::size_t>(n), -1);
                        std::vector<std::int64_t> out(sorted_k.size());
                        for (std::size_t s = begin; s < end; ++s) {
                          systemicness_bfs(graph, static_cast<Index>(s), sorted_k, protected_nodes,
                                           queue, stamp, static_cast<int>(s), out);
                          for (std::size_t ki = 0; ki < sorted_k.size(); ++ki)
                            by_sorted[ki][s] = out[ki];
                        }
                      });

  std::vector<std::vector<std::int64_t>> result(k_list.size());
  for (std::size_t ki = 0; ki < k_list.size(); ++ki) {
    const auto pos = static_cast<std::size_t>(
        std::find(sorted_k.begin(), sorted_k.end(), k_list[ki]) - sorted_k.begin());
    result[ki] = by_sorted[pos];
  }
  return result;
}

SystemicnessSummary summarize_systemicness(const std::vector<std::int64_t>& values) {
  SystemicnessSummary s;
  if (values.empty()) return s;
  std::vector<Scalar> v(values.begin(), values.end());
  const SummaryRow row = summarize(v);
  s.mean = row.mean;
  s.std_dev = row.std_dev;
  s.median = row.median;
  s.p5 = row.p5;
  s.p95 = row.p95;
  s.max = row.max;
  std::sort(v.begin(), v.end());
  s.p99 = nearest_rank_quantile(v, 0.99);
  return s;
}

Scalar expected_fatality(const DependencyGraph& graph, Index i) {
  if (i < 0 || i >= graph.node_count()) throw DataError("unknown node");
  Scalar total = 0;
  for (Index j : graph.in_edges(i)) {
    const Index dependents = graph.in_degree(j);
    if (dependents > 0) total += 1.0 / static_cast<Scalar>(dependents);
  }
  return total;
}

std::vector<Scalar> betweenness(const DependencyGraph& graph) {
  const Index n = graph.node_count();
  std::vector<Scalar> centrality(static_cast<std::size_t>(n), 0.0);

  const std::size_t chunk = 128;
  const std::size_t num_chunks =
      n == 0 ? 0 : (static_cast<std::size_t>(n) + chunk - 1) / chunk;
  std::vector<std::vector<Scalar>> partial(num_chunks);
  parallel_for_chunks(
      static_cast<std::size_t>(n), chunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        auto& local = partial[c];
        local.assign(static_cast<std::size_t>(n), 0.0);
        std::vector<Index> order;
        std::vector<std::vector<Index>> predecessors(static_cast<std::size_t>(n));
        std::vector<std::int64_t> dist(static_cast<std::size_t>(n));
        std::vector<Scalar> sigma(static_cast<std::size_t>(n));
        std::vector<Scalar> delta(static_cast<std::size_t>(n));
        for (std::size_t s_idx = begin; s_idx < end; ++s_idx) {
          const auto s = static_cast<Index>(s_idx);
          order.clear();
          std::fill(dist.begin(), dist.end(), -1);
          std::fill(sigma.begin(), sigma.end(), 0.0);
          for (auto& p : predecessors) p.clear();
          dist[s_idx] = 0;
          sigma[s_idx] = 1.0;
          std::size_t head = 0;
          order.push_back(s);
          while (head < order.size()) {
            const Index v = order[head++];
            for (Index w : graph.out_edges(v)) {
              if (dist[static_cast<std::size_t>(w)] < 0) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                order.push_back(w);
              }
              if (dist[static_cast<std::size_t>(w)] == dist[static_cast<std::size_t>(v)] + 1) {
                sigma[static_cast<std::size_t>(w)] += sigma[static_cast<std::size_t>(v)];
                predecessors[static_cast<std::size_t>(w)].push_back(v);
              }
            }
          }
          std::fill(delta.begin(), delta.end(), 0.0);
          for (std::size_t q = order.size(); q-- > 1;) {
            const Index w = order[q];
            for (Index v : predecessors[static_cast<std::size_t>(w)])
              delta[static_cast<std::size_t>(v)] +=
                  sigma[static_cast<std::size_t>(v)] / sigma[static_cast<std::size_t>(w)] *
                  (1.0 + delta[static_cast<std::size_t>(w)]);
            if (w != s) local[static_cast<std::size_t>(w)] += delta[static_cast<std::size_t>(w)];
          }
        }
      });
  for (std::size_t c = 0; c < num_chunks; ++c)
    for (Index v = 0; v < n; ++v) centrality[static_cast<std::size_t>(v)] += partial[c][static_cast<std::size_t>(v)];

  const Scalar max_val = centrality.empty()
                             ? 0.0
                             : *std::max_element(centrality.begin(), centrality.end());
  if (max_val > 0)
    for (Scalar& v : centrality) v /= max_val;
  return centrality;
}

std::vector<RankedNode> expected_systemicness_ranking(const DependencyGraph& graph) {
  const Index n = graph.node_count();
  std::vector<Scalar> bet = betweenness(graph);
  std::vector<Scalar> ef(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ef[static_cast<std::size_t>(i)] = expected_fatality(graph, i);
  const Scalar ef_max = n == 0 ? 0.0 : *std::max_element(ef.begin(), ef.end());
  if (ef_max > 0)
    for (Scalar& v : ef) v /= ef_max;

  std::vector<RankedNode> ranked(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    ranked[static_cast<std::size_t>(i)].node = i;
    ranked[static_cast<std::size_t>(i)].score =
        0.5 * bet[static_cast<std::size_t>(i)] + 0.5 * ef[static_cast<std::size_t>(i)];
  }
  std::sort(ranked.begin(), ranked.end(), [&](const RankedNode& a, const RankedNode& b) {
    if (a.score != b.score) return a.score > b.score;
    const Index da = graph.in_degree(a.node);
    const Index db = graph.in_degree(b.node);
    if (da != db) return da > db;
    return a.node < b.node;
  });
  return ranked;
}

std::string strategy_name(ProtectionSpec::Strategy strategy) {
  switch (strategy) {
    case ProtectionSpec::Strategy::ExpectedSystemicness: return "expected-systemicness";
    case ProtectionSpec::Strategy::InDegree: return "in-degree";
    case ProtectionSpec::Strategy::ExplicitList: return "explicit-list";
  }
  return "unknown";
}

std::vector<Index> resolve_protection(const DependencyGraph& graph, const ProtectionSpec& spec) {
  const Index n = graph.node_count();
  const Index l = std::min(spec.count, n);
  switch (spec.strategy) {
    case ProtectionSpec::Strategy::ExpectedSystemicness: {
      auto ranked = expected_systemicness_ranking(graph);
      std::vector<Index> nodes;
      nodes.reserve(static_cast<std::size_t>(l));
      for (Index r = 0; r < l; ++r) nodes.push_back(ranked[static_cast<std::size_t>(r)].node);
      return nodes;
    }
    case ProtectionSpec::Strategy::InDegree: {
      std::vector<Index> by_degree(static_cast<std::size_t>(n));
      std::iota(by_degree.begin(), by_degree.end(), 0);
      std::sort(by_degree.begin(), by_degree.end(), [&](Index a, Index b) {
        const Index da = graph.in_degree(a);
        const Index db = graph.in_degree(b);
        if (da != db) return da > db;
        return a < b;
      });
      by_degree.resize(static_cast<std::size_t>(l));
      return by_degree;
    }
    case ProtectionSpec::Strategy::ExplicitList: {
      for (Index v : spec.explicit_nodes)
        if (v < 0 || v >= n) throw DataError("protected node out of range");
      return spec.explicit_nodes;
    }
  }
  throw ConfigError("unknown protection strategy");
}

ContagionReport protection_experiment(const DependencyGraph& graph,
                                      const std::vector<ProtectionSpec>& specs,
                                      const std::vector<int>& k_list) {
  ContagionReport report;
  report.k_list = k_list;
  const Index n = graph.node_count();

  report.syst = systemicness_all(graph, k_list, no_protection(n));
  for (const auto& values : report.syst)
    report.summaries.push_back(summarize_systemicness(values));

  report.betweenness_norm = betweenness(graph);
  report.expected_fatality.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    report.expected_fatality[static_cast<std::size_t>(i)] = expected_fatality(graph, i);
  std::vector<Scalar> ef_norm = report.expected_fatality;
  const Scalar ef_max = n == 0 ? 0.0 : *std::max_element(ef_norm.begin(), ef_norm.end());
  if (ef_max > 0)
    for (Scalar& v : ef_norm) v /= ef_max;
  report.expected_systemicness.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    report.expected_systemicness[static_cast<std::size_t>(i)] =
        0.5 * report.betweenness_norm[static_cast<std::size_t>(i)] +
        0.5 * ef_norm[static_cast<std::size_t>(i)];

  for (const auto& spec : specs) {
    const std::vector<Index> nodes = resolve_protection(graph, spec);
    ProtectedSet protected_nodes = no_protection(n);
    for (Index v : nodes) protected_nodes[static_cast<std::size_t>(v)] = true;
    Index actually_protected = 0;
    for (bool b : protected_nodes) actually_protected += b ? 1 : 0;

    const auto syst = systemicness_all(graph, k_list, protected_nodes);
    for (std::size_t ki = 0; ki < k_list.size(); ++ki) {
      ProtectionCurvePoint point;
      point.strategy = strategy_name(spec.strategy);
      point.protected_count = spec.count;
      point.k = k_list[ki];
      std::int64_t total = 0;
      for (std::int64_t v : syst[ki]) total += v;
      point.avg_systemicness = n > 0 ? static_cast<Scalar>(total) / static_cast<Scalar>(n) : 0.0;
      const Index unprotected = n - actually_protected;
      point.avg_excluding_protected =
          unprotected > 0 ? static_cast<Scalar>(total) / static_cast<Scalar>(unprotected) : 0.0;
      report.curves.push_back(point);
    }
  }
  return report;
}

}  // namespace depnet
