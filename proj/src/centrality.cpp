#include "depnet/centrality.hpp"

#include <algorithm>
#include <cmath>

#include "depnet/covariates.hpp"

namespace depnet {

SummaryRow summarize(std::vector<Scalar> values) {
  SummaryRow row;
  if (values.empty()) return row;
  const auto n = static_cast<Scalar>(values.size());
  Scalar sum = 0;
  for (Scalar v : values) sum += v;
  row.mean = sum / n;
  Scalar ss = 0;
  for (Scalar v : values) ss += (v - row.mean) * (v - row.mean);
  row.std_dev = values.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  std::sort(values.begin(), values.end());
  row.min = values.front();
  row.max = values.back();
  row.p5 = nearest_rank_quantile(values, 0.05);
  row.median = nearest_rank_quantile(values, 0.50);
  row.p95 = nearest_rank_quantile(values, 0.95);
  return row;
}

DegreeSummary degree_stats(const DependencyGraph& graph) {
  DegreeSummary summary;
  const Index n = graph.node_count();
  std::vector<Scalar> in_deg, out_deg;
  in_deg.reserve(static_cast<std::size_t>(n));
  out_deg.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    in_deg.push_back(static_cast<Scalar>(graph.in_degree(i)));
    out_deg.push_back(static_cast<Scalar>(graph.out_degree(i)));
  }
  summary.in_degree = summarize(std::move(in_deg));
  summary.out_degree = summarize(std::move(out_deg));
  return summary;
}

CentralityResult eigenvector_centrality(const DependencyGraph& graph, Scalar tol, int max_iter) {
  const Index n = graph.node_count();
  if (n == 0) throw DataError("eigenvector centrality of empty graph");
  CentralityResult result;
  if (graph.edge_count() == 0) {
    result.scores.assign(static_cast<std::size_t>(n), 0.0);
    return result;  // all zero by convention
  }

  std::vector<Scalar> x(static_cast<std::size_t>(n), 1.0 / static_cast<Scalar>(n));
  std::vector<Scalar> next(static_cast<std::size_t>(n), 0.0);
  result.converged = false;
  for (int it = 0; it < max_iter; ++it) {
    result.iterations = it + 1;
    // next = A^T x: node j collects mass from everyone who depends on it.
    Scalar norm = 0;
    for (Index j = 0; j < n; ++j) {
      Scalar s = 0;
      for (Index i : graph.in_edges(j)) s += x[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(j)] = s;
      norm += s;
    }
    if (norm == 0) break;  // stalled (nilpotent direction); keep last iterate
    Scalar diff = 0;
    for (Index j = 0; j < n; ++j) {
      next[static_cast<std::size_t>(j)] /= norm;
      diff += std::abs(next[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)]);
    }
    x.swap(next);
    if (diff < tol) {
      result.converged = true;
      break;
    }
  }

  Scalar max_score = *std::max_element(x.begin(), x.end());
  if (max_score > 0)
    for (Scalar& v : x) v /= max_score;
  result.scores = std::move(x);
  return result;
}

DegreeSummary graph_summary(const DependencyGraph& graph, Scalar tol, int max_iter) {
  DegreeSummary summary = degree_stats(graph);
  if (graph.node_count() > 0) {
    auto cent = eigenvector_centrality(graph, tol, max_iter);
    summary.eigenvector = summarize(std::move(cent.scores));
    summary.eigenvector_converged = cent.converged;
  }
  return summary;
}

}  // namespace depnet
