#pragma once

#include <vector>

#include "depnet/graph.hpp"
#include "depnet/types.hpp"

namespace depnet {

struct SummaryRow {
  Scalar mean = 0, std_dev = 0, min = 0, p5 = 0, median = 0, p95 = 0, max = 0;
};

/// Summarizes a vector with nearest-rank quantiles and sample standard
/// deviation.
SummaryRow summarize(std::vector<Scalar> values);

struct DegreeSummary {
  SummaryRow in_degree;
  SummaryRow out_degree;
  SummaryRow eigenvector;  // filled by graph_summary, zero otherwise
  bool eigenvector_converged = true;
};

/// In/out degree distribution summaries. mean(in) == mean(out) == |E|/N.
DegreeSummary degree_stats(const DependencyGraph& graph);

struct CentralityResult {
  std::vector<Scalar> scores;
  bool converged = true;
  int iterations = 0;
};

/// Eigenvector centrality by power iteration on the transpose adjacency, so
/// heavily-depended-on nodes score high. Scores are divided by the maximum
/// (max = 1 whenever any score is positive). An edgeless graph yields all
/// zeros with converged = true; a stalled iteration (the iterate collapses to
/// zero, as on some acyclic graphs) returns the last iterate with
/// converged = false.
CentralityResult eigenvector_centrality(const DependencyGraph& graph, Scalar tol = 1e-10,
                                        int max_iter = 1000);

/// degree_stats plus the eigenvector centrality row.
DegreeSummary graph_summary(const DependencyGraph& graph, Scalar tol = 1e-10, int max_iter = 1000);

}  // namespace depnet
