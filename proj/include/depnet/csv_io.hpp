#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "depnet/covariates.hpp"
#include "depnet/graph.hpp"

namespace depnet {

/// Optional replication filters applied to raw covariate values at ingest.
/// A node whose value violates a bound is excluded together with its edges
/// (it is not re-added as an unknown repo). Missing values pass all bounds.
struct IngestOptions {
  std::map<std::string, Scalar> min_value;  // keep rows with value >= bound
  std::map<std::string, Scalar> max_value;  // keep rows with value <= bound
  int quantile_categories = 4;
};

struct IngestResult {
  DependencyGraph graph;
  CovariateTable covariates;
  std::vector<std::string> warnings;
};

/// Reads the nodes CSV (header `repo,<covariate>,...`, empty field = missing)
/// and the edges CSV (header `source_repo,target_repo`), collapses duplicate
/// repo pairs, drops self-dependencies, and quartile-discretizes covariates.
/// Node order is first appearance in the nodes file, then the edges file.
IngestResult ingest_dependency_csv(const std::string& edges_path, const std::string& nodes_path,
                                   const IngestOptions& options = {});

/// Labels CSV: header `repo,label`, non-negative integer labels.
std::vector<int> read_labels_csv(const std::string& path, const DependencyGraph& graph);

void write_edges_csv(const std::string& path, const DependencyGraph& graph);
void write_labels_csv(const std::string& path, const DependencyGraph& graph,
                      const std::vector<int>& labels);

}  // namespace depnet
