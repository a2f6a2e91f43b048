#pragma once

#include <string>
#include <utility>

#include "depnet/centrality.hpp"
#include "depnet/contagion.hpp"
#include "depnet/covariates.hpp"
#include "depnet/formation.hpp"
#include "depnet/graph.hpp"
#include "depnet/mple.hpp"
#include "depnet/vem.hpp"

namespace depnet {

/// Compact binary container for a graph plus covariates. The transpose
/// adjacency is rebuilt on load.
void write_graph_binary(const std::string& path, const DependencyGraph& graph,
                        const CovariateTable& cov);
std::pair<DependencyGraph, CovariateTable> read_graph_binary(const std::string& path);

std::string stats_json(const DependencyGraph& graph, const DegreeSummary& summary);

std::string params_json(const StructuralParams& params,
                        const std::vector<std::string>& covariate_names);
std::pair<StructuralParams, std::vector<std::string>> params_from_json(const std::string& text);

/// Checkpoint holding xi (dense, row-major), eta, the pi table with explicit
/// cell keys, and the lower-bound trace.
std::string state_json(const VariationalState& state);
VariationalState state_from_json(const std::string& text);

std::string fit_json(const FitResult& fit);
std::string fit_csv(const FitResult& fit);

std::string contagion_summaries_json(const ContagionReport& report);
std::string contagion_pernode_csv(const DependencyGraph& graph, const ContagionReport& report);
std::string protection_curves_csv(const ContagionReport& report);

/// Shortest round-trip decimal form (matches JSON number formatting).
std::string format_number(Scalar value);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace depnet
