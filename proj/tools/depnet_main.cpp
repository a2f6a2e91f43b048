#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "depnet/communities.hpp"
#include "depnet/components.hpp"
#include "depnet/csv_io.hpp"
#include "depnet/parallel.hpp"
#include "depnet/rng.hpp"
#include "depnet/serialize.hpp"

namespace fs = std::filesystem;
using namespace depnet;

namespace {

// Seed sub-stream ids; adding a consumer must append, never reorder.
enum SeedStream : std::uint64_t {
  kSeedTypes = 1,
  kSeedSampler = 2,
  kSeedMple = 3,
};

std::map<std::string, Scalar> parse_bounds(const std::vector<std::string>& entries,
                                           const std::string& flag) {
  std::map<std::string, Scalar> bounds;
  for (const auto& entry : entries) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw ConfigError(flag + " expects name=value, got '" + entry + "'");
    try {
      bounds[entry.substr(0, eq)] = std::stod(entry.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError(flag + ": bad numeric value in '" + entry + "'");
    }
  }
  return bounds;
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir);
}

std::string trace_csv(const VariationalState& state) {
  std::string out = "iteration,lower_bound\n";
  for (std::size_t s = 0; s < state.lower_bound_trace.size(); ++s)
    out += std::to_string(s) + "," + format_number(state.lower_bound_trace[s]) + "\n";
  return out;
}

int run_ingest(const std::string& edges, const std::string& nodes, const std::string& out_dir,
               const std::vector<std::string>& min_bounds,
               const std::vector<std::string>& max_bounds, int quantiles, bool lcc_only) {
  IngestOptions options;
  options.min_value = parse_bounds(min_bounds, "--filter-min");
  options.max_value = parse_bounds(max_bounds, "--filter-max");
  options.quantile_categories = quantiles;
  if (!fs::exists(edges)) throw ConfigError("edges file does not exist: " + edges);
  if (!fs::exists(nodes)) throw ConfigError("nodes file does not exist: " + nodes);

  auto result = ingest_dependency_csv(edges, nodes, options);
  for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << "\n";

  DependencyGraph graph = std::move(result.graph);
  CovariateTable cov = std::move(result.covariates);
  if (lcc_only) {
    auto sub = largest_weak_component(graph, cov);
    graph = std::move(sub.graph);
    cov = std::move(sub.covariates);
  }
  ensure_out_dir(out_dir);
  write_graph_binary(out_dir + "/graph.bin", graph, cov);
  write_text_file(out_dir + "/stats.json", stats_json(graph, graph_summary(graph)));
  std::cout << "ingested " << graph.node_count() << " nodes, " << graph.edge_count()
            << " edges\n";
  return 0;
}

int run_stats(const std::string& graph_path, const std::string& out_path) {
  auto [graph, cov] = read_graph_binary(graph_path);
  const std::string json = stats_json(graph, graph_summary(graph));
  if (out_path.empty())
    std::cout << json;
  else
    write_text_file(out_path, json);
  return 0;
}

int run_fit(const std::string& in_dir, const std::string& out_dir, int type_count,
            const std::string& init_path, const std::string& resume_path, int max_iter,
            double tol, int warm_iters, std::uint64_t seed, double negative_subsample) {
  auto [graph, cov] = read_graph_binary(in_dir + "/graph.bin");

  VemOptions vem_options;
  vem_options.max_iter = max_iter;
  vem_options.tol = tol;

  std::vector<int> init_labels;
  std::vector<Scalar> resumed_trace;
  RowMatrix resume_xi;
  if (!resume_path.empty()) {
    auto checkpoint = state_from_json(read_text_file(resume_path));
    if (checkpoint.xi.rows() != graph.node_count())
      throw DataError("checkpoint does not match the graph");
    resume_xi = std::move(checkpoint.xi);
    resumed_trace = std::move(checkpoint.lower_bound_trace);
    std::cerr << "resume: " << resume_path << "\n";
  } else if (!init_path.empty()) {
    init_labels = read_labels_csv(init_path, graph);
    std::cerr << "init: " << init_path << "\n";
  } else {
    init_labels = detect_communities(graph);
    std::cerr << "init: greedy modularity\n";
  }

  VariationalState state;
  try {
    if (resume_xi.rows() > 0) {
      state = run_vem_from_xi(graph, cov, std::move(resume_xi), vem_options);
      state.lower_bound_trace.insert(state.lower_bound_trace.begin(), resumed_trace.begin(),
                                     resumed_trace.end());
    } else if (warm_iters > 0 && cov.covariate_count() > 0) {
      VemOptions warm = vem_options;
      warm.max_iter = warm_iters;
      auto warm_state = run_vem(graph, CovariateTable::empty(graph.node_count()), type_count,
                                init_labels, warm);
      state = run_vem_from_xi(graph, cov, std::move(warm_state.xi), vem_options);
      state.lower_bound_trace.insert(state.lower_bound_trace.begin(),
                                     warm_state.lower_bound_trace.begin(),
                                     warm_state.lower_bound_trace.end());
    } else {
      state = run_vem(graph, cov, type_count, init_labels, vem_options);
    }
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("vem: ") + e.what());
  }

  auto types = harden_types(state.xi);
  MpleOptions mple_options;
  mple_options.negative_subsample = negative_subsample;
  mple_options.seed = derive_seed(seed, kSeedMple);
  FitResult fit;
  try {
    fit = fit_structural(graph, cov, types, mple_options);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("mple: ") + e.what());
  }

  ensure_out_dir(out_dir);
  write_text_file(out_dir + "/checkpoint.json", state_json(state));
  write_text_file(out_dir + "/trace.csv", trace_csv(state));
  write_text_file(out_dir + "/fit.json", fit_json(fit));
  write_text_file(out_dir + "/fit.csv", fit_csv(fit));
  write_labels_csv(out_dir + "/types.csv", graph, types.labels);
  std::cout << "vem iterations: " << state.iterations
            << (state.converged ? " (converged)" : " (max-iter)") << "\n";
  if (fit.within)
    std::cout << "gamma: " << format_number(fit.estimates.gamma) << " (se "
              << format_number(fit.within->std_errors[fit.within->std_errors.size() - 1])
              << ")\n";
  return 0;
}

int run_simulate(const std::string& nodes_path, const std::string& params_path,
                 const std::string& types_path, std::int64_t steps, std::int64_t burnin,
                 std::uint64_t seed, const std::string& out_dir, int quantiles) {
  auto [params, cov_names] = params_from_json(read_text_file(params_path));

  // Build covariates from the nodes file alone; simulation needs no edges.
  const std::string tmp_edges = out_dir + "/.empty_edges.csv";
  ensure_out_dir(out_dir);
  write_text_file(tmp_edges, "source_repo,target_repo\n");
  IngestOptions ingest_options;
  ingest_options.quantile_categories = quantiles;
  auto ingested = ingest_dependency_csv(tmp_edges, nodes_path, ingest_options);
  fs::remove(tmp_edges);
  const DependencyGraph& skeleton = ingested.graph;
  const CovariateTable& cov = ingested.covariates;
  if (cov.covariate_count() != params.covariate_count())
    throw ConfigError("params expect " + std::to_string(params.covariate_count()) +
                      " covariates, nodes file has " + std::to_string(cov.covariate_count()));

  TypeAssignment types;
  if (!types_path.empty()) {
    types = make_types(read_labels_csv(types_path, skeleton));
  } else {
    if (params.eta.size() == 0)
      throw ConfigError("params carry no eta; supply --types or add mixing weights");
    types.type_count = static_cast<int>(params.eta.size());
    types.labels.resize(static_cast<std::size_t>(skeleton.node_count()));
    SplitMix64 rng(derive_seed(seed, kSeedTypes));
    for (auto& label : types.labels) {
      const Scalar u = rng.next_double();
      Scalar acc = 0;
      label = types.type_count - 1;
      for (int k = 0; k < types.type_count; ++k) {
        acc += params.eta[k];
        if (u < acc) {
          label = k;
          break;
        }
      }
    }
  }

  GlauberChain chain(cov, types, params, derive_seed(seed, kSeedSampler));
  chain.run(burnin);
  chain.run(steps);
  DependencyGraph sampled = chain.graph(skeleton.names());

  write_edges_csv(out_dir + "/sampled_edges.csv", sampled);
  write_labels_csv(out_dir + "/sampled_types.csv", sampled, types.labels);
  write_text_file(out_dir + "/sampled_stats.json", stats_json(sampled, graph_summary(sampled)));
  std::cout << "sampled " << sampled.edge_count() << " edges over " << sampled.node_count()
            << " nodes\n";
  return 0;
}

int run_contagion(const std::string& in_dir, const std::string& out_dir,
                  const std::vector<int>& k_list) {
  auto [graph, cov] = read_graph_binary(in_dir + "/graph.bin");
  auto report = protection_experiment(graph, {}, k_list);
  ensure_out_dir(out_dir);
  write_text_file(out_dir + "/contagion_pernode.csv", contagion_pernode_csv(graph, report));
  write_text_file(out_dir + "/contagion_summaries.json", contagion_summaries_json(report));
  for (std::size_t ki = 0; ki < report.k_list.size(); ++ki)
    std::cout << "syst_" << report.k_list[ki] << " mean "
              << format_number(report.summaries[ki].mean) << " max "
              << format_number(report.summaries[ki].max) << "\n";
  return 0;
}

int run_protect(const std::string& in_dir, const std::string& out_dir,
                const std::vector<int>& k_list, const std::vector<std::string>& strategies,
                const std::vector<int>& l_list, const std::string& explicit_path) {
  auto [graph, cov] = read_graph_binary(in_dir + "/graph.bin");
  std::vector<ProtectionSpec> specs;
  for (const auto& name : strategies) {
    ProtectionSpec::Strategy strategy;
    if (name == "expected-systemicness")
      strategy = ProtectionSpec::Strategy::ExpectedSystemicness;
    else if (name == "in-degree")
      strategy = ProtectionSpec::Strategy::InDegree;
    else
      throw ConfigError("unknown strategy '" + name + "'");
    for (int l : l_list) {
      ProtectionSpec spec;
      spec.strategy = strategy;
      spec.count = l;
      specs.push_back(spec);
    }
  }
  if (!explicit_path.empty()) {
    auto labels = read_labels_csv(explicit_path, graph);
    ProtectionSpec spec;
    spec.strategy = ProtectionSpec::Strategy::ExplicitList;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] != 0) spec.explicit_nodes.push_back(static_cast<Index>(i));
    spec.count = static_cast<Index>(spec.explicit_nodes.size());
    specs.push_back(spec);
  }

  auto report = protection_experiment(graph, specs, k_list);
  ensure_out_dir(out_dir);
  write_text_file(out_dir + "/protection_curves.csv", protection_curves_csv(report));
  write_text_file(out_dir + "/contagion_summaries.json", contagion_summaries_json(report));
  std::cout << "wrote " << report.curves.size() << " curve rows\n";
  return 0;
}

// Flat key=value run configuration: each `key=value` line is injected as
// `--key=value` unless the flag was given explicitly, so command-line flags
// always win. Blank lines and # comments are skipped.
std::vector<std::string> apply_config_file(std::vector<std::string> tokens) {
  std::string config_path;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t] == "--config" && t + 1 < tokens.size()) {
      config_path = tokens[t + 1];
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(t),
                   tokens.begin() + static_cast<std::ptrdiff_t>(t) + 2);
      break;
    }
    if (tokens[t].rfind("--config=", 0) == 0) {
      config_path = tokens[t].substr(9);
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(t));
      break;
    }
  }
  if (config_path.empty()) return tokens;
  if (!fs::exists(config_path)) throw ConfigError("config file does not exist: " + config_path);

  std::istringstream lines(read_text_file(config_path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(config_path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = line.substr(first, eq - first);
    const std::string flag = "--" + key;
    bool overridden = false;
    for (const auto& token : tokens)
      if (token == flag || token.rfind(flag + "=", 0) == 0) {
        overridden = true;
        break;
      }
    if (!overridden) tokens.push_back(flag + "=" + line.substr(eq + 1));
  }
  return tokens;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dependency-graph model estimation and vulnerability contagion toolkit"};
  app.require_subcommand(1);

  int workers = 0;
  std::uint64_t seed = 1;
  app.add_option("--workers", workers, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--seed", seed, "top-level seed; all randomness derives from it")
      ->capture_default_str();

  std::string edges, nodes, out_dir = ".", in_dir = ".", graph_path, out_path;
  std::vector<std::string> min_bounds, max_bounds;
  int quantiles = 4;
  bool lcc_only = false;

  std::string config_dummy;
  auto add_config = [&config_dummy](CLI::App* sub) {
    sub->fallthrough();
    sub->add_option("--config", config_dummy,
                    "flat key=value run configuration; explicit flags win");
  };

  auto* ingest = app.add_subcommand("ingest", "build graph artifacts from CSV dumps");
  add_config(ingest);
  ingest->add_option("--edges", edges, "edges CSV (source_repo,target_repo)")->required();
  ingest->add_option("--nodes", nodes, "nodes CSV (repo,<covariates...>)")->required();
  ingest->add_option("--out", out_dir, "output directory")->capture_default_str();
  ingest->add_option("--filter-min", min_bounds, "keep rows with covariate >= bound (name=value)");
  ingest->add_option("--filter-max", max_bounds, "keep rows with covariate <= bound (name=value)");
  ingest->add_option("--quantiles", quantiles, "covariate categories")->capture_default_str();
  ingest->add_flag("--lcc", lcc_only, "restrict to the largest weak component");

  auto* stats = app.add_subcommand("stats", "degree and centrality summary of a graph artifact");
  add_config(stats);
  stats->add_option("--graph", graph_path, "graph binary")->required();
  stats->add_option("--out", out_path, "write JSON here instead of stdout");

  int type_count = 32, max_iter = 300, warm_iters = 0;
  double tol = 1e-7, negative_subsample = 1.0;
  std::string init_path, resume_path;
  auto* fit = app.add_subcommand("fit", "two-step estimation: types by VEM, then MPLE");
  add_config(fit);
  fit->add_option("--in", in_dir, "directory with graph.bin")->capture_default_str();
  fit->add_option("--out", out_dir, "output directory")->capture_default_str();
  fit->add_option("--k", type_count, "number of latent types")->capture_default_str();
  fit->add_option("--init", init_path, "labels CSV to initialize types");
  fit->add_option("--resume", resume_path, "checkpoint JSON to continue from");
  fit->add_option("--max-iter", max_iter, "VEM iteration cap")->capture_default_str();
  fit->add_option("--tol", tol, "relative lower-bound improvement tolerance")
      ->capture_default_str();
  fit->add_option("--warm-iters", warm_iters, "covariate-free warm iterations")
      ->capture_default_str();
  fit->add_option("--negative-subsample", negative_subsample,
                  "fraction of zero dyads kept in MPLE (1 = exact)")
      ->capture_default_str();

  std::string params_path, types_path;
  std::int64_t steps = 0, burnin = 0;
  auto* simulate = app.add_subcommand("simulate", "draw a graph from the formation model");
  add_config(simulate);
  simulate->add_option("--nodes", nodes, "nodes CSV with covariates")->required();
  simulate->add_option("--params", params_path, "structural parameter JSON")->required();
  simulate->add_option("--types", types_path, "labels CSV (default: sample from eta)");
  simulate->add_option("--steps", steps, "link updates after burn-in")->required();
  simulate->add_option("--burnin", burnin, "burn-in updates")->capture_default_str();
  simulate->add_option("--out", out_dir, "output directory")->capture_default_str();
  simulate->add_option("--quantiles", quantiles, "covariate categories")->capture_default_str();

  std::vector<int> k_list{2, 3, 4, 5};
  auto* contagion = app.add_subcommand("contagion", "per-node systemicness analytics");
  add_config(contagion);
  contagion->add_option("--in", in_dir, "directory with graph.bin")->capture_default_str();
  contagion->add_option("--out", out_dir, "output directory")->capture_default_str();
  contagion->add_option("--k", k_list, "systemicness depths")->capture_default_str();

  std::vector<std::string> strategies{"expected-systemicness"};
  std::vector<int> l_list{10, 100};
  std::string protect_list;
  auto* protect = app.add_subcommand("protect", "targeted-protection counterfactuals");
  add_config(protect);
  protect->add_option("--in", in_dir, "directory with graph.bin")->capture_default_str();
  protect->add_option("--out", out_dir, "output directory")->capture_default_str();
  protect->add_option("--k", k_list, "systemicness depths")->capture_default_str();
  protect->add_option("--strategies", strategies,
                      "expected-systemicness and/or in-degree")->capture_default_str();
  protect->add_option("--l", l_list, "protected-node counts")->capture_default_str();
  protect->add_option("--protect-list", protect_list,
                      "labels CSV; rows with label 1 are protected");

  try {
    std::vector<std::string> tokens(argv + 1, argv + argc);
    tokens = apply_config_file(std::move(tokens));
    std::reverse(tokens.begin(), tokens.end());
    app.parse(std::move(tokens));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    set_worker_count(workers);
    if (ingest->parsed())
      return run_ingest(edges, nodes, out_dir, min_bounds, max_bounds, quantiles, lcc_only);
    if (stats->parsed()) return run_stats(graph_path, out_path);
    if (fit->parsed())
      return run_fit(in_dir, out_dir, type_count, init_path, resume_path, max_iter, tol,
                     warm_iters, seed, negative_subsample);
    if (simulate->parsed())
      return run_simulate(nodes, params_path, types_path, steps, burnin, seed, out_dir, quantiles);
    if (contagion->parsed()) return run_contagion(in_dir, out_dir, k_list);
    if (protect->parsed())
      return run_protect(in_dir, out_dir, k_list, strategies, l_list, protect_list);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
