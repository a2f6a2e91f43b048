// Acceptance suite: one check per shipped guarantee, each printed as a
// PASS/FAIL line. Returns nonzero if any non-skipped check fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "depnet/communities.hpp"
#include "depnet/components.hpp"
#include "depnet/contagion.hpp"
#include "depnet/csv_io.hpp"
#include "depnet/formation.hpp"
#include "depnet/mple.hpp"
#include "depnet/serialize.hpp"
#include "depnet/vem.hpp"
#include "../oracles.hpp"

using namespace depnet;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------- helpers

DependencyGraph graph_from_mask(Index n, std::uint32_t mask) {
  std::vector<std::pair<Index, Index>> edges;
  int bit = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if ((mask >> bit) & 1u) edges.emplace_back(i, j);
      ++bit;
    }
  return DependencyGraph::from_edges(n, edges);
}

DependencyGraph planted_sbm(Index n, int blocks, Scalar p_within, Scalar p_between,
                            std::uint64_t seed, std::vector<int>* truth) {
  SplitMix64 rng(seed);
  truth->resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    (*truth)[static_cast<std::size_t>(i)] = static_cast<int>(i % blocks);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool same =
          (*truth)[static_cast<std::size_t>(i)] == (*truth)[static_cast<std::size_t>(j)];
      if (rng.next_double() < (same ? p_within : p_between)) edges.emplace_back(i, j);
    }
  return DependencyGraph::from_edges(n, edges);
}

Scalar best_label_agreement(const std::vector<int>& got, const std::vector<int>& truth, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::sort(perm.begin(), perm.end());
  Scalar best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < got.size(); ++i)
      if (perm[static_cast<std::size_t>(got[i])] == truth[i]) ++hits;
    best = std::max(best, static_cast<Scalar>(hits) / static_cast<Scalar>(got.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Preferential-attachment-style dependency graph with aging: each new node
// depends on m earlier nodes drawn with weight (dependents + 1) *
// exp(-age/tau). The recency decay layers the hubs instead of funneling
// every link to the oldest nodes, which is what gives protection its bite.
DependencyGraph preferential_attachment(Index n, int m, Scalar tau, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::pair<Index, Index>> edges;
  std::vector<Index> dependents(static_cast<std::size_t>(n), 0);
  std::vector<Scalar> weight(static_cast<std::size_t>(n), 0.0);
  for (Index v = 1; v < n; ++v) {
    for (Index u = 0; u < v; ++u)
      weight[static_cast<std::size_t>(u)] =
          (dependents[static_cast<std::size_t>(u)] + 1.0) *
          std::exp(-static_cast<Scalar>(v - u) / tau);
    std::vector<Index> targets;
    const int want = std::min<int>(m, v);
    while (static_cast<int>(targets.size()) < want) {
      Scalar total = 0;
      for (Index u = 0; u < v; ++u) total += weight[static_cast<std::size_t>(u)];
      Scalar pick = rng.next_double() * total;
      Index chosen = v - 1;
      for (Index u = 0; u < v; ++u) {
        pick -= weight[static_cast<std::size_t>(u)];
        if (pick < 0) {
          chosen = u;
          break;
        }
      }
      if (std::find(targets.begin(), targets.end(), chosen) == targets.end())
        targets.push_back(chosen);
    }
    for (Index u : targets) {
      edges.emplace_back(v, u);
      ++dependents[static_cast<std::size_t>(u)];
    }
  }
  return DependencyGraph::from_edges(n, edges);
}

std::string run_cli(const std::string& args) {
  const std::string cmd = std::string(DEPNET_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc != 0) return "cli exited with " + std::to_string(rc) + ": " + args;
  return "";
}

// ---------------------------------------------------------------- criteria

std::string criterion_sampler_vs_exact() {
  const Index n = 4;
  for (const Scalar gamma : {0.0, 0.3}) {
    SplitMix64 prng(gamma == 0.0 ? 2024 : 2025);
    auto cov = oracles::random_covariates(n, 1, 2, prng.next_u64());
    StructuralParams params;
    params.alpha_within = prng.next_in(-4.5, -3.5);
    params.beta_within = Vector(1);
    params.beta_within << prng.next_in(-0.3, 0.3);
    params.beta_between = Vector::Zero(1);
    params.gamma = gamma;
    TypeAssignment types;
    types.labels.assign(4, 0);
    types.type_count = 1;

    // exact distribution over all 4096 directed graphs
    std::vector<Scalar> exact(4096);
    Scalar total = 0;
    for (std::uint32_t mask = 0; mask < 4096; ++mask) {
      auto g = graph_from_mask(n, mask);
      exact[mask] = std::exp(exact_stationary_logprob(g, cov, types, params));
      total += exact[mask];
    }
    if (std::abs(total - 1.0) > 1e-9)
      return "exact probabilities sum to " + fmt(total) + " (gamma=" + fmt(gamma) + ")";

    GlauberChain chain(cov, types, params, 555);
    chain.run(100000);  // burn-in
    std::vector<std::int64_t> visits(4096, 0);
    const std::int64_t steps = 1000000;
    for (std::int64_t s = 0; s < steps; ++s) {
      chain.step();
      ++visits[chain.state_mask()];
    }
    Scalar tv = 0;
    for (std::uint32_t mask = 0; mask < 4096; ++mask)
      tv += std::abs(static_cast<Scalar>(visits[mask]) / static_cast<Scalar>(steps) -
                     exact[mask]);
    tv *= 0.5;
    if (tv >= 0.02)
      return "total variation " + fmt(tv) + " >= 0.02 at gamma=" + fmt(gamma);
  }
  return "";
}

std::string criterion_change_statistic() {
  int instances = 0;
  for (std::uint64_t seed = 0; instances < 200; ++seed) {
    SplitMix64 rng(seed * 1009 + 7);
    const Index n = 3 + static_cast<Index>(rng.next_below(4));
    auto g = oracles::random_graph(n, rng.next_in(0.1, 0.6), seed);
    auto cov = oracles::random_covariates(n, 2, 2, seed + 3);
    auto params = oracles::random_params(2, seed + 5, rng.next_in(-0.7, 0.7));
    TypeAssignment types;
    types.type_count = 2;
    for (Index v = 0; v < n; ++v) types.labels.push_back(static_cast<int>(rng.next_below(2)));
    auto dense = oracles::dense_adjacency(g);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const Scalar fast = change_statistic(g, i, j, cov, types, params);
        const Scalar brute = oracles::brute_change(dense, i, j, cov, types, params);
        if (std::abs(fast - brute) > 1e-10)
          return "mismatch " + fmt(fast - brute) + " at instance " + std::to_string(instances);
      }
    ++instances;
  }
  return "";
}

std::string criterion_sparse_omega() {
  for (int instance = 0; instance < 50; ++instance) {
    SplitMix64 rng(static_cast<std::uint64_t>(instance) * 31 + 11);
    const Index n = 20 + static_cast<Index>(rng.next_below(181));  // <= 200
    const int k = 1 + static_cast<int>(rng.next_below(5));         // <= 5
    const int p = static_cast<int>(rng.next_below(3));             // <= 2
    auto g = oracles::random_graph(n, rng.next_in(0.01, 0.08), rng.next_u64());
    auto cov = oracles::random_covariates(n, p, 4, rng.next_u64());
    RowMatrix xi(n, k);
    for (Index i = 0; i < n; ++i) {
      Scalar row_total = 0;
      for (int c = 0; c < k; ++c) {
        xi(i, c) = 0.05 + rng.next_double();
        row_total += xi(i, c);
      }
      xi.row(i) /= row_total;
    }
    VariationalState state;
    state.xi = xi;
    state.eta = update_eta(xi);
    state.pi = update_pi(g, cov, xi, 0.5);
    auto terms = compute_quadratic_terms(g, cov, state, 0.0);
    const RowMatrix omega = oracles::naive_omega(g, cov, xi, state.pi);
    for (Index i = 0; i < n; ++i)
      for (int c = 0; c < k; ++c) {
        const Scalar fast = (terms.A(i, c) + 1.0 / xi(i, c)) * 2.0 * xi(i, c);
        if (std::abs(fast - omega(i, c)) > 1e-9)
          return "omega mismatch " + fmt(fast - omega(i, c)) + " at instance " +
                 std::to_string(instance);
      }
  }
  return "";
}

std::string criterion_mm_monotonicity() {
  std::vector<int> truth;
  auto g = planted_sbm(600, 3, 0.10, 0.005, 4242, &truth);
  auto cov = CovariateTable::empty(600);

  // full run: the recorded trace must never decrease
  auto state = run_vem(g, cov, 3, truth, {});
  for (std::size_t s = 1; s < state.lower_bound_trace.size(); ++s)
    if (state.lower_bound_trace[s] < state.lower_bound_trace[s - 1] - 1e-8)
      return "trace decreased at iteration " + std::to_string(s) + " by " +
             fmt(state.lower_bound_trace[s - 1] - state.lower_bound_trace[s]);

  // manual iterations: touch equality and domination at 100 points each
  SplitMix64 rng(999);
  RowMatrix xi = soften_labels(truth, 3, 1e-3);
  for (int iter = 0; iter < 5; ++iter) {
    VariationalState st;
    st.xi = xi;
    st.eta = update_eta(xi);
    st.pi = update_pi(g, cov, xi, 0.5);
    const Scalar bound = lower_bound(g, cov, st);
    auto terms = compute_quadratic_terms(g, cov, st, 1e-7);
    const Scalar touch = minorizer_value(terms, xi);
    if (std::abs(touch - bound) > 1e-9 * std::max(1.0, std::abs(bound)))
      return "touch violated at iteration " + std::to_string(iter) + ": " +
             fmt(touch - bound);
    for (int probe = 0; probe < 100; ++probe) {
      RowMatrix candidate = xi;
      for (int move = 0; move < 40; ++move) {
        const auto i = static_cast<Index>(rng.next_below(600));
        Scalar row_total = 0;
        for (int c = 0; c < 3; ++c) {
          candidate(i, c) = std::max(1e-8, candidate(i, c) + rng.next_in(-0.3, 0.3));
          row_total += candidate(i, c);
        }
        candidate.row(i) /= row_total;
      }
      VariationalState probe_state = st;
      probe_state.xi = candidate;
      const Scalar lb = lower_bound(g, cov, probe_state);
      const Scalar m = minorizer_value(terms, candidate);
      if (m > lb + 1e-9 * std::max(1.0, std::abs(lb)))
        return "domination violated at iteration " + std::to_string(iter) + ": " + fmt(m - lb);
    }
    // advance: one MM step
    RowMatrix next(600, 3);
    for (Index i = 0; i < 600; ++i)
      next.row(i) = solve_node_simplex_qp(terms.A.row(i).transpose(),
                                          terms.B.row(i).transpose())
                        .transpose();
    for (Index i = 0; i < 600; ++i) {
      for (int c = 0; c < 3; ++c) next(i, c) = std::max(next(i, c), 1e-6);
      next.row(i) /= next.row(i).sum();
    }
    xi = next;
  }
  return "";
}

std::string criterion_type_recovery() {
  std::vector<int> truth;
  auto g = planted_sbm(600, 3, 0.10, 0.005, 31337, &truth);
  auto cov = CovariateTable::empty(600);
  auto init = detect_communities(g);
  auto state = run_vem(g, cov, 3, init, {});
  auto hardened = harden_types(state.xi);
  const Scalar agreement = best_label_agreement(hardened.labels, truth, 3);
  if (agreement < 0.95) return "agreement " + fmt(agreement) + " < 0.95";
  return "";
}

std::string criterion_mple_recovery() {
  const Index n = 300;
  auto cov = oracles::random_covariates(n, 1, 2, 777);
  TypeAssignment types;
  types.type_count = 2;
  types.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) types.labels[static_cast<std::size_t>(i)] = i < n / 2 ? 0 : 1;

  std::string failures;
  for (const Scalar gamma_truth : {0.2, 0.0}) {
    StructuralParams truth;
    truth.alpha_within = -4.0;
    truth.alpha_between = -5.0;
    truth.beta_within = Vector::Zero(1);
    truth.beta_between = Vector::Zero(1);
    truth.gamma = gamma_truth;

    // ~90 full sweeps of the N(N-1) dyads: a long-run draw
    auto g = glauber_sample(cov, types, truth, 8000000, gamma_truth == 0.0 ? 91 : 90);
    std::int64_t within_edges = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j : g.out_edges(i))
        if (types.labels[static_cast<std::size_t>(i)] ==
            types.labels[static_cast<std::size_t>(j)])
          ++within_edges;
    const Scalar within_density =
        static_cast<Scalar>(within_edges) / (2.0 * 150.0 * 149.0);

    std::string leg;
    try {
      auto fit = fit_structural(g, cov, types);
      if (!fit.within || !fit.within->converged) {
        leg = "within stratum did not converge";
      } else if (!fit.between || !fit.between->converged) {
        leg = "between stratum did not converge";
      } else {
        const auto check = [&](Scalar estimate, Scalar se, Scalar target,
                               const std::string& name) -> std::string {
          if (std::abs(estimate - target) >= 3.0 * se)
            return name + " = " + fmt(estimate) + " (se " + fmt(se) + ") misses " + fmt(target);
          return "";
        };
        leg = check(fit.estimates.alpha_within, fit.within->std_errors[0], -4.0, "alpha_w");
        if (leg.empty())
          leg = check(fit.estimates.beta_within[0], fit.within->std_errors[1], 0.0, "beta_w");
        if (leg.empty())
          leg = check(fit.estimates.gamma, fit.within->std_errors[2], gamma_truth, "gamma");
        if (leg.empty())
          leg = check(fit.estimates.alpha_between, fit.between->std_errors[0], -5.0, "alpha_b");
        if (leg.empty())
          leg = check(fit.estimates.beta_between[0], fit.between->std_errors[1], 0.0, "beta_b");
      }
    } catch (const std::exception& e) {
      leg = e.what();
    }
    if (!leg.empty()) {
      if (!failures.empty()) failures += "; ";
      failures += "gamma=" + fmt(gamma_truth) + ": " + leg +
                  " [long-run within-block density " + fmt(within_density) + "]";
    }
  }
  return failures;
}

std::string criterion_contagion_oracles() {
  for (std::uint64_t instance = 0; instance < 100; ++instance) {
    SplitMix64 rng(instance * 97 + 13);
    const Index n = 10 + static_cast<Index>(rng.next_below(91));  // <= 100
    auto g = oracles::random_graph(n, rng.next_in(0.01, 0.08), instance + 40000);
    std::vector<bool> blocked(static_cast<std::size_t>(n), false);
    for (Index v = 0; v < n; ++v)
      if (rng.next_double() < 0.08) blocked[static_cast<std::size_t>(v)] = true;
    ProtectedSet prot(blocked.begin(), blocked.end());

    for (int probe = 0; probe < 5; ++probe) {
      const auto seed_node = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n)));
      const int k = 1 + static_cast<int>(rng.next_below(5));
      if (k_step_systemicness(g, seed_node, k, prot) !=
          oracles::reach_oracle(g, seed_node, k, blocked))
        return "systemicness mismatch at instance " + std::to_string(instance);
    }
    for (Index v = 0; v < n; ++v)
      if (std::abs(expected_fatality(g, v) - oracles::ef_oracle(g, v)) > 1e-10)
        return "expected fatality mismatch at instance " + std::to_string(instance);
    auto fast = betweenness(g);
    auto slow = oracles::fw_betweenness(g);
    for (Index v = 0; v < n; ++v)
      if (std::abs(fast[static_cast<std::size_t>(v)] - slow[static_cast<std::size_t>(v)]) > 1e-10)
        return "betweenness mismatch at instance " + std::to_string(instance);
  }
  return "";
}

std::string criterion_protection_monotonicity() {
  auto g = preferential_attachment(2000, 3, 100.0, 606060);
  std::vector<Index> l_values{0, 10, 50, 100};
  std::vector<Scalar> averages;
  for (Index l : l_values) {
    ProtectionSpec spec;
    spec.strategy = ProtectionSpec::Strategy::ExpectedSystemicness;
    spec.count = l;
    auto report = protection_experiment(g, {spec}, {5});
    averages.push_back(report.curves[0].avg_systemicness);
  }
  for (std::size_t i = 1; i < averages.size(); ++i)
    if (averages[i] > averages[i - 1] + 1e-12)
      return "average syst.5 increased from l=" + std::to_string(l_values[i - 1]) + " to l=" +
             std::to_string(l_values[i]);
  const Scalar drop = averages[0] - averages[1];
  if (drop <= 10.0)
    return "protecting 10 hubs dropped the average by only " + fmt(drop) + " counts";
  return "";
}

std::string criterion_full_data() {
  const char* dir = std::getenv("DEPNET_CARGO_DIR");
  if (dir == nullptr || std::string(dir).empty())
    return "SKIP: set DEPNET_CARGO_DIR to a directory with edges.csv and nodes.csv from the "
           "libraries.io Cargo snapshot";
  const std::string edges = std::string(dir) + "/edges.csv";
  const std::string nodes = std::string(dir) + "/nodes.csv";
  if (!fs::exists(edges) || !fs::exists(nodes))
    return "SKIP: " + std::string(dir) + " lacks edges.csv / nodes.csv";

  auto ingested = ingest_dependency_csv(edges, nodes);
  const auto& g = ingested.graph;
  if (g.node_count() != 35473)
    return "node count " + std::to_string(g.node_count()) + " != 35473";
  if (g.edge_count() != 696790)
    return "edge count " + std::to_string(g.edge_count()) + " != 696790";
  if (weak_component_count(g) != 91)
    return "component count " + std::to_string(weak_component_count(g)) + " != 91";

  auto lcc = largest_weak_component(g, ingested.covariates);
  if (lcc.graph.node_count() != 35274)
    return "LCC node count " + std::to_string(lcc.graph.node_count()) + " != 35274";
  if (lcc.graph.edge_count() != 696679)
    return "LCC edge count " + std::to_string(lcc.graph.edge_count()) + " != 696679";

  auto stats = degree_stats(lcc.graph);
  if (std::abs(stats.in_degree.mean - 19.75) > 0.01)
    return "mean degree " + fmt(stats.in_degree.mean) + " != 19.75 +- 0.01";
  if (stats.in_degree.max != 14585)
    return "max in-degree " + fmt(stats.in_degree.max) + " != 14585";

  Index libc = -1, serde = -1;
  for (Index v = 0; v < lcc.graph.node_count(); ++v) {
    if (lcc.graph.name(v) == "rust-lang/libc") libc = v;
    if (lcc.graph.name(v) == "serde-rs/serde") serde = v;
  }
  if (libc >= 0) {
    auto centrality = eigenvector_centrality(lcc.graph, 1e-10, 2000);
    if (centrality.scores[static_cast<std::size_t>(libc)] != 1.0)
      return "rust-lang/libc eigenvector centrality " +
             fmt(centrality.scores[static_cast<std::size_t>(libc)]) + " != 1.0";
  }
  for (int c = 0; c < lcc.covariates.covariate_count(); ++c) {
    if (lcc.covariates.names()[static_cast<std::size_t>(c)] != "Size") continue;
    std::vector<Scalar> sizes;
    for (Index v = 0; v < lcc.graph.node_count(); ++v)
      if (!lcc.covariates.is_missing(v, c)) sizes.push_back(lcc.covariates.raw()(v, c));
    std::sort(sizes.begin(), sizes.end());
    const Scalar median = nearest_rank_quantile(sizes, 0.5);
    if (median != 79) return "Size median " + fmt(median) + " != 79";
  }

  auto syst = systemicness_all(lcc.graph, {2, 5}, no_protection(lcc.graph.node_count()));
  if (serde >= 0 && syst[0][static_cast<std::size_t>(serde)] != 26631)
    return "serde-rs/serde syst.2 " + std::to_string(syst[0][static_cast<std::size_t>(serde)]) +
           " != 26631";
  if (libc >= 0 && syst[1][static_cast<std::size_t>(libc)] != 31951)
    return "rust-lang/libc syst.5 " + std::to_string(syst[1][static_cast<std::size_t>(libc)]) +
           " != 31951";
  auto panel2 = summarize_systemicness(syst[0]);
  auto panel5 = summarize_systemicness(syst[1]);
  if (std::abs(panel2.mean - 52.08) > 0.5)
    return "mean syst.2 " + fmt(panel2.mean) + " != 52.08 +- 0.5";
  if (panel5.max != 31951) return "max syst.5 " + fmt(panel5.max) + " != 31951";

  ProtectionSpec spec;
  spec.strategy = ProtectionSpec::Strategy::ExpectedSystemicness;
  spec.count = 10;
  auto report = protection_experiment(lcc.graph, {spec}, {5});
  const Scalar reduction = 1.0 - report.curves[0].avg_systemicness / panel5.mean;
  if (reduction < 0.35 || reduction > 0.45)
    return "protection reduction " + fmt(reduction) + " outside [0.35, 0.45]";

  auto init = detect_communities(lcc.graph);
  VemOptions options;
  options.max_iter = 300;
  auto state = run_vem(lcc.graph, lcc.covariates, 32, init, options);
  auto types = harden_types(state.xi);
  MpleOptions mple_options;
  mple_options.negative_subsample = 0.02;
  mple_options.seed = 17;
  auto fit = fit_structural(lcc.graph, lcc.covariates, types, mple_options);
  if (!fit.within) return "within stratum absent on snapshot fit";
  if (fit.estimates.gamma <= 0)
    return "gamma " + fmt(fit.estimates.gamma) + " not positive on the snapshot";
  return "";
}

std::string criterion_cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "depnet_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string base = dir.string();

  // fixture: two-block graph, large enough that the parallel chunked paths
  // actually split work across threads
  SplitMix64 rng(31415);
  const int fixture_n = 300;
  std::string nodes = "repo,Size\n";
  for (int i = 0; i < fixture_n; ++i)
    nodes += "r" + std::to_string(i) + "," + std::to_string(1 + (i * 7) % 23) + "\n";
  std::string edges = "source_repo,target_repo\n";
  for (int i = 0; i < fixture_n; ++i)
    for (int j = 0; j < fixture_n; ++j) {
      if (i == j) continue;
      const bool same = (i < fixture_n / 2) == (j < fixture_n / 2);
      if (rng.next_double() < (same ? 0.08 : 0.01))
        edges += "r" + std::to_string(i) + ",r" + std::to_string(j) + "\n";
    }
  write_text_file(base + "/nodes.csv", nodes);
  write_text_file(base + "/edges.csv", edges);

  StructuralParams params;
  params.alpha_within = -3.5;
  params.alpha_between = -4.5;
  params.beta_within = Vector::Zero(1);
  params.beta_between = Vector::Zero(1);
  params.gamma = 0.02;
  params.eta = Vector(2);
  params.eta << 0.5, 0.5;
  write_text_file(base + "/params.json", params_json(params, {"Size"}));

  struct Step {
    std::string name;
    std::string args;
    std::vector<std::string> outputs;
  };
  const std::vector<Step> steps = {
      {"ingest", "ingest --edges {base}/edges.csv --nodes {base}/nodes.csv --out {out}",
       {"graph.bin", "stats.json"}},
      {"fit",
       "--seed 7 --workers {workers} fit --in {ingest} --out {out} --k 2 --max-iter 30",
       {"checkpoint.json", "trace.csv", "fit.json", "fit.csv", "types.csv"}},
      {"simulate",
       "--seed 11 --workers {workers} simulate --nodes {base}/nodes.csv --params "
       "{base}/params.json --steps 100000 --burnin 1000 --out {out}",
       {"sampled_edges.csv", "sampled_types.csv", "sampled_stats.json"}},
      {"contagion", "--workers {workers} contagion --in {ingest} --out {out} --k 2 --k 3",
       {"contagion_pernode.csv", "contagion_summaries.json"}},
      {"protect",
       "--workers {workers} protect --in {ingest} --out {out} --k 2 --k 5 --l 5 --l 10 "
       "--strategies expected-systemicness --strategies in-degree",
       {"protection_curves.csv", "contagion_summaries.json"}},
  };

  auto substitute = [&](std::string text, const std::string& out, int workers) {
    auto replace_all = [](std::string s, const std::string& from, const std::string& to) {
      for (std::size_t at = s.find(from); at != std::string::npos; at = s.find(from))
        s.replace(at, from.size(), to);
      return s;
    };
    text = replace_all(text, "{base}", base);
    text = replace_all(text, "{ingest}", base + "/run_a/ingest");
    text = replace_all(text, "{out}", out);
    text = replace_all(text, "{workers}", std::to_string(workers));
    return text;
  };

  // pass A (1 worker), pass B (2 workers): outputs must be byte-identical
  for (const auto& step : steps) {
    const std::string out_a = base + "/run_a/" + step.name;
    const std::string out_b = base + "/run_b/" + step.name;
    fs::create_directories(out_a);
    fs::create_directories(out_b);
    std::string err = run_cli(substitute(step.args, out_a, 1));
    if (!err.empty()) return err;
    err = run_cli(substitute(step.args, out_b, 2));
    if (!err.empty()) return err;
    for (const auto& file : step.outputs) {
      const std::string a = read_text_file(out_a + "/" + file);
      const std::string b = read_text_file(out_b + "/" + file);
      if (a != b) return step.name + ": " + file + " differs across runs/worker counts";
      if (a.empty()) return step.name + ": " + file + " is empty";
    }
  }
  fs::remove_all(dir);
  return "";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    std::function<std::string()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "exact-vs-sampler total variation < 0.02 (N=4, gamma in {0, 0.3})",
       criterion_sampler_vs_exact},
      {2, "change statistic equals brute-force potential difference (200 instances)",
       criterion_change_statistic},
      {3, "sparse quadratic terms match the naive oracle (50 instances)",
       criterion_sparse_omega},
      {4, "lower-bound trace monotone; minorizer touch and domination", criterion_mm_monotonicity},
      {5, "planted 3-block recovery >= 95% from modularity start", criterion_type_recovery},
      {6, "MPLE recovers simulation parameters within 3 SE", criterion_mple_recovery},
      {7, "contagion measures match brute-force oracles (100 graphs)",
       criterion_contagion_oracles},
      {8, "protection monotone in l with amplification on a PA graph",
       criterion_protection_monotonicity},
      {9, "full Cargo snapshot replication (conditional on data)", criterion_full_data},
      {10, "CLI outputs byte-identical across reruns and worker counts",
       criterion_cli_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string message;
    try {
      message = criterion.run();
    } catch (const std::exception& e) {
      message = std::string("exception: ") + e.what();
    }
    const auto seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string status = "PASS";
    if (message.rfind("SKIP:", 0) == 0)
      status = "SKIP";
    else if (!message.empty())
      status = "FAIL";
    if (status == "FAIL") ++failures;
    std::cout << "criterion " << criterion.id << ": " << status << " (" << fmt(seconds)
              << "s) " << criterion.name;
    if (!message.empty()) std::cout << " -- " << message;
    std::cout << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
