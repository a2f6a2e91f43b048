#include "depnet/formation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace depnet {

void StructuralParams::validate() const {
  if (beta_within.size() != beta_between.size())
    throw DataError("beta_within and beta_between must have the same length");
  if (eta.size() > 0) {
    if ((eta.array() < 0).any()) throw DataError("eta must be non-negative");
    if (std::abs(eta.sum() - 1.0) > 1e-12) throw DataError("eta must sum to 1");
  }
}

void TypeAssignment::validate(Index node_count) const {
  if (type_count < 1) throw DataError("need at least one type");
  if (labels.size() != static_cast<std::size_t>(node_count))
    throw DataError("type labels do not match node count");
  for (int z : labels)
    if (z < 0 || z >= type_count) throw DataError("type label out of range");
}

TypeAssignment make_types(std::vector<int> labels) {
  TypeAssignment t;
  t.type_count = 1;
  for (int z : labels) {
    if (z < 0) throw DataError("type labels must be non-negative");
    t.type_count = std::max(t.type_count, z + 1);
  }
  t.labels = std::move(labels);
  return t;
}

Scalar direct_utility(const std::vector<bool>& match_indicators, bool same_type,
                      const StructuralParams& params) {
  if (static_cast<int>(match_indicators.size()) != params.covariate_count())
    throw DataError("match indicator length does not match beta length");
  Scalar u = same_type ? params.alpha_within : params.alpha_between;
  const Vector& beta = same_type ? params.beta_within : params.beta_between;
  for (int p = 0; p < params.covariate_count(); ++p)
    if (match_indicators[static_cast<std::size_t>(p)]) u += beta[p];
  return u;
}

Scalar pair_utility(const CovariateTable& cov, Index i, Index j, bool same_type,
                    const StructuralParams& params) {
  if (cov.covariate_count() != params.covariate_count())
    throw DataError("covariate count does not match beta length");
  Scalar u = same_type ? params.alpha_within : params.alpha_between;
  const Vector& beta = same_type ? params.beta_within : params.beta_between;
  for (int p = 0; p < params.covariate_count(); ++p)
    if (cov.match(i, j, p)) u += beta[p];
  return u;
}

Scalar potential(const DependencyGraph& graph, const CovariateTable& cov,
                 const StructuralParams& params) {
  const Index n = graph.node_count();
  Scalar q = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j : graph.out_edges(i)) q += pair_utility(cov, i, j, true, params);
  // Directed two-paths i -> j -> r over distinct ordered triples.
  std::int64_t two_paths = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j : graph.out_edges(i))
      for (Index r : graph.out_edges(j))
        if (r != i) ++two_paths;
  return q + params.gamma * static_cast<Scalar>(two_paths);
}

Scalar change_statistic(const DependencyGraph& graph, Index i, Index j, const CovariateTable& cov,
                        const TypeAssignment& types, const StructuralParams& params) {
  if (i == j) throw DataError("change statistic of a self-loop");
  const int ti = types.labels[static_cast<std::size_t>(i)];
  const int tj = types.labels[static_cast<std::size_t>(j)];
  if (ti != tj) return pair_utility(cov, i, j, false, params);

  Scalar delta = pair_utility(cov, i, j, true, params);
  std::int64_t completed = 0;
  for (Index r : graph.out_edges(j))
    if (r != i && types.labels[static_cast<std::size_t>(r)] == ti) ++completed;
  for (Index r : graph.in_edges(i))
    if (r != j && types.labels[static_cast<std::size_t>(r)] == ti) ++completed;
  return delta + params.gamma * static_cast<Scalar>(completed);
}

namespace {

constexpr int kMaxDyads = 20;

struct DyadTable {
  std::vector<std::pair<Index, Index>> dyads;
  std::vector<Scalar> utilities;
  // compose[d] marks the dyads (j, r) that extend dyad d = (i, j) into a
  // two-path i -> j -> r, r != i.
  std::vector<std::uint32_t> compose;
};

DyadTable build_dyad_table(Index n, const CovariateTable& cov, const StructuralParams& params) {
  DyadTable t;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) {
        t.dyads.emplace_back(i, j);
        t.utilities.push_back(pair_utility(cov, i, j, true, params));
      }
  const auto d_count = t.dyads.size();
  t.compose.assign(d_count, 0);
  for (std::size_t a = 0; a < d_count; ++a)
    for (std::size_t b = 0; b < d_count; ++b) {
      const auto [i, j] = t.dyads[a];
      const auto [j2, r] = t.dyads[b];
      if (j2 == j && r != i) t.compose[a] |= (1u << b);
    }
  return t;
}

}  // namespace

Scalar exact_log_normalizer(Index n, const CovariateTable& cov, const StructuralParams& params) {
  if (n < 0) throw DataError("negative block size");
  const std::int64_t dyad_count = static_cast<std::int64_t>(n) * (n - 1);
  if (dyad_count > kMaxDyads) throw NumericalError("enumeration bound exceeded");
  if (cov.row_count() != n) throw DataError("covariate rows do not match block size");
  if (dyad_count <= 0) return 0.0;  // single graph, potential 0

  DyadTable table = build_dyad_table(n, cov, params);
  const std::uint32_t mask_count = 1u << dyad_count;

  // First pass for the max, second for the shifted sum.
  auto potential_of = [&](std::uint32_t mask) {
    Scalar q = 0;
    std::int64_t two_paths = 0;
    std::uint32_t bits = mask;
    while (bits) {
      const int d = std::countr_zero(bits);
      bits &= bits - 1;
      q += table.utilities[static_cast<std::size_t>(d)];
      two_paths += std::popcount(mask & table.compose[static_cast<std::size_t>(d)]);
    }
    return q + params.gamma * static_cast<Scalar>(two_paths);
  };

  Scalar max_q = -std::numeric_limits<Scalar>::infinity();
  for (std::uint32_t mask = 0; mask < mask_count; ++mask)
    max_q = std::max(max_q, potential_of(mask));
  Scalar sum = 0;
  for (std::uint32_t mask = 0; mask < mask_count; ++mask)
    sum += std::exp(potential_of(mask) - max_q);
  return max_q + std::log(sum);
}

Scalar exact_stationary_logprob(const DependencyGraph& graph, const CovariateTable& cov,
                                const TypeAssignment& types, const StructuralParams& params) {
  const Index n = graph.node_count();
  types.validate(n);
  Scalar logp = 0;

  for (int k = 0; k < types.type_count; ++k) {
    std::vector<Index> block;
    for (Index v = 0; v < n; ++v)
      if (types.labels[static_cast<std::size_t>(v)] == k) block.push_back(v);
    if (block.empty()) continue;

    std::vector<Index> position(static_cast<std::size_t>(n), -1);
    for (std::size_t r = 0; r < block.size(); ++r)
      position[static_cast<std::size_t>(block[r])] = static_cast<Index>(r);
    std::vector<std::pair<Index, Index>> block_edges;
    for (Index v : block)
      for (Index u : graph.out_edges(v))
        if (position[static_cast<std::size_t>(u)] >= 0)
          block_edges.emplace_back(position[static_cast<std::size_t>(v)],
                                   position[static_cast<std::size_t>(u)]);
    auto block_graph =
        DependencyGraph::from_edges(static_cast<Index>(block.size()), block_edges);
    auto block_cov = cov.select_rows(block);
    logp += potential(block_graph, block_cov, params);
    logp -= exact_log_normalizer(static_cast<Index>(block.size()), block_cov, params);
  }

  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (types.labels[static_cast<std::size_t>(i)] == types.labels[static_cast<std::size_t>(j)])
        continue;
      const Scalar u = pair_utility(cov, i, j, false, params);
      if (graph.has_edge(i, j)) logp += u;
      logp -= log1p_exp(u);
    }
  return logp;
}

GlauberChain::GlauberChain(const CovariateTable& cov, const TypeAssignment& types,
                           const StructuralParams& params, std::uint64_t seed)
    : cov_(cov), types_(types), params_(params), n_(cov.row_count()), rng_(seed) {
  types_.validate(n_);
  params_.validate();
  if (cov_.covariate_count() != params_.covariate_count())
    throw DataError("covariate count does not match beta length");
  adjacency_.resize(static_cast<std::size_t>(n_));
  same_type_out_count_.assign(static_cast<std::size_t>(n_),
                              std::vector<Index>(static_cast<std::size_t>(types.type_count), 0));
  same_type_in_count_ = same_type_out_count_;
}

Scalar GlauberChain::local_change_statistic(Index i, Index j) const {
  const int ti = types_.labels[static_cast<std::size_t>(i)];
  const int tj = types_.labels[static_cast<std::size_t>(j)];
  if (ti != tj) return pair_utility(cov_, i, j, false, params_);
  // Counts maintained per type make this O(P): subtract the reverse edge,
  // which would otherwise be counted once in each term.
  Index completed = same_type_out_count_[static_cast<std::size_t>(j)][static_cast<std::size_t>(ti)] +
                    same_type_in_count_[static_cast<std::size_t>(i)][static_cast<std::size_t>(ti)];
  if (has_edge(j, i)) completed -= 2;
  return pair_utility(cov_, i, j, true, params_) +
         params_.gamma * static_cast<Scalar>(completed);
}

void GlauberChain::set_edge(Index i, Index j, bool present) {
  const bool existing = has_edge(i, j);
  if (existing == present) return;
  const int tj = types_.labels[static_cast<std::size_t>(j)];
  const int ti = types_.labels[static_cast<std::size_t>(i)];
  const Index delta = present ? 1 : -1;
  if (present)
    adjacency_[static_cast<std::size_t>(i)].insert(j);
  else
    adjacency_[static_cast<std::size_t>(i)].erase(j);
  same_type_out_count_[static_cast<std::size_t>(i)][static_cast<std::size_t>(tj)] += delta;
  same_type_in_count_[static_cast<std::size_t>(j)][static_cast<std::size_t>(ti)] += delta;
  edge_count_ += delta;
}

void GlauberChain::step() {
  const std::uint64_t pair_index = rng_.next_below(
      static_cast<std::uint64_t>(n_) * static_cast<std::uint64_t>(n_ - 1));
  const Index i = static_cast<Index>(pair_index / static_cast<std::uint64_t>(n_ - 1));
  Index j = static_cast<Index>(pair_index % static_cast<std::uint64_t>(n_ - 1));
  if (j >= i) ++j;
  const Scalar p_link = logistic(local_change_statistic(i, j));
  set_edge(i, j, rng_.next_double() < p_link);
}

void GlauberChain::run(std::int64_t steps) {
  for (std::int64_t s = 0; s < steps; ++s) step();
}

std::uint64_t GlauberChain::state_mask() const {
  if (static_cast<std::int64_t>(n_) * (n_ - 1) > 64)
    throw NumericalError("state mask limited to 64 dyads");
  std::uint64_t mask = 0;
  int bit = 0;
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j) {
      if (i == j) continue;
      if (has_edge(i, j)) mask |= (1ULL << bit);
      ++bit;
    }
  return mask;
}

DependencyGraph GlauberChain::graph(std::vector<std::string> names) const {
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(static_cast<std::size_t>(edge_count_));
  for (Index i = 0; i < n_; ++i)
    for (Index j : adjacency_[static_cast<std::size_t>(i)]) edges.emplace_back(i, j);
  return DependencyGraph::from_edges(n_, edges, std::move(names));
}

DependencyGraph glauber_sample(const CovariateTable& cov, const TypeAssignment& types,
                               const StructuralParams& params, std::int64_t steps,
                               std::uint64_t seed) {
  if (steps < 0) throw ConfigError("steps must be non-negative");
  GlauberChain chain(cov, types, params, seed);
  chain.run(steps);
  return chain.graph();
}

}  // namespace depnet
