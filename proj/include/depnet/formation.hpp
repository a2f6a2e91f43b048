#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "depnet/covariates.hpp"
#include "depnet/graph.hpp"
#include "depnet/rng.hpp"
#include "depnet/types.hpp"

namespace depnet {

/// Structural utility parameters. Within-type links pay alpha_w plus match
/// bonuses beta_w and generate the two-path externality gamma; between-type
/// links pay alpha_b plus beta_b and carry no externality. eta holds mixing
/// weights over types, needed only when types are drawn at random.
struct StructuralParams {
  Scalar alpha_within = 0;
  Scalar alpha_between = 0;
  Vector beta_within;   // length P
  Vector beta_between;  // length P
  Scalar gamma = 0;
  Vector eta;  // length K or empty

  int covariate_count() const { return static_cast<int>(beta_within.size()); }
  void validate() const;
};

struct TypeAssignment {
  std::vector<int> labels;  // values in [0, K)
  int type_count = 1;

  void validate(Index node_count) const;
};

/// Hard labels from arbitrary non-negative integers; K = max label + 1.
TypeAssignment make_types(std::vector<int> labels);

inline Scalar logistic(Scalar u) { return 1.0 / (1.0 + std::exp(-u)); }

/// log(1 + e^u) without overflow.
inline Scalar log1p_exp(Scalar u) {
  return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

/// Direct utility of one link given per-covariate match indicators.
Scalar direct_utility(const std::vector<bool>& match_indicators, bool same_type,
                      const StructuralParams& params);

/// Direct utility of link i -> j under a covariate table and types.
Scalar pair_utility(const CovariateTable& cov, Index i, Index j, bool same_type,
                    const StructuralParams& params);

/// Potential of a single-type network: sum of within utilities over edges
/// plus gamma times the number of directed two-paths i -> j -> r over
/// distinct ordered triples.
Scalar potential(const DependencyGraph& graph, const CovariateTable& cov,
                 const StructuralParams& params);

/// Change in the total graph weight from setting g_ij = 1 versus g_ij = 0,
/// holding everything else fixed. Equals the conditional log-odds of the
/// link. For a between-type pair this is just the direct utility; for a
/// within-type pair it adds gamma times the count of same-type two-paths the
/// edge completes (out-edges of j plus in-edges of i, excluding i and j).
Scalar change_statistic(const DependencyGraph& graph, Index i, Index j, const CovariateTable& cov,
                        const TypeAssignment& types, const StructuralParams& params);

/// log of the normalizing constant: sum of exp(potential) over all 2^{n(n-1)}
/// directed graphs on n single-type nodes. Throws beyond n(n-1) <= 20 dyads.
Scalar exact_log_normalizer(Index n, const CovariateTable& cov, const StructuralParams& params);

/// Exact log stationary probability of a typed graph: per-type block
/// potentials minus their log normalizers, plus independent Bernoulli terms
/// for every between-type ordered pair. Block sizes must stay within the
/// enumeration bound.
Scalar exact_stationary_logprob(const DependencyGraph& graph, const CovariateTable& cov,
                                const TypeAssignment& types, const StructuralParams& params);

/// Sequential link-update dynamics: each step draws an ordered pair (i, j)
/// uniformly and sets g_ij = 1 with probability logistic(change statistic).
/// Meeting probabilities are uniform; the stationary distribution does not
/// depend on them. The chain starts from the empty graph and is fully
/// determined by the seed.
class GlauberChain {
 public:
  GlauberChain(const CovariateTable& cov, const TypeAssignment& types,
               const StructuralParams& params, std::uint64_t seed);

  void step();
  void run(std::int64_t steps);

  Index node_count() const { return n_; }
  bool has_edge(Index i, Index j) const {
    return adjacency_[static_cast<std::size_t>(i)].count(j) > 0;
  }
  std::int64_t edge_count() const { return edge_count_; }

  /// Dyads in row-major (i, j != i) order packed into a bitmask; only valid
  /// for n*(n-1) <= 64. Used by enumeration cross-checks.
  std::uint64_t state_mask() const;

  DependencyGraph graph(std::vector<std::string> names = {}) const;

 private:
  Scalar local_change_statistic(Index i, Index j) const;
  void set_edge(Index i, Index j, bool present);

  const CovariateTable& cov_;
  const TypeAssignment& types_;
  const StructuralParams& params_;
  Index n_;
  SplitMix64 rng_;
  std::vector<std::unordered_set<Index>> adjacency_;      // out-edges
  std::vector<std::vector<Index>> same_type_out_count_;   // [node][type]
  std::vector<std::vector<Index>> same_type_in_count_;    // [node][type]
  std::int64_t edge_count_ = 0;
};

/// Runs a fresh chain for `steps` updates and returns the final graph.
DependencyGraph glauber_sample(const CovariateTable& cov, const TypeAssignment& types,
                               const StructuralParams& params, std::int64_t steps,
                               std::uint64_t seed);

}  // namespace depnet
