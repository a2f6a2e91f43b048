#pragma once

#include <vector>

#include "depnet/covariates.hpp"
#include "depnet/formation.hpp"
#include "depnet/graph.hpp"
#include "depnet/types.hpp"

namespace depnet {

/// Block-pair link probabilities pi_kl(d, x) indexed by the covariate match
/// cell x (bitmask over covariates, bit p = the pair matches on covariate p).
/// Only d = 1 is stored; pi(0) = 1 - pi(1). The (k, l) tables stay directed:
/// pi_kl and pi_lk are distinct.
struct PiTable {
  int type_count = 0;
  int covariate_count = 0;
  std::vector<Matrix> link_prob;          // [cell] K x K, in (0,1) after smoothing
  std::vector<std::vector<bool>> empty;   // [cell][k*K+l]: no pair mass observed

  int cell_count() const { return 1 << covariate_count; }
  Scalar prob(int k, int l, int d, unsigned cell) const {
    const Scalar p1 = link_prob[cell](k, l);
    return d == 1 ? p1 : 1.0 - p1;
  }
  void validate_interior() const;
};

struct VariationalState {
  RowMatrix xi;  // N x K, row-stochastic
  Vector eta;    // K, sums to 1
  PiTable pi;
  std::vector<Scalar> lower_bound_trace;
  int iterations = 0;
  bool converged = false;
};

/// Per-node quadratic subproblem coefficients: maximize sum_k A_ik xi_ik^2 +
/// B_ik xi_ik over each probability row. A is strictly negative whenever the
/// log-probabilities are negative, which makes every subproblem concave.
struct QuadraticTerms {
  RowMatrix A;
  RowMatrix B;
};

struct VemOptions {
  int max_iter = 300;
  Scalar tol = 1e-7;            // relative lower-bound improvement
  Scalar xi_floor = 1e-6;       // clamp after every QP solve
  Scalar pi_pseudo_count = 0.5; // Laplace smoothing per (d, cell) outcome
  Scalar init_softening = 1e-3; // off-label mass per competing type
};

/// Variational lower bound sum_{i != j} sum_{k,l} xi_ik xi_jl log
/// pi_kl(g_ij, x_ij) + sum_{i,k} xi_ik (log eta_k - log xi_ik), with
/// 0 log 0 := 0. Throws if any pi entry is exactly 0 or 1.
Scalar lower_bound(const DependencyGraph& graph, const CovariateTable& cov,
                   const VariationalState& state);

/// Column means of xi.
Vector update_eta(const RowMatrix& xi);

/// Weighted link frequencies per (k, l, cell) with Laplace smoothing:
/// (num + pseudo) / (den + 2 pseudo). pseudo = 0 disables smoothing, in which
/// case entries can hit 0 or 1. Cells with no pair mass report the smoothed
/// prior and are flagged.
PiTable update_pi(const DependencyGraph& graph, const CovariateTable& cov, const RowMatrix& xi,
                  Scalar pseudo_count = 0.5);

/// Assembles the quadratic subproblem from the sparse decomposition: the
/// empty-network base term uses only column totals, corrections run over
/// existing edges and non-baseline covariate cells. Every xi entry must
/// already be at or above `xi_floor`.
QuadraticTerms compute_quadratic_terms(const DependencyGraph& graph, const CovariateTable& cov,
                                       const VariationalState& state, Scalar xi_floor = 1e-6);

/// Value of the quadratic minorizer at xi given coefficients from the current
/// iterate; touches the lower bound at the current iterate and never exceeds
/// it elsewhere.
Scalar minorizer_value(const QuadraticTerms& terms, const RowMatrix& xi);

/// Exact KKT solution of: maximize sum_k A_k x_k^2 + B_k x_k subject to
/// x >= 0, sum x = 1, by bisection on the dual variable. Requires A_k < 0.
Vector solve_node_simplex_qp(const Vector& a_row, const Vector& b_row);

/// Hard labels softened into a strictly interior row-stochastic matrix.
RowMatrix soften_labels(const std::vector<int>& labels, int type_count, Scalar softening);

/// Maps arbitrary community labels onto [0, K) by size rank (largest
/// community becomes type 0, and so on, wrapping modulo K).
std::vector<int> fold_labels(const std::vector<int>& labels, int type_count);

/// Full variational EM loop with minorization-maximization updates. The
/// trace records the lower bound once per iteration, evaluated at the fresh
/// (eta, pi) update before the xi step; it is non-decreasing up to smoothing
///. Init labels outside [0, K) are folded by size rank first.
VariationalState run_vem(const DependencyGraph& graph, const CovariateTable& cov, int type_count,
                         const std::vector<int>& init_labels, const VemOptions& options = {});

/// As above but starting from an explicit interior xi (used to chain a
/// covariate-free warm phase into the full run).
VariationalState run_vem_from_xi(const DependencyGraph& graph, const CovariateTable& cov,
                                 RowMatrix xi0, const VemOptions& options = {});

/// Modal type per row; ties break toward the smaller type index.
TypeAssignment harden_types(const RowMatrix& xi);

}  // namespace depnet
