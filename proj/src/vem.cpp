#include "depnet/vem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "depnet/parallel.hpp"

namespace depnet {

namespace {

constexpr std::size_t kReduceChunks = 64;

// Nodes grouped by their full covariate code tuple. Missing values get a
// shared pseudo-category per covariate that matches nothing, itself included.
struct TupleIndex {
  int covariate_count = 0;
  std::vector<int> tuple_of_node;
  std::vector<std::vector<Index>> nodes_of_tuple;
  std::vector<std::vector<int>> tuple_codes;  // augmented codes per tuple
  std::vector<int> missing_code;              // per covariate

  unsigned pair_cell(int t_a, int t_b) const {
    unsigned cell = 0;
    for (int p = 0; p < covariate_count; ++p) {
      const int ca = tuple_codes[static_cast<std::size_t>(t_a)][static_cast<std::size_t>(p)];
      const int cb = tuple_codes[static_cast<std::size_t>(t_b)][static_cast<std::size_t>(p)];
      if (ca == cb && ca != missing_code[static_cast<std::size_t>(p)]) cell |= (1u << p);
    }
    return cell;
  }
  unsigned self_cell(int t) const { return pair_cell(t, t); }
};

TupleIndex build_tuple_index(const CovariateTable& cov) {
  TupleIndex idx;
  idx.covariate_count = cov.covariate_count();
  const Index n = cov.row_count();
  idx.missing_code.resize(static_cast<std::size_t>(idx.covariate_count));
  for (int p = 0; p < idx.covariate_count; ++p)
    idx.missing_code[static_cast<std::size_t>(p)] = cov.category_count(p);

  std::map<std::vector<int>, int> tuple_id;
  idx.tuple_of_node.resize(static_cast<std::size_t>(n));
  std::vector<int> key(static_cast<std::size_t>(idx.covariate_count));
  for (Index i = 0; i < n; ++i) {
    for (int p = 0; p < idx.covariate_count; ++p)
      key[static_cast<std::size_t>(p)] =
          cov.is_missing(i, p) ? idx.missing_code[static_cast<std::size_t>(p)] : cov.code(i, p);
    auto [it, inserted] = tuple_id.emplace(key, static_cast<int>(idx.tuple_codes.size()));
    if (inserted) {
      idx.tuple_codes.push_back(key);
      idx.nodes_of_tuple.emplace_back();
    }
    idx.tuple_of_node[static_cast<std::size_t>(i)] = it->second;
    idx.nodes_of_tuple[static_cast<std::size_t>(it->second)].push_back(i);
  }
  return idx;
}

// Weighted pair counts per covariate cell: den(k,l) over all ordered pairs
// i != j in the cell, num1(k,l) over the existing edges in the cell.
struct PairCounts {
  std::vector<Matrix> den;
  std::vector<Matrix> num1;
};

void check_row_stochastic(const RowMatrix& xi) {
  if ((xi.array() < -1e-12).any()) throw DataError("xi has negative entries");
  for (Eigen::Index i = 0; i < xi.rows(); ++i)
    if (std::abs(xi.row(i).sum() - 1.0) > 1e-6)
      throw DataError("xi row " + std::to_string(i) + " does not sum to 1");
}

PairCounts compute_pair_counts(const DependencyGraph& graph, const RowMatrix& xi,
                               const TupleIndex& idx) {
  const Index n = graph.node_count();
  const auto k_count = static_cast<int>(xi.cols());
  const int cells = 1 << idx.covariate_count;
  PairCounts counts;
  counts.den.assign(static_cast<std::size_t>(cells), Matrix::Zero(k_count, k_count));
  counts.num1.assign(static_cast<std::size_t>(cells), Matrix::Zero(k_count, k_count));

  const auto tuple_count = static_cast<int>(idx.nodes_of_tuple.size());
  Matrix tuple_totals = Matrix::Zero(tuple_count, k_count);  // T_t
  for (int t = 0; t < tuple_count; ++t)
    for (Index i : idx.nodes_of_tuple[static_cast<std::size_t>(t)])
      tuple_totals.row(t) += xi.row(i);

  // den(x) = sum_t T_t S_t(x)^T minus the diagonal pairs in each tuple's
  // self cell, where S_t(x) aggregates the tuple totals falling in cell x.
  std::vector<Matrix> s_of_tuple(static_cast<std::size_t>(cells),
                                 Matrix::Zero(tuple_count, k_count));
  for (int t = 0; t < tuple_count; ++t)
    for (int u = 0; u < tuple_count; ++u)
      s_of_tuple[idx.pair_cell(t, u)].row(t) += tuple_totals.row(u);
  for (int x = 0; x < cells; ++x)
    counts.den[static_cast<std::size_t>(x)] =
        tuple_totals.transpose() * s_of_tuple[static_cast<std::size_t>(x)];
  for (int t = 0; t < tuple_count; ++t) {
    Matrix self = Matrix::Zero(k_count, k_count);
    for (Index i : idx.nodes_of_tuple[static_cast<std::size_t>(t)])
      self.noalias() += xi.row(i).transpose() * xi.row(i);
    counts.den[idx.self_cell(t)] -= self;
  }

  // Edge pass, chunked over source nodes with a fixed stripe count so the
  // merge order is independent of the worker count.
  const std::size_t chunk =
      std::max<std::size_t>(1, (static_cast<std::size_t>(n) + kReduceChunks - 1) / kReduceChunks);
  const std::size_t num_chunks = n == 0 ? 0 : (static_cast<std::size_t>(n) + chunk - 1) / chunk;
  std::vector<std::vector<Matrix>> partial(
      num_chunks, std::vector<Matrix>(static_cast<std::size_t>(cells)));
  parallel_for_chunks(static_cast<std::size_t>(n), chunk,
                      [&](std::size_t c, std::size_t begin, std::size_t end) {
                        auto& local = partial[c];
                        for (auto& m : local) m = Matrix::Zero(k_count, k_count);
                        for (std::size_t a = begin; a < end; ++a) {
                          const auto ia = static_cast<Index>(a);
                          const int ta = idx.tuple_of_node[a];
                          for (Index b : graph.out_edges(ia)) {
                            const unsigned cell = idx.pair_cell(
                                ta, idx.tuple_of_node[static_cast<std::size_t>(b)]);
                            local[cell].noalias() += xi.row(ia).transpose() * xi.row(b);
                          }
                        }
                      });
  for (std::size_t c = 0; c < num_chunks; ++c)
    for (int x = 0; x < cells; ++x)
      counts.num1[static_cast<std::size_t>(x)] += partial[c][static_cast<std::size_t>(x)];
  return counts;
}

Scalar entropy_term(const RowMatrix& xi, const Vector& eta) {
  Scalar total = 0;
  for (Eigen::Index i = 0; i < xi.rows(); ++i)
    for (Eigen::Index k = 0; k < xi.cols(); ++k) {
      const Scalar v = xi(i, k);
      if (v > 0) total += v * (std::log(eta[k]) - std::log(v));
    }
  return total;
}

Scalar pair_term_from_counts(const PairCounts& counts, const PiTable& pi) {
  Scalar total = 0;
  const int cells = pi.cell_count();
  for (int x = 0; x < cells; ++x) {
    const Matrix& p1 = pi.link_prob[static_cast<std::size_t>(x)];
    const Matrix& num1 = counts.num1[static_cast<std::size_t>(x)];
    const Matrix& den = counts.den[static_cast<std::size_t>(x)];
    total += (num1.array() * p1.array().log()).sum() +
             ((den - num1).array() * (1.0 - p1.array()).log()).sum();
  }
  return total;
}

}  // namespace

void PiTable::validate_interior() const {
  for (const Matrix& m : link_prob)
    if (!m.array().isFinite().all() || (m.array() <= 0.0).any() || (m.array() >= 1.0).any())
      throw NumericalError("pi entry at 0 or 1; smoothing must keep probabilities interior");
}

Scalar lower_bound(const DependencyGraph& graph, const CovariateTable& cov,
                   const VariationalState& state) {
  if (state.xi.rows() != graph.node_count())
    throw DataError("state dimensions do not match graph");
  if (cov.row_count() != graph.node_count())
    throw DataError("covariate rows do not match graph");
  state.pi.validate_interior();
  const TupleIndex idx = build_tuple_index(cov);
  const PairCounts counts = compute_pair_counts(graph, state.xi, idx);
  return pair_term_from_counts(counts, state.pi) + entropy_term(state.xi, state.eta);
}

Vector update_eta(const RowMatrix& xi) {
  check_row_stochastic(xi);
  return xi.colwise().mean().transpose();
}

PiTable update_pi(const DependencyGraph& graph, const CovariateTable& cov, const RowMatrix& xi,
                  Scalar pseudo_count) {
  check_row_stochastic(xi);
  if (cov.row_count() != graph.node_count() || xi.rows() != graph.node_count())
    throw DataError("covariate or xi rows do not match graph");
  const TupleIndex idx = build_tuple_index(cov);
  const PairCounts counts = compute_pair_counts(graph, xi, idx);
  const auto k_count = static_cast<int>(xi.cols());
  PiTable pi;
  pi.type_count = k_count;
  pi.covariate_count = cov.covariate_count();
  const int cells = pi.cell_count();
  pi.link_prob.resize(static_cast<std::size_t>(cells));
  pi.empty.assign(static_cast<std::size_t>(cells),
                  std::vector<bool>(static_cast<std::size_t>(k_count) * k_count, false));
  for (int x = 0; x < cells; ++x) {
    const Matrix& num1 = counts.num1[static_cast<std::size_t>(x)];
    const Matrix& den = counts.den[static_cast<std::size_t>(x)];
    pi.link_prob[static_cast<std::size_t>(x)] =
        (num1.array() + pseudo_count) / (den.array() + 2.0 * pseudo_count);
    for (int k = 0; k < k_count; ++k)
      for (int l = 0; l < k_count; ++l)
        if (den(k, l) <= 0) {
          // no pair mass: report the smoothed prior and flag the cell
          pi.link_prob[static_cast<std::size_t>(x)](k, l) = 0.5;
          pi.empty[static_cast<std::size_t>(x)][static_cast<std::size_t>(k) *
                                                    static_cast<std::size_t>(k_count) +
                                                static_cast<std::size_t>(l)] = true;
        }
  }
  return pi;
}

QuadraticTerms compute_quadratic_terms(const DependencyGraph& graph, const CovariateTable& cov,
                                       const VariationalState& state, Scalar xi_floor) {
  const Index n = graph.node_count();
  const RowMatrix& xi = state.xi;
  if (xi.rows() != n) throw DataError("state dimensions do not match graph");
  if (cov.row_count() != n) throw DataError("covariate rows do not match graph");
  if ((xi.array() < xi_floor * (1.0 - 1e-9)).any())
    throw NumericalError("xi entry below floor; clamp before computing quadratic terms");
  state.pi.validate_interior();
  const auto k_count = static_cast<int>(xi.cols());
  const int cells = state.pi.cell_count();
  const TupleIndex idx = build_tuple_index(cov);

  // Base term: empty network, all pairwise covariates at the baseline cell.
  std::vector<Matrix> log_p1(static_cast<std::size_t>(cells));
  std::vector<Matrix> log_p0(static_cast<std::size_t>(cells));
  for (int x = 0; x < cells; ++x) {
    log_p1[static_cast<std::size_t>(x)] =
        state.pi.link_prob[static_cast<std::size_t>(x)].array().log();
    log_p0[static_cast<std::size_t>(x)] =
        (1.0 - state.pi.link_prob[static_cast<std::size_t>(x)].array()).log();
  }
  const Vector tau = xi.colwise().sum().transpose();
  const Matrix base_sym = log_p0[0] + log_p0[0].transpose();
  RowMatrix omega =
      ((-xi).rowwise() + tau.transpose()) * base_sym;  // (1 tau^T - xi) (L0 + L0^T)

  // Covariate-cell correction for pairs off the baseline cell, grouped by
  // code tuple. Zsym(x) collects both the (i,j) and (j,i) zero-edge terms.
  const auto tuple_count = static_cast<int>(idx.nodes_of_tuple.size());
  Matrix tuple_totals = Matrix::Zero(tuple_count, k_count);
  for (int t = 0; t < tuple_count; ++t)
    for (Index i : idx.nodes_of_tuple[static_cast<std::size_t>(t)])
      tuple_totals.row(t) += xi.row(i);
  std::vector<Matrix> z_sym(static_cast<std::size_t>(cells));
  for (int x = 0; x < cells; ++x) {
    const Matrix z = log_p0[static_cast<std::size_t>(x)] - log_p0[0];
    z_sym[static_cast<std::size_t>(x)] = z + z.transpose();
  }
  Matrix s_cell = Matrix::Zero(cells, k_count);
  for (int t = 0; t < tuple_count; ++t) {
    s_cell.setZero();
    for (int u = 0; u < tuple_count; ++u)
      s_cell.row(static_cast<int>(idx.pair_cell(t, u))) += tuple_totals.row(u);
    Vector r = Vector::Zero(k_count);
    for (int x = 1; x < cells; ++x)
      r += z_sym[static_cast<std::size_t>(x)] * s_cell.row(x).transpose();
    const unsigned self = idx.self_cell(t);
    for (Index i : idx.nodes_of_tuple[static_cast<std::size_t>(t)]) {
      omega.row(i) += r.transpose();
      if (self != 0)
        omega.row(i) -= (z_sym[self] * xi.row(i).transpose()).transpose();
    }
  }

  // Edge corrections, one pass over out-edges for the (i,j) term and one over
  // in-edges for the (j,i) term; each output row is owned by a single task.
  std::vector<Matrix> edge_term(static_cast<std::size_t>(cells));
  for (int x = 0; x < cells; ++x)
    edge_term[static_cast<std::size_t>(x)] =
        log_p1[static_cast<std::size_t>(x)] - log_p0[static_cast<std::size_t>(x)];
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t a) {
    const auto ia = static_cast<Index>(a);
    const int ta = idx.tuple_of_node[a];
    Vector acc = Vector::Zero(k_count);
    for (Index b : graph.out_edges(ia)) {
      const unsigned cell = idx.pair_cell(ta, idx.tuple_of_node[static_cast<std::size_t>(b)]);
      acc += edge_term[cell] * xi.row(b).transpose();
    }
    for (Index b : graph.in_edges(ia)) {
      const unsigned cell = idx.pair_cell(idx.tuple_of_node[static_cast<std::size_t>(b)], ta);
      acc += edge_term[cell].transpose() * xi.row(b).transpose();
    }
    omega.row(ia) += acc.transpose();
  });

  QuadraticTerms terms;
  terms.A.resize(n, k_count);
  terms.B.resize(n, k_count);
  for (Index i = 0; i < n; ++i)
    for (int k = 0; k < k_count; ++k) {
      terms.A(i, k) = omega(i, k) / (2.0 * xi(i, k)) - 1.0 / xi(i, k);
      terms.B(i, k) = std::log(state.eta[k]) - std::log(xi(i, k)) + 1.0;
    }
  return terms;
}

Scalar minorizer_value(const QuadraticTerms& terms, const RowMatrix& xi) {
  return (terms.A.array() * xi.array().square() + terms.B.array() * xi.array()).sum();
}

Vector solve_node_simplex_qp(const Vector& a_row, const Vector& b_row) {
  const auto k_count = static_cast<int>(a_row.size());
  if (b_row.size() != k_count) throw DataError("A and B rows differ in length");
  if ((a_row.array() >= 0).any()) throw NumericalError("non-concave subproblem");
  if (k_count == 1) return Vector::Ones(1);

  auto xi_at = [&](Scalar lambda, Vector& out) {
    Scalar total = 0;
    for (int k = 0; k < k_count; ++k) {
      const Scalar v = std::clamp((lambda - b_row[k]) / (2.0 * a_row[k]), 0.0, 1.0);
      out[k] = v;
      total += v;
    }
    return total;
  };

  Scalar lo = b_row.minCoeff() - 2.0 * a_row.array().abs().maxCoeff();
  Scalar hi = b_row.maxCoeff();
  Vector xi(k_count);
  for (int it = 0; it < 200 && hi - lo > 1e-18 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    const Scalar mid = 0.5 * (lo + hi);
    if (xi_at(mid, xi) >= 1.0)
      lo = mid;  // sum is non-increasing in lambda
    else
      hi = mid;
  }

  // Exact solve on the active set found by the bisection.
  Scalar sum_inv = 0, sum_b_inv = 0;
  Scalar ones = 0;
  xi_at(lo, xi);
  for (int k = 0; k < k_count; ++k) {
    if (xi[k] >= 1.0) {
      ones += 1.0;
    } else if (xi[k] > 0.0) {
      sum_inv += 1.0 / (2.0 * a_row[k]);
      sum_b_inv += b_row[k] / (2.0 * a_row[k]);
    }
  }
  if (sum_inv != 0) {
    const Scalar lambda = (1.0 - ones + sum_b_inv) / sum_inv;
    xi_at(lambda, xi);
  }
  if (std::abs(xi.sum() - 1.0) > 1e-12) {
    // Fall back to the bisection point if the active set was misidentified.
    xi_at(0.5 * (lo + hi), xi);
    if (std::abs(xi.sum() - 1.0) > 1e-10)
      throw NumericalError("simplex QP failed to meet the sum constraint");
    xi /= xi.sum();
  }
  return xi;
}

RowMatrix soften_labels(const std::vector<int>& labels, int type_count, Scalar softening) {
  const auto n = static_cast<Index>(labels.size());
  RowMatrix xi(n, type_count);
  const Scalar off = softening;
  const Scalar on = 1.0 - static_cast<Scalar>(type_count - 1) * off;
  if (on <= off) throw ConfigError("softening too large for this K");
  for (Index i = 0; i < n; ++i) {
    xi.row(i).setConstant(off);
    xi(i, labels[static_cast<std::size_t>(i)]) = on;
  }
  return xi;
}

std::vector<int> fold_labels(const std::vector<int>& labels, int type_count) {
  std::map<int, std::pair<std::int64_t, std::size_t>> size_first;  // label -> (count, first pos)
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = size_first.emplace(labels[i], std::make_pair(0, i));
    ++it->second.first;
  }
  std::vector<std::pair<int, std::pair<std::int64_t, std::size_t>>> ranked(size_first.begin(),
                                                                           size_first.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.second.second < b.second.second;
  });
  std::map<int, int> remap;
  for (std::size_t r = 0; r < ranked.size(); ++r)
    remap[ranked[r].first] = static_cast<int>(r % static_cast<std::size_t>(type_count));
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = remap[labels[i]];
  return out;
}

namespace {

void floor_and_renormalize(RowMatrix& xi, Scalar floor) {
  const auto k_count = static_cast<int>(xi.cols());
  for (Eigen::Index i = 0; i < xi.rows(); ++i) {
    for (int pass = 0; pass < k_count + 1; ++pass) {
      int clamped = 0;
      Scalar free_sum = 0;
      for (int k = 0; k < k_count; ++k) {
        if (xi(i, k) <= floor)
          ++clamped;
        else
          free_sum += xi(i, k);
      }
      if (clamped == 0 && std::abs(xi.row(i).sum() - 1.0) < 1e-14) break;
      if (clamped == k_count) {
        xi.row(i).setConstant(1.0 / k_count);
        break;
      }
      const Scalar target = 1.0 - floor * clamped;
      bool dipped = false;
      for (int k = 0; k < k_count; ++k) {
        if (xi(i, k) <= floor) {
          xi(i, k) = floor;
        } else {
          xi(i, k) *= target / free_sum;
          if (xi(i, k) < floor) dipped = true;
        }
      }
      if (!dipped) break;
    }
  }
}

}  // namespace

VariationalState run_vem_from_xi(const DependencyGraph& graph, const CovariateTable& cov,
                                 RowMatrix xi0, const VemOptions& options) {
  const Index n = graph.node_count();
  if (xi0.rows() != n) throw DataError("xi rows do not match node count");
  if (cov.row_count() != n) throw DataError("covariate rows do not match graph");
  if (options.max_iter < 1) throw ConfigError("max_iter must be positive");
  const auto k_count = static_cast<int>(xi0.cols());

  VariationalState state;
  state.xi = std::move(xi0);
  floor_and_renormalize(state.xi, options.xi_floor);
  const TupleIndex idx = build_tuple_index(cov);

  Scalar previous = -std::numeric_limits<Scalar>::infinity();
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const PairCounts counts = compute_pair_counts(graph, state.xi, idx);
    state.eta = update_eta(state.xi);
    state.pi = update_pi(graph, cov, state.xi, options.pi_pseudo_count);
    const Scalar bound = pair_term_from_counts(counts, state.pi) +
                         entropy_term(state.xi, state.eta);
    state.lower_bound_trace.push_back(bound);
    if (iter > 0 && bound - previous < options.tol * (std::abs(previous) + 1.0)) {
      state.converged = true;
      break;
    }
    previous = bound;

    QuadraticTerms terms;
    try {
      terms = compute_quadratic_terms(graph, cov, state, options.xi_floor);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(iter) + ": " + e.what());
    }
    RowMatrix next(n, k_count);
    std::exception_ptr failure;
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
      try {
        next.row(static_cast<Index>(i)) =
            solve_node_simplex_qp(terms.A.row(static_cast<Index>(i)).transpose(),
                                  terms.B.row(static_cast<Index>(i)).transpose())
                .transpose();
      } catch (...) {
        failure = std::current_exception();
      }
    });
    if (failure) {
      try {
        std::rethrow_exception(failure);
      } catch (const std::exception& e) {
        throw NumericalError("iteration " + std::to_string(iter) + ": " + e.what());
      }
    }
    state.xi = std::move(next);
    floor_and_renormalize(state.xi, options.xi_floor);
    state.iterations = iter + 1;
  }
  return state;
}

VariationalState run_vem(const DependencyGraph& graph, const CovariateTable& cov, int type_count,
                         const std::vector<int>& init_labels, const VemOptions& options) {
  if (type_count < 1) throw ConfigError("K must be at least 1");
  if (init_labels.size() != static_cast<std::size_t>(graph.node_count()))
    throw DataError("init labels do not match node count");
  std::vector<int> labels = init_labels;
  for (int z : labels) {
    if (z < 0) throw DataError("init labels must be non-negative");
    if (z >= type_count) {
      labels = fold_labels(init_labels, type_count);
      break;
    }
  }
  return run_vem_from_xi(graph, cov, soften_labels(labels, type_count, options.init_softening),
                         options);
}

TypeAssignment harden_types(const RowMatrix& xi) {
  check_row_stochastic(xi);
  TypeAssignment types;
  types.type_count = static_cast<int>(xi.cols());
  types.labels.resize(static_cast<std::size_t>(xi.rows()));
  for (Eigen::Index i = 0; i < xi.rows(); ++i) {
    int best = 0;
    for (int k = 1; k < xi.cols(); ++k)
      if (xi(i, k) > xi(i, best)) best = k;
    types.labels[static_cast<std::size_t>(i)] = best;
  }
  return types;
}

}  // namespace depnet
