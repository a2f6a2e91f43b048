#include "depnet/mple.hpp"

#include <algorithm>
#include <cmath>

#include "depnet/rng.hpp"

namespace depnet {

namespace {

// Same-type neighbor counts per node and neighbor type, so each row's
// externality count is O(1).
struct TypeCounts {
  std::vector<std::vector<Index>> out_by_type;
  std::vector<std::vector<Index>> in_by_type;
};

TypeCounts count_by_type(const DependencyGraph& graph, const TypeAssignment& types) {
  const Index n = graph.node_count();
  TypeCounts counts;
  counts.out_by_type.assign(static_cast<std::size_t>(n),
                            std::vector<Index>(static_cast<std::size_t>(types.type_count), 0));
  counts.in_by_type = counts.out_by_type;
  for (Index i = 0; i < n; ++i) {
    for (Index j : graph.out_edges(i))
      ++counts.out_by_type[static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(types.labels[static_cast<std::size_t>(j)])];
    for (Index j : graph.in_edges(i))
      ++counts.in_by_type[static_cast<std::size_t>(i)]
                         [static_cast<std::size_t>(types.labels[static_cast<std::size_t>(j)])];
  }
  return counts;
}

}  // namespace

void for_each_design_row(const DependencyGraph& graph, const CovariateTable& cov,
                         const TypeAssignment& types, Stratum stratum,
                         const std::function<void(const DyadDesignRow&)>& visit) {
  const Index n = graph.node_count();
  types.validate(n);
  const int p_count = cov.covariate_count();
  const bool within = stratum == Stratum::Within;
  const TypeCounts counts = count_by_type(graph, types);

  DyadDesignRow row;
  row.features.assign(static_cast<std::size_t>(p_count) + (within ? 2 : 1), 0.0);
  std::vector<char> is_out(static_cast<std::size_t>(n), 0);
  std::vector<char> is_in(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    for (Index j : graph.out_edges(i)) is_out[static_cast<std::size_t>(j)] = 1;
    for (Index j : graph.in_edges(i)) is_in[static_cast<std::size_t>(j)] = 1;
    const int ti = types.labels[static_cast<std::size_t>(i)];
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const int tj = types.labels[static_cast<std::size_t>(j)];
      if ((ti == tj) != within) continue;
      row.source = i;
      row.target = j;
      row.response = is_out[static_cast<std::size_t>(j)];
      row.features[0] = 1.0;
      for (int p = 0; p < p_count; ++p)
        row.features[static_cast<std::size_t>(p) + 1] = cov.match(i, j, p) ? 1.0 : 0.0;
      if (within) {
        // Out-two-paths from j plus in-links to i, same type, minus the
        // reverse edge which would be counted once in each term.
        Index externality =
            counts.out_by_type[static_cast<std::size_t>(j)][static_cast<std::size_t>(ti)] +
            counts.in_by_type[static_cast<std::size_t>(i)][static_cast<std::size_t>(ti)];
        if (is_in[static_cast<std::size_t>(j)]) externality -= 2;
        row.features[static_cast<std::size_t>(p_count) + 1] = static_cast<Scalar>(externality);
      }
      visit(row);
    }
    for (Index j : graph.out_edges(i)) is_out[static_cast<std::size_t>(j)] = 0;
    for (Index j : graph.in_edges(i)) is_in[static_cast<std::size_t>(j)] = 0;
  }
}

LogitFit fit_logit(
    const std::function<void(const std::function<void(const std::vector<Scalar>&, int)>&)>&
        pass_over_rows,
    int feature_count, const MpleOptions& options) {
  if (feature_count < 1) throw ConfigError("need at least one feature");
  const Scalar subsample = options.negative_subsample;
  if (subsample <= 0.0 || subsample > 1.0)
    throw ConfigError("negative_subsample must be in (0, 1]");
  const Scalar offset = subsample < 1.0 ? std::log(1.0 / subsample) : 0.0;
  const std::uint64_t threshold =
      subsample < 1.0
          ? static_cast<std::uint64_t>(subsample * static_cast<Scalar>(~0ULL))
          : ~0ULL;

  LogitFit fit;
  fit.estimates = Vector::Zero(feature_count);

  // Deterministic per-row keep decision so every Newton pass sees the same
  // subsample.
  std::uint64_t row_counter = 0;
  auto keep_row = [&](int y) {
    if (y == 1 || subsample >= 1.0) return true;
    SplitMix64 h(options.seed ^ (row_counter * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
    return h.next_u64() <= threshold;
  };

  Vector theta = Vector::Zero(feature_count);
  Matrix hessian(feature_count, feature_count);
  Vector gradient(feature_count);
  Scalar loglik = 0;

  auto accumulate = [&](const Vector& at, Vector& grad, Matrix& hess, Scalar& ll,
                        std::int64_t& rows, std::int64_t& positives) {
    grad.setZero();
    hess.setZero();
    ll = 0;
    rows = 0;
    positives = 0;
    row_counter = 0;
    Vector x(feature_count);
    pass_over_rows([&](const std::vector<Scalar>& features, int y) {
      ++row_counter;
      if (static_cast<int>(features.size()) != feature_count)
        throw DataError("feature length mismatch in design stream");
      if (!keep_row(y)) return;
      for (int k = 0; k < feature_count; ++k) x[k] = features[static_cast<std::size_t>(k)];
      const Scalar lin = at.dot(x) + offset;
      const Scalar p = logistic(lin);
      ll += y == 1 ? -log1p_exp(-lin) : -log1p_exp(lin);
      grad.noalias() += (static_cast<Scalar>(y) - p) * x;
      hess.noalias() += p * (1.0 - p) * x * x.transpose();
      ++rows;
      positives += y;
    });
  };

  accumulate(theta, gradient, hessian, loglik, fit.rows, fit.positives);
  if (fit.rows == 0) throw DataError("empty stratum: no design rows");
  if (fit.positives == 0 || fit.positives == fit.rows)
    throw NumericalError("all responses identical in stratum");

  for (int it = 0; it < options.max_iter; ++it) {
    fit.iterations = it + 1;
    if (gradient.cwiseAbs().maxCoeff() < options.gradient_tol) {
      fit.converged = true;
      break;
    }
    Eigen::LDLT<Matrix> solver(hessian);
    if (solver.info() != Eigen::Success || !solver.isPositive()) {
      fit.diagnostic = "singular information matrix (possible complete separation)";
      break;
    }
    const Vector step = solver.solve(gradient);
    Scalar scale = 1.0;
    Vector candidate;
    Vector grad_new(feature_count);
    Matrix hess_new(feature_count, feature_count);
    Scalar ll_new = 0;
    std::int64_t r = 0, pos = 0;
    for (int half = 0; half < 30; ++half) {
      candidate = theta + scale * step;
      accumulate(candidate, grad_new, hess_new, ll_new, r, pos);
      // tolerance is relative: the objective is a large sum and carries
      // rounding noise of that scale
      if (ll_new >= loglik - 1e-10 * (std::abs(loglik) + 1.0)) break;
      scale *= 0.5;
    }
    theta = candidate;
    gradient = grad_new;
    hessian = hess_new;
    loglik = ll_new;
    if (theta.cwiseAbs().maxCoeff() > 50.0) {
      fit.diagnostic = "diverging coefficients (possible complete separation)";
      break;
    }
  }
  if (!fit.converged && gradient.cwiseAbs().maxCoeff() < options.gradient_tol)
    fit.converged = true;

  fit.estimates = theta;
  fit.log_likelihood = loglik;
  fit.std_errors = Vector::Zero(feature_count);
  fit.z_values = Vector::Zero(feature_count);
  Eigen::LDLT<Matrix> solver(hessian);
  if (solver.info() == Eigen::Success && solver.isPositive()) {
    const Matrix cov_matrix = solver.solve(Matrix::Identity(feature_count, feature_count));
    for (int k = 0; k < feature_count; ++k) {
      fit.std_errors[k] = std::sqrt(std::max(0.0, cov_matrix(k, k)));
      fit.z_values[k] = fit.std_errors[k] > 0 ? theta[k] / fit.std_errors[k] : 0.0;
    }
  } else if (fit.diagnostic.empty()) {
    fit.diagnostic = "information matrix not positive definite at the optimum";
    fit.converged = false;
  }
  return fit;
}

FitResult fit_structural(const DependencyGraph& graph, const CovariateTable& cov,
                         const TypeAssignment& types, const MpleOptions& options) {
  const int p_count = cov.covariate_count();
  FitResult result;
  result.covariate_names = cov.names();

  std::int64_t within_rows = 0, between_rows = 0;
  {
    std::vector<std::int64_t> type_sizes(static_cast<std::size_t>(types.type_count), 0);
    for (int z : types.labels) ++type_sizes[static_cast<std::size_t>(z)];
    for (std::int64_t s : type_sizes) within_rows += s * (s - 1);
    const auto n = static_cast<std::int64_t>(types.labels.size());
    between_rows = n * (n - 1) - within_rows;
  }

  auto stratum_pass = [&](Stratum stratum) {
    return [&, stratum](const std::function<void(const std::vector<Scalar>&, int)>& visit) {
      for_each_design_row(graph, cov, types, stratum,
                          [&](const DyadDesignRow& row) { visit(row.features, row.response); });
    };
  };

  if (within_rows > 0) {
    result.within = fit_logit(stratum_pass(Stratum::Within), p_count + 2, options);
    result.log_pseudolikelihood += result.within->log_likelihood;
  }
  if (between_rows > 0) {
    result.between = fit_logit(stratum_pass(Stratum::Between), p_count + 1, options);
    result.log_pseudolikelihood += result.between->log_likelihood;
  }

  result.converged = (!result.within || result.within->converged) &&
                     (!result.between || result.between->converged) &&
                     (result.within || result.between);

  StructuralParams& est = result.estimates;
  est.beta_within = Vector::Zero(p_count);
  est.beta_between = Vector::Zero(p_count);
  if (result.within) {
    est.alpha_within = result.within->estimates[0];
    for (int p = 0; p < p_count; ++p) est.beta_within[p] = result.within->estimates[p + 1];
    est.gamma = result.within->estimates[p_count + 1];
  }
  if (result.between) {
    est.alpha_between = result.between->estimates[0];
    for (int p = 0; p < p_count; ++p) est.beta_between[p] = result.between->estimates[p + 1];
  }
  return result;
}

}  // namespace depnet
