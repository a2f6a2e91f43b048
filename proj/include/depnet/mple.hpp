#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "depnet/covariates.hpp"
#include "depnet/formation.hpp"
#include "depnet/graph.hpp"

namespace depnet {

enum class Stratum { Within, Between };

/// One ordered-pair observation. Within rows carry the externality count
/// n_ij = |{r != i,j same type: g_jr = 1}| + |{r != i,j same type: g_ri = 1}|
/// so the linear predictor reproduces the change statistic exactly.
struct DyadDesignRow {
  Index source = 0;
  Index target = 0;
  int response = 0;
  std::vector<Scalar> features;  // intercept, P match indicators, [externality]
};

/// Streams design rows for one stratum without materializing the N(N-1)
/// matrix; the visitor may be called from multiple passes.
void for_each_design_row(const DependencyGraph& graph, const CovariateTable& cov,
                         const TypeAssignment& types, Stratum stratum,
                         const std::function<void(const DyadDesignRow&)>& visit);

struct LogitFit {
  Vector estimates;
  Vector std_errors;
  Vector z_values;
  Scalar log_likelihood = 0;
  std::int64_t rows = 0;
  std::int64_t positives = 0;
  int iterations = 0;
  bool converged = false;
  std::string diagnostic;
};

struct MpleOptions {
  int max_iter = 60;
  Scalar gradient_tol = 1e-8;
  /// Keep this fraction of zero-response dyads (1 = exact, all dyads). Values
  /// below 1 switch to an approximate case-control fit with an offset
  /// correction; the subsample is a deterministic function of the seed.
  Scalar negative_subsample = 1.0;
  std::uint64_t seed = 0;
};

/// Newton-Raphson logistic fit over a streaming row source. The source is a
/// callable that runs one full pass, invoking its argument once per row with
/// (features, response). Standard errors come from the inverse observed
/// information at the optimum.
LogitFit fit_logit(
    const std::function<void(const std::function<void(const std::vector<Scalar>&, int)>&)>&
        pass_over_rows,
    int feature_count, const MpleOptions& options = {});

struct FitResult {
  StructuralParams estimates;
  std::vector<std::string> covariate_names;
  std::optional<LogitFit> within;   // (alpha_w, beta_w..., gamma)
  std::optional<LogitFit> between;  // (alpha_b, beta_b...)
  Scalar log_pseudolikelihood = 0;
  bool converged = false;
};

/// Two-stratum maximum pseudolikelihood fit conditional on hard types. A
/// stratum that has no dyads (single-type graph, or all-distinct types) is
/// reported as absent rather than failing the other one.
FitResult fit_structural(const DependencyGraph& graph, const CovariateTable& cov,
                         const TypeAssignment& types, const MpleOptions& options = {});

}  // namespace depnet
