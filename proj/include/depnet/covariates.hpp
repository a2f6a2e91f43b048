#pragma once

#include <string>
#include <vector>

#include "depnet/types.hpp"

namespace depnet {

/// Per-node categorical covariates. `codes` holds small category codes
/// (quartile bins by default); `raw` keeps the original values for reporting
/// (NaN where missing). A missing raw value gets code 0 and a missing flag.
class CovariateTable {
 public:
  CovariateTable() = default;
  CovariateTable(std::vector<std::string> names, IntMatrix codes, Matrix raw,
                 std::vector<std::vector<bool>> missing);

  Index row_count() const { return static_cast<Index>(codes_.rows()); }
  int covariate_count() const { return static_cast<int>(codes_.cols()); }

  const std::vector<std::string>& names() const { return names_; }
  const IntMatrix& codes() const { return codes_; }
  const Matrix& raw() const { return raw_; }
  bool is_missing(Index i, int p) const { return missing_[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)]; }
  bool any_missing() const;

  int code(Index i, int p) const { return codes_(i, p); }

  /// Number of categories in column p (max code + 1, at least 1).
  int category_count(int p) const;

  /// Match indicator for covariate p between nodes i and j. A missing value
  /// never matches, not even another missing value.
  bool match(Index i, Index j, int p) const {
    if (is_missing(i, p) || is_missing(j, p)) return false;
    return codes_(i, p) == codes_(j, p);
  }

  /// Pair cell as a bitmask over covariates, bit p = match on covariate p.
  unsigned pair_cell(Index i, Index j) const {
    unsigned cell = 0;
    for (int p = 0; p < covariate_count(); ++p)
      if (match(i, j, p)) cell |= (1u << p);
    return cell;
  }

  /// Table restricted to the given rows, in the given order.
  CovariateTable select_rows(const std::vector<Index>& rows) const;

  /// Table with no covariate columns for the given row count (used by the
  /// covariate-free warm phase).
  static CovariateTable empty(Index rows);

 private:
  std::vector<std::string> names_;
  IntMatrix codes_;
  Matrix raw_;
  std::vector<std::vector<bool>> missing_;  // [covariate][node]
};

/// Quantile category codes by the nearest-rank rule: cut points sit at ranks
/// ceil(k*n/q) (k = 1..q-1) of the sorted vector and code(v) counts the cut
/// points strictly below v. Ties share a code and codes are monotone in v.
std::vector<int> discretize_quartiles(const std::vector<Scalar>& values, int q = 4);

/// Nearest-rank quantile of a sorted vector: element at rank ceil(p*n).
Scalar nearest_rank_quantile(const std::vector<Scalar>& sorted_values, Scalar p);

}  // namespace depnet
