#include "depnet/covariates.hpp"

#include <algorithm>
#include <cmath>

namespace depnet {

CovariateTable::CovariateTable(std::vector<std::string> names, IntMatrix codes, Matrix raw,
                               std::vector<std::vector<bool>> missing)
    : names_(std::move(names)),
      codes_(std::move(codes)),
      raw_(std::move(raw)),
      missing_(std::move(missing)) {
  const auto p = static_cast<std::size_t>(codes_.cols());
  if (names_.size() != p || missing_.size() != p || raw_.cols() != codes_.cols() ||
      raw_.rows() != codes_.rows())
    throw DataError("covariate table shape mismatch");
  for (const auto& col : missing_)
    if (col.size() != static_cast<std::size_t>(codes_.rows()))
      throw DataError("covariate missing-mask shape mismatch");
  if ((codes_.array() < 0).any()) throw DataError("negative covariate code");
}

bool CovariateTable::any_missing() const {
  for (const auto& col : missing_)
    for (bool m : col)
      if (m) return true;
  return false;
}

int CovariateTable::category_count(int p) const {
  if (codes_.rows() == 0) return 1;
  return codes_.col(p).maxCoeff() + 1;
}

CovariateTable CovariateTable::select_rows(const std::vector<Index>& rows) const {
  const auto nr = static_cast<Index>(rows.size());
  IntMatrix codes(nr, codes_.cols());
  Matrix raw(nr, raw_.cols());
  std::vector<std::vector<bool>> missing(missing_.size(),
                                         std::vector<bool>(static_cast<std::size_t>(nr)));
  for (Index r = 0; r < nr; ++r) {
    codes.row(r) = codes_.row(rows[static_cast<std::size_t>(r)]);
    raw.row(r) = raw_.row(rows[static_cast<std::size_t>(r)]);
    for (std::size_t p = 0; p < missing_.size(); ++p)
      missing[p][static_cast<std::size_t>(r)] =
          missing_[p][static_cast<std::size_t>(rows[static_cast<std::size_t>(r)])];
  }
  return CovariateTable(names_, std::move(codes), std::move(raw), std::move(missing));
}

CovariateTable CovariateTable::empty(Index rows) {
  return CovariateTable({}, IntMatrix(rows, 0), Matrix(rows, 0), {});
}

Scalar nearest_rank_quantile(const std::vector<Scalar>& sorted_values, Scalar p) {
  if (sorted_values.empty()) throw DataError("quantile of empty vector");
  const auto n = static_cast<long>(sorted_values.size());
  long rank = static_cast<long>(std::ceil(p * static_cast<Scalar>(n)));
  rank = std::max(1L, std::min(n, rank));
  return sorted_values[static_cast<std::size_t>(rank - 1)];
}

std::vector<int> discretize_quartiles(const std::vector<Scalar>& values, int q) {
  if (values.empty()) throw DataError("cannot discretize an empty vector");
  if (q < 2) throw DataError("need at least 2 quantile categories");
  for (Scalar v : values)
    if (std::isnan(v)) throw DataError("NaN value in covariate column");

  std::vector<Scalar> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<Scalar> cuts;
  cuts.reserve(static_cast<std::size_t>(q - 1));
  for (int k = 1; k < q; ++k)
    cuts.push_back(nearest_rank_quantile(sorted, static_cast<Scalar>(k) / static_cast<Scalar>(q)));

  std::vector<int> codes;
  codes.reserve(values.size());
  for (Scalar v : values) {
    int c = 0;
    for (Scalar cut : cuts)
      if (cut < v) ++c;
    codes.push_back(c);
  }
  return codes;
}

}  // namespace depnet
