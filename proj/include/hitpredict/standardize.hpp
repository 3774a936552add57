#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hitpredict/error.hpp"
#include "hitpredict/matrix.hpp"

namespace hitpredict {

// Per-column z-score parameters. Population standard deviation; a column
// with zero spread stores sd = 1 so it maps to zeros.
struct StandardizationParams {
  std::vector<double> mean;
  std::vector<double> sd;

  std::size_t size() const noexcept { return mean.size(); }

  void apply_in_place(std::span<double> x) const {
    if (x.size() != mean.size())
      throw SchemaError("standardize: got " + std::to_string(x.size()) +
                        " columns, expected " + std::to_string(mean.size()));
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean[j]) / sd[j];
  }

  friend bool operator==(const StandardizationParams&,
                         const StandardizationParams&) = default;
};

inline StandardizationParams standardize_fit(const Matrix& train) {
  if (train.rows() < 2)
    throw ValidationError("standardize_fit needs at least 2 rows, got " +
                          std::to_string(train.rows()));
  const std::size_t n = train.rows(), d = train.cols();
  StandardizationParams p{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) p.mean[j] += train(i, j);
  for (double& m : p.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = train(i, j) - p.mean[j];
      p.sd[j] += c * c;
    }
  for (double& s : p.sd) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 0.0) || !std::isfinite(s)) s = 1.0;
  }
  return p;
}

inline Matrix standardize_apply(const StandardizationParams& params, const Matrix& rows) {
  if (rows.cols() != params.size())
    throw SchemaError("standardize_apply: matrix has " + std::to_string(rows.cols()) +
                      " columns, params have " + std::to_string(params.size()));
  Matrix out = rows;
  for (std::size_t i = 0; i < out.rows(); ++i) params.apply_in_place(out.row(i));
  return out;
}

}  // namespace hitpredict
