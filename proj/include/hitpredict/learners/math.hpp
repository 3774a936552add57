#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "hitpredict/error.hpp"
#include "hitpredict/matrix.hpp"

namespace hitpredict {

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
inline double softplus(double z) noexcept {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// Binary cross-entropy of logit z against label y.
inline double logit_loss(double z, int y) noexcept {
  return softplus(z) - (y == 1 ? z : 0.0);
}

namespace detail {

inline void require_binary_labels(const Matrix& x, std::span<const int> y,
                                  bool need_both_classes, const char* who) {
  if (x.rows() != y.size())
    throw TrainingError(std::string(who) + ": " + std::to_string(x.rows()) + " rows but " +
                        std::to_string(y.size()) + " labels");
  if (x.rows() == 0) throw TrainingError(std::string(who) + ": empty training data");
  if (!x.all_finite()) throw TrainingError(std::string(who) + ": non-finite feature value");
  bool seen[2] = {false, false};
  for (int v : y) {
    if (v != 0 && v != 1)
      throw TrainingError(std::string(who) + ": label " + std::to_string(v) + " not in {0, 1}");
    seen[v] = true;
  }
  if (need_both_classes && !(seen[0] && seen[1]))
    throw TrainingError(std::string(who) + ": training labels contain a single class");
}

}  // namespace detail

}  // namespace hitpredict
