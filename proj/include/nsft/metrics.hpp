#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nsft/errors.hpp"
#include "nsft/model.hpp"
#include "nsft/tensor.hpp"

namespace nsft {

struct EvalResult {
  double mae = 0.0;
  double rmse = 0.0;
  std::uint64_t count = 0;
};

/// Order-insensitive sum: terms are sorted ascending and accumulated with
/// Neumaier compensation, so any permutation of the same multiset of terms
/// produces the identical double. Takes the vector by value (it is sorted in
/// place).
inline double stable_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  double comp = 0.0;
  for (const double x : terms) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

/// MAE and RMSE of the model over exactly the entries of `set`.
/// Both metrics are independent of entry order: the absolute residuals are
/// sorted once (squaring preserves the order), then summed with compensation.
inline EvalResult evaluate(const NsftModel& model, const SparseTensor& set) {
  if (set.empty()) throw data_error("evaluation set is empty");
  if (!(set.dims() == model.dims))
    throw data_error("evaluation set dimensions do not match the model");

  const std::size_t n = set.size();
  std::vector<double> terms;
  terms.reserve(n);
  for (const Observation& o : set.entries())
    terms.push_back(std::abs(o.value - predict(model, o.index)));
  std::sort(terms.begin(), terms.end());

  auto compensated = [](const std::vector<double>& v) {
    double sum = 0.0, comp = 0.0;
    for (const double x : v) {
      const double t = sum + x;
      if (std::abs(sum) >= std::abs(x))
        comp += (sum - t) + x;
      else
        comp += (x - t) + sum;
      sum = t;
    }
    return sum + comp;
  };

  EvalResult result;
  result.count = n;
  result.mae = compensated(terms) / static_cast<double>(n);
  for (double& x : terms) x = x * x;  // monotone on sorted non-negatives
  result.rmse = std::sqrt(compensated(terms) / static_cast<double>(n));
  return result;
}

}  // namespace nsft
