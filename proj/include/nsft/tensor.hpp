#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <utility>
#include <vector>

#include "nsft/errors.hpp"
#include "nsft/random.hpp"

namespace nsft {

// Tensor dimensions (|I| users, |J| services, |K| time slices).
struct Dims {
  std::uint32_t users = 0;
  std::uint32_t services = 0;
  std::uint32_t times = 0;

  std::uint64_t volume() const {
    return static_cast<std::uint64_t>(users) * services * times;
  }
  bool operator==(const Dims&) const = default;
};

// 0-based position of one QoS measurement.
struct EntryIndex {
  std::uint32_t i = 0;  // user
  std::uint32_t j = 0;  // service
  std::uint32_t k = 0;  // time slice

  bool operator==(const EntryIndex&) const = default;
  auto operator<=>(const EntryIndex& o) const {
    return std::tie(i, j, k) <=> std::tie(o.i, o.j, o.k);
  }
  bool in(const Dims& d) const {
    return i < d.users && j < d.services && k < d.times;
  }
};

// One observed QoS value. Values are strictly positive and finite; zero
// measurements are excluded at ingestion.
struct Observation {
  EntryIndex index;
  double value = 0.0;
};

/// Sparse COO store of the observed entries of a user-service-time tensor.
/// Entries are kept sorted by (i, j, k) and unique; construction validates
/// bounds, positivity, and uniqueness. Immutable after construction.
class SparseTensor {
 public:
  SparseTensor(Dims dims, std::vector<Observation> entries)
      : dims_(dims), entries_(std::move(entries)) {
    if (dims_.users == 0 || dims_.services == 0 || dims_.times == 0)
      throw config_error("tensor dimensions must all be positive");
    std::sort(entries_.begin(), entries_.end(),
              [](const Observation& a, const Observation& b) {
                return a.index < b.index;
              });
    for (std::size_t n = 0; n < entries_.size(); ++n) {
      const Observation& o = entries_[n];
      if (!o.index.in(dims_))
        throw range_error("entry (" + std::to_string(o.index.i) + ", " +
                          std::to_string(o.index.j) + ", " +
                          std::to_string(o.index.k) +
                          ") is outside the declared dimensions");
      if (!(o.value > 0.0) || !std::isfinite(o.value))
        throw integrity_error("entry values must be positive and finite");
      if (n > 0 && entries_[n - 1].index == o.index)
        throw integrity_error("duplicate entry (" + std::to_string(o.index.i) +
                              ", " + std::to_string(o.index.j) + ", " +
                              std::to_string(o.index.k) + ")");
    }
  }

  const Dims& dims() const { return dims_; }
  const std::vector<Observation>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Fraction of cells observed.
  double density() const {
    return static_cast<double>(entries_.size()) /
           static_cast<double>(dims_.volume());
  }

 private:
  Dims dims_;
  std::vector<Observation> entries_;
};

// Train/valid/test partition of one source tensor; parts share its dims and
// are pairwise disjoint with union equal to the source entry set.
struct DataSplit {
  SparseTensor train;
  SparseTensor valid;
  SparseTensor test;
};

struct SplitRatios {
  double train = 0.0;
  double valid = 0.0;
  double test = 0.0;
};

namespace detail {
inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}
}  // namespace detail

/// Deterministic split: entries are shuffled by a seeded permutation and cut
/// by cumulative ratio. Train and valid sizes are round(n * ratio) with
/// half-up rounding; test takes the remainder. A given (tensor, ratios, seed)
/// always yields the same partition.
inline DataSplit split(const SparseTensor& tensor, SplitRatios ratios,
                       std::uint64_t seed) {
  if (tensor.empty()) throw data_error("cannot split an empty tensor");
  if (!(ratios.train > 0.0) || !(ratios.valid > 0.0) || !(ratios.test > 0.0))
    throw config_error("split ratios must all be positive");
  const double sum = ratios.train + ratios.valid + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9)
    throw config_error("split ratios must sum to 1");

  const std::size_t n = tensor.size();
  std::vector<std::uint64_t> order(n);
  for (std::size_t x = 0; x < n; ++x) order[x] = x;
  auto eng = rng::make_engine(seed);
  rng::shuffle(order, eng);

  std::size_t n_train = detail::round_half_up(static_cast<double>(n) * ratios.train);
  n_train = std::min(n_train, n);
  std::size_t n_valid = detail::round_half_up(static_cast<double>(n) * ratios.valid);
  n_valid = std::min(n_valid, n - n_train);

  const auto& src = tensor.entries();
  auto take = [&](std::size_t begin, std::size_t end) {
    std::vector<Observation> part;
    part.reserve(end - begin);
    for (std::size_t x = begin; x < end; ++x) part.push_back(src[order[x]]);
    return SparseTensor(tensor.dims(), std::move(part));
  };
  return DataSplit{take(0, n_train), take(n_train, n_train + n_valid),
                   take(n_train + n_valid, n)};
}

}  // namespace nsft
