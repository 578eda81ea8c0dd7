#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "nsft/errors.hpp"
#include "nsft/model.hpp"
#include "nsft/random.hpp"
#include "nsft/tensor.hpp"

namespace nsft {

// Recipe for a ground-truth model and a sampled observation set; the
// independent oracle behind the recovery tests.
struct SyntheticSpec {
  Dims dims;
  int rank = 1;
  int arm_width = 0;
  std::uint64_t seed = 0;
  double density = 1.0;      // target fraction of cells sampled, in (0, 1]
  double noise_sigma = 0.0;  // additive Gaussian, truncated at zero
  double low = 0.2;          // parameter range; low > 0
  double high = 1.0;
};

inline void validate(const SyntheticSpec& spec) {
  if (!(spec.density > 0.0) || spec.density > 1.0)
    throw config_error("density must be in (0, 1]");
  if (spec.noise_sigma < 0.0) throw config_error("noise_sigma must be >= 0");
  if (!(spec.low > 0.0)) throw config_error("parameter range low must be > 0");
  if (spec.high < spec.low) throw config_error("parameter range high must be >= low");
}

/// Ground-truth model with all parameters uniform in [low, high],
/// deterministic per seed. Seeding is decorrelated from sampling via a
/// fixed stream tag.
inline NsftModel generate_ground_truth(const SyntheticSpec& spec) {
  validate(spec);
  return init_model(spec.dims, spec.rank, spec.arm_width,
                    rng::mix(spec.seed, 0), spec.low, spec.high);
}

/// Samples round(density * volume) distinct cells uniformly at random,
/// setting y = max(0, prediction + noise) and dropping exact zeros, which
/// mirrors the zero-exclusion rule applied to the real datasets. Cell
/// selection and noise draws share one seeded stream; entries come back in
/// sorted index order.
inline SparseTensor sample_observations(const NsftModel& truth,
                                        const SyntheticSpec& spec) {
  validate(spec);
  const std::uint64_t volume = truth.dims.volume();
  const auto count = static_cast<std::uint64_t>(
      std::llround(spec.density * static_cast<double>(volume)));

  auto eng = rng::make_engine(rng::mix(spec.seed, 1));
  std::vector<std::uint64_t> flat;
  flat.reserve(count);
  if (count == volume) {
    for (std::uint64_t x = 0; x < volume; ++x) flat.push_back(x);
  } else {
    // Floyd's sampling: `count` distinct values in [0, volume) without
    // materializing the full index range.
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(count * 2);
    for (std::uint64_t j = volume - count; j < volume; ++j) {
      const std::uint64_t t = rng::bounded(eng, j + 1);
      if (chosen.insert(t).second)
        flat.push_back(t);
      else {
        chosen.insert(j);
        flat.push_back(j);
      }
    }
    std::sort(flat.begin(), flat.end());
  }

  const std::uint64_t span_jk =
      static_cast<std::uint64_t>(truth.dims.services) * truth.dims.times;
  std::vector<Observation> entries;
  entries.reserve(flat.size());
  for (const std::uint64_t x : flat) {
    const EntryIndex e{static_cast<std::uint32_t>(x / span_jk),
                       static_cast<std::uint32_t>((x % span_jk) / truth.dims.times),
                       static_cast<std::uint32_t>(x % truth.dims.times)};
    double y = predict(truth, e);
    if (spec.noise_sigma > 0.0) y += spec.noise_sigma * rng::gaussian(eng);
    y = std::max(0.0, y);
    if (y > 0.0) entries.push_back(Observation{e, y});
  }
  return SparseTensor(truth.dims, std::move(entries));
}

}  // namespace nsft
