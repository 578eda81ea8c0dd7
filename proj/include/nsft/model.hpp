#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nsft/core.hpp"
#include "nsft/errors.hpp"
#include "nsft/random.hpp"
#include "nsft/tensor.hpp"

namespace nsft {

// Non-negative latent factor matrices, row-major, one row per entity and one
// column per rank index (1-based in the accessors, matching the core).
struct FactorMatrices {
  int rank = 0;
  std::vector<double> users;     // |I| x R
  std::vector<double> services;  // |J| x R
  std::vector<double> times;     // |K| x R

  double user(std::uint32_t i, int r) const { return users[i * static_cast<std::size_t>(rank) + (r - 1)]; }
  double& user(std::uint32_t i, int r) { return users[i * static_cast<std::size_t>(rank) + (r - 1)]; }
  double service(std::uint32_t j, int r) const { return services[j * static_cast<std::size_t>(rank) + (r - 1)]; }
  double& service(std::uint32_t j, int r) { return services[j * static_cast<std::size_t>(rank) + (r - 1)]; }
  double time(std::uint32_t k, int r) const { return times[k * static_cast<std::size_t>(rank) + (r - 1)]; }
  double& time(std::uint32_t k, int r) { return times[k * static_cast<std::size_t>(rank) + (r - 1)]; }
};

// Additive per-entity offsets entering the biased prediction.
struct BiasVectors {
  std::vector<double> user;     // length |I|
  std::vector<double> service;  // length |J|
  std::vector<double> time;     // length |K|
};

/// Full model state: snowflake core, factor matrices, bias vectors, and the
/// regularization weights. lambda_core penalizes core elements, lambda_factor
/// the factor matrices, lambda_bias the bias vectors. Safe to share across
/// threads for read-only prediction.
struct NsftModel {
  Dims dims;
  SnowflakeCore core;
  FactorMatrices factors;
  BiasVectors biases;
  double lambda_core = 0.0;
  double lambda_factor = 0.0;
  double lambda_bias = 0.0;
  bool use_bias = true;
};

/// Fresh model with every parameter drawn i.i.d. uniform on
/// [init_low, init_high]. Draw order is fixed: core values in canonical
/// support order, then the user/service/time factor matrices row-major, then
/// the three bias vectors. init_low must be strictly positive: an exact zero
/// would be absorbing under the multiplicative updates.
inline NsftModel init_model(Dims dims, int rank, int arm_width,
                            std::uint64_t seed, double init_low,
                            double init_high) {
  if (dims.volume() == 0) throw config_error("dimensions must all be positive");
  if (!(init_low > 0.0)) throw config_error("init_low must be > 0");
  if (init_high < init_low) throw config_error("init_high must be >= init_low");

  NsftModel m{dims, SnowflakeCore(rank, arm_width), FactorMatrices{}, BiasVectors{}};
  m.factors.rank = rank;
  m.factors.users.resize(static_cast<std::size_t>(dims.users) * rank);
  m.factors.services.resize(static_cast<std::size_t>(dims.services) * rank);
  m.factors.times.resize(static_cast<std::size_t>(dims.times) * rank);
  m.biases.user.resize(dims.users);
  m.biases.service.resize(dims.services);
  m.biases.time.resize(dims.times);

  auto eng = rng::make_engine(seed);
  auto draw = [&] { return rng::uniform(eng, init_low, init_high); };
  m.core.for_each([&](CoreIndex, double& v) { v = draw(); });
  for (double& v : m.factors.users) v = draw();
  for (double& v : m.factors.services) v = draw();
  for (double& v : m.factors.times) v = draw();
  for (double& v : m.biases.user) v = draw();
  for (double& v : m.biases.service) v = draw();
  for (double& v : m.biases.time) v = draw();
  return m;
}

/// Predicted QoS value for one cell.
///
/// Accumulation order is fixed for reproducibility: groups r = 1..R outer;
/// within a group the diagonal term first, then offsets f = 1..F with the six
/// arm families in ArmFamily order (user-, service-, time- displaced, minus
/// direction before plus); arms whose displaced index leaves 1..R are
/// skipped. Biases are added last (user, service, time). Non-negative
/// parameters make the result non-negative by construction.
inline double predict(const NsftModel& m, EntryIndex e) {
  if (!e.in(m.dims))
    throw range_error("prediction index (" + std::to_string(e.i) + ", " +
                      std::to_string(e.j) + ", " + std::to_string(e.k) +
                      ") outside model dimensions");
  const SnowflakeCore& g = m.core;
  const FactorMatrices& fm = m.factors;
  const int rank = g.rank();
  const int width = g.arm_width();
  double acc = 0.0;
  for (int r = 1; r <= rank; ++r) {
    acc += g.diagonal(r) * fm.user(e.i, r) * fm.service(e.j, r) * fm.time(e.k, r);
    for (int f = 1; f <= width; ++f) {
      if (r - f >= 1) {
        acc += g.arm(ArmFamily::user_minus, r, f) * fm.user(e.i, r - f) * fm.service(e.j, r) * fm.time(e.k, r);
        acc += g.arm(ArmFamily::service_minus, r, f) * fm.user(e.i, r) * fm.service(e.j, r - f) * fm.time(e.k, r);
        acc += g.arm(ArmFamily::time_minus, r, f) * fm.user(e.i, r) * fm.service(e.j, r) * fm.time(e.k, r - f);
      }
      if (r + f <= rank) {
        acc += g.arm(ArmFamily::user_plus, r, f) * fm.user(e.i, r + f) * fm.service(e.j, r) * fm.time(e.k, r);
        acc += g.arm(ArmFamily::service_plus, r, f) * fm.user(e.i, r) * fm.service(e.j, r + f) * fm.time(e.k, r);
        acc += g.arm(ArmFamily::time_plus, r, f) * fm.user(e.i, r) * fm.service(e.j, r) * fm.time(e.k, r + f);
      }
    }
  }
  if (m.use_bias)
    acc = acc + m.biases.user[e.i] + m.biases.service[e.j] + m.biases.time[e.k];
  return acc;
}

/// Regularized instance loss for one observation:
/// (y - yhat)^2 + H, where H is the Tikhonov penalty over every core support
/// element, the three factor rows the observation touches, and (when biases
/// are enabled) its three bias entries.
inline double entry_loss(const NsftModel& m, const Observation& obs) {
  const double yhat = predict(m, obs.index);
  const double residual = obs.value - yhat;

  double core_sq = 0.0;
  m.core.for_each([&](CoreIndex, double v) { core_sq += v * v; });

  double factor_sq = 0.0;
  for (int r = 1; r <= m.factors.rank; ++r) {
    const double u = m.factors.user(obs.index.i, r);
    const double s = m.factors.service(obs.index.j, r);
    const double t = m.factors.time(obs.index.k, r);
    factor_sq += u * u + s * s + t * t;
  }

  double h = m.lambda_core * core_sq + m.lambda_factor * factor_sq;
  if (m.use_bias) {
    const double a = m.biases.user[obs.index.i];
    const double b = m.biases.service[obs.index.j];
    const double c = m.biases.time[obs.index.k];
    h += m.lambda_bias * (a * a + b * b + c * c);
  }
  return residual * residual + h;
}

}  // namespace nsft
