#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nsft/core.hpp"
#include "nsft/errors.hpp"
#include "nsft/metrics.hpp"
#include "nsft/model.hpp"
#include "nsft/random.hpp"
#include "nsft/tensor.hpp"

namespace nsft {

// Selects the arm contribution used in factor-matrix gradients and updates.
//
// `paper` keeps exactly the four within-group arm terms of the published
// update rule. That rule omits the contributions a factor entry receives
// through the arms of neighboring groups, so `full` adds those cross-group
// terms, making the coefficient the exact sensitivity of the prediction to
// the factor entry. The two modes coincide when the arm width is zero; core
// and bias rules are identical in both.
enum class GradientMode { paper, full };

struct TrainConfig {
  int max_epochs = 100;
  double tol = 1e-5;  // stop when |valid RMSE(t) - valid RMSE(t-1)| < tol
  std::uint64_t shuffle_seed = 0;
  GradientMode gradient_mode = GradientMode::paper;
  double epsilon_denom = 1e-12;  // guards the update denominators against 0/0
};

enum class StopReason { tolerance, max_epochs };

struct EpochRecord {
  int epoch = 0;             // 1-based
  double train_objective = 0.0;  // mean pre-update instance loss
  double valid_mae = 0.0;        // NaN when no validation split
  double valid_rmse = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::optional<int> converged_at;
  StopReason stop_reason = StopReason::max_epochs;
};

// Instance gradients for one observation, in the conventional 1/2-scaled
// squared-error form: each component is exactly half the partial derivative
// of entry_loss. Core gradients are in canonical support order; factor
// gradients are indexed by rank column (slot r-1). Bias gradients are zero
// when the model runs without biases.
struct EntryGradients {
  double residual = 0.0;  // y - yhat
  std::vector<double> core;
  std::vector<double> user;
  std::vector<double> service;
  std::vector<double> time;
  double user_bias = 0.0;
  double service_bias = 0.0;
  double time_bias = 0.0;
};

/// Arm contribution to the sensitivity of the prediction to u_ir.
///
/// Term order per offset f: service-displaced plus, time-displaced plus,
/// service-displaced minus, time-displaced minus (the order of the published
/// formula); in `full` mode the two cross-group terms follow, plus side
/// first. Out-of-range offsets are skipped.
inline double user_arm_term(const NsftModel& m, EntryIndex e, int r,
                            GradientMode mode) {
  const SnowflakeCore& g = m.core;
  const FactorMatrices& fm = m.factors;
  const int rank = g.rank();
  double acc = 0.0;
  for (int f = 1; f <= g.arm_width(); ++f) {
    if (r + f <= rank) {
      acc += g.arm(ArmFamily::service_plus, r, f) * fm.service(e.j, r + f) * fm.time(e.k, r);
      acc += g.arm(ArmFamily::time_plus, r, f) * fm.service(e.j, r) * fm.time(e.k, r + f);
    }
    if (r - f >= 1) {
      acc += g.arm(ArmFamily::service_minus, r, f) * fm.service(e.j, r - f) * fm.time(e.k, r);
      acc += g.arm(ArmFamily::time_minus, r, f) * fm.service(e.j, r) * fm.time(e.k, r - f);
    }
    if (mode == GradientMode::full) {
      // Arms of groups r+f and r-f whose displaced index lands on r; these
      // multiply u_ir in the prediction but are absent from the published
      // formula.
      if (r + f <= rank)
        acc += g.arm(ArmFamily::user_minus, r + f, f) * fm.service(e.j, r + f) * fm.time(e.k, r + f);
      if (r - f >= 1)
        acc += g.arm(ArmFamily::user_plus, r - f, f) * fm.service(e.j, r - f) * fm.time(e.k, r - f);
    }
  }
  return acc;
}

/// Arm contribution for s_jr; same structure as user_arm_term with the user
/// and service roles exchanged.
inline double service_arm_term(const NsftModel& m, EntryIndex e, int r,
                               GradientMode mode) {
  const SnowflakeCore& g = m.core;
  const FactorMatrices& fm = m.factors;
  const int rank = g.rank();
  double acc = 0.0;
  for (int f = 1; f <= g.arm_width(); ++f) {
    if (r + f <= rank) {
      acc += g.arm(ArmFamily::user_plus, r, f) * fm.user(e.i, r + f) * fm.time(e.k, r);
      acc += g.arm(ArmFamily::time_plus, r, f) * fm.user(e.i, r) * fm.time(e.k, r + f);
    }
    if (r - f >= 1) {
      acc += g.arm(ArmFamily::user_minus, r, f) * fm.user(e.i, r - f) * fm.time(e.k, r);
      acc += g.arm(ArmFamily::time_minus, r, f) * fm.user(e.i, r) * fm.time(e.k, r - f);
    }
    if (mode == GradientMode::full) {
      if (r + f <= rank)
        acc += g.arm(ArmFamily::service_minus, r + f, f) * fm.user(e.i, r + f) * fm.time(e.k, r + f);
      if (r - f >= 1)
        acc += g.arm(ArmFamily::service_plus, r - f, f) * fm.user(e.i, r - f) * fm.time(e.k, r - f);
    }
  }
  return acc;
}

/// Arm contribution for t_kr.
inline double time_arm_term(const NsftModel& m, EntryIndex e, int r,
                            GradientMode mode) {
  const SnowflakeCore& g = m.core;
  const FactorMatrices& fm = m.factors;
  const int rank = g.rank();
  double acc = 0.0;
  for (int f = 1; f <= g.arm_width(); ++f) {
    if (r + f <= rank) {
      acc += g.arm(ArmFamily::user_plus, r, f) * fm.user(e.i, r + f) * fm.service(e.j, r);
      acc += g.arm(ArmFamily::service_plus, r, f) * fm.user(e.i, r) * fm.service(e.j, r + f);
    }
    if (r - f >= 1) {
      acc += g.arm(ArmFamily::user_minus, r, f) * fm.user(e.i, r - f) * fm.service(e.j, r);
      acc += g.arm(ArmFamily::service_minus, r, f) * fm.user(e.i, r) * fm.service(e.j, r - f);
    }
    if (mode == GradientMode::full) {
      if (r + f <= rank)
        acc += g.arm(ArmFamily::time_minus, r + f, f) * fm.user(e.i, r + f) * fm.service(e.j, r + f);
      if (r - f >= 1)
        acc += g.arm(ArmFamily::time_plus, r - f, f) * fm.user(e.i, r - f) * fm.service(e.j, r - f);
    }
  }
  return acc;
}

/// Gradients of the (1/2-scaled) instance objective at one observation:
/// -theta * coefficient + lambda * parameter for every core support element,
/// the three touched factor rows, and the three touched biases.
inline EntryGradients entry_gradients(const NsftModel& m,
                                      const Observation& obs,
                                      GradientMode mode) {
  const EntryIndex e = obs.index;
  const double yhat = predict(m, e);
  const double theta = obs.value - yhat;
  const int rank = m.factors.rank;

  EntryGradients grads;
  grads.residual = theta;
  grads.core.reserve(m.core.support_size());
  m.core.for_each([&](CoreIndex idx, double v) {
    const double pi = m.factors.user(e.i, idx.p) * m.factors.service(e.j, idx.q) *
                      m.factors.time(e.k, idx.r);
    grads.core.push_back(-theta * pi + m.lambda_core * v);
  });

  grads.user.resize(rank);
  grads.service.resize(rank);
  grads.time.resize(rank);
  for (int r = 1; r <= rank; ++r) {
    const double cu = m.core.diagonal(r) * m.factors.service(e.j, r) * m.factors.time(e.k, r) +
                      user_arm_term(m, e, r, mode);
    const double cs = m.core.diagonal(r) * m.factors.user(e.i, r) * m.factors.time(e.k, r) +
                      service_arm_term(m, e, r, mode);
    const double ct = m.core.diagonal(r) * m.factors.user(e.i, r) * m.factors.service(e.j, r) +
                      time_arm_term(m, e, r, mode);
    grads.user[r - 1] = -theta * cu + m.lambda_factor * m.factors.user(e.i, r);
    grads.service[r - 1] = -theta * cs + m.lambda_factor * m.factors.service(e.j, r);
    grads.time[r - 1] = -theta * ct + m.lambda_factor * m.factors.time(e.k, r);
  }

  if (m.use_bias) {
    grads.user_bias = -theta + m.lambda_bias * m.biases.user[e.i];
    grads.service_bias = -theta + m.lambda_bias * m.biases.service[e.j];
    grads.time_bias = -theta + m.lambda_bias * m.biases.time[e.k];
  }
  return grads;
}

/// One non-negative multiplicative update step from a single observation.
///
/// Every new value is computed from the pre-update state (the prediction is
/// evaluated once and reused, and no coefficient sees a partially updated
/// parameter), then written back: core in canonical support order, user row,
/// service row, time row, biases. Each parameter moves as
///
///   p <- p * (y * c) / (yhat * c + lambda * p + eps)
///
/// with c the parameter's prediction coefficient (c = 1 for biases), so
/// non-negative parameters stay non-negative, an exact zero stays zero, and
/// a perfect prediction with lambda = eps = 0 leaves every parameter
/// bit-identical. A non-finite prediction or update value raises
/// divergence_error and leaves the model untouched.
inline void multiplicative_update(NsftModel& m, const Observation& obs,
                                  const TrainConfig& cfg) {
  const EntryIndex e = obs.index;
  const double y = obs.value;
  const double yhat = predict(m, e);
  if (!std::isfinite(yhat))
    throw divergence_error("prediction is not finite");
  const double eps = cfg.epsilon_denom;
  const int rank = m.factors.rank;

  thread_local std::vector<double> new_core, new_user, new_service, new_time;
  new_core.clear();
  new_core.reserve(m.core.support_size());
  m.core.for_each([&](CoreIndex idx, double v) {
    const double pi = m.factors.user(e.i, idx.p) * m.factors.service(e.j, idx.q) *
                      m.factors.time(e.k, idx.r);
    new_core.push_back(v * ((y * pi) / (yhat * pi + m.lambda_core * v + eps)));
  });

  new_user.resize(rank);
  new_service.resize(rank);
  new_time.resize(rank);
  for (int r = 1; r <= rank; ++r) {
    const double u = m.factors.user(e.i, r);
    const double s = m.factors.service(e.j, r);
    const double t = m.factors.time(e.k, r);
    const double cu = m.core.diagonal(r) * s * t + user_arm_term(m, e, r, cfg.gradient_mode);
    const double cs = m.core.diagonal(r) * u * t + service_arm_term(m, e, r, cfg.gradient_mode);
    const double ct = m.core.diagonal(r) * u * s + time_arm_term(m, e, r, cfg.gradient_mode);
    new_user[r - 1] = u * ((y * cu) / (yhat * cu + m.lambda_factor * u + eps));
    new_service[r - 1] = s * ((y * cs) / (yhat * cs + m.lambda_factor * s + eps));
    new_time[r - 1] = t * ((y * ct) / (yhat * ct + m.lambda_factor * t + eps));
  }

  double new_a = 0.0, new_b = 0.0, new_c = 0.0;
  if (m.use_bias) {
    const double a = m.biases.user[e.i];
    const double b = m.biases.service[e.j];
    const double c = m.biases.time[e.k];
    new_a = a * (y / (yhat + m.lambda_bias * a + eps));
    new_b = b * (y / (yhat + m.lambda_bias * b + eps));
    new_c = c * (y / (yhat + m.lambda_bias * c + eps));
  }

  for (const double v : new_core)
    if (!std::isfinite(v)) throw divergence_error("core update is not finite");
  for (int r = 0; r < rank; ++r)
    if (!std::isfinite(new_user[r]) || !std::isfinite(new_service[r]) ||
        !std::isfinite(new_time[r]))
      throw divergence_error("factor update is not finite");
  if (m.use_bias && (!std::isfinite(new_a) || !std::isfinite(new_b) || !std::isfinite(new_c)))
    throw divergence_error("bias update is not finite");

  std::size_t slot = 0;
  m.core.for_each([&](CoreIndex, double& v) { v = new_core[slot++]; });
  for (int r = 1; r <= rank; ++r) m.factors.user(e.i, r) = new_user[r - 1];
  for (int r = 1; r <= rank; ++r) m.factors.service(e.j, r) = new_service[r - 1];
  for (int r = 1; r <= rank; ++r) m.factors.time(e.k, r) = new_time[r - 1];
  if (m.use_bias) {
    m.biases.user[e.i] = new_a;
    m.biases.service[e.j] = new_b;
    m.biases.time[e.k] = new_c;
  }
}

/// One pass over the training set in a pseudorandom order derived from
/// (shuffle_seed, epoch). Returns the mean instance loss measured before
/// each update. Deterministic for a given model state, data, and config.
inline double train_epoch(NsftModel& m, const SparseTensor& train, int epoch,
                          const TrainConfig& cfg) {
  if (train.empty()) throw data_error("training set is empty");
  const auto& entries = train.entries();
  const std::size_t n = entries.size();

  std::vector<std::uint64_t> order(n);
  for (std::size_t x = 0; x < n; ++x) order[x] = x;
  auto eng = rng::make_engine(rng::mix(cfg.shuffle_seed, static_cast<std::uint64_t>(epoch)));
  rng::shuffle(order, eng);

  double sum = 0.0, comp = 0.0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const Observation& obs = entries[order[pos]];
    const double loss = entry_loss(m, obs);
    const double t = sum + loss;
    if (std::abs(sum) >= std::abs(loss))
      comp += (sum - t) + loss;
    else
      comp += (loss - t) + sum;
    sum = t;
    try {
      multiplicative_update(m, obs, cfg);
    } catch (const divergence_error& err) {
      throw divergence_error(std::string(err.what()) + " at epoch " +
                             std::to_string(epoch) + ", observation " +
                             std::to_string(pos) + " of the shuffled pass");
    }
  }
  return (sum + comp) / static_cast<double>(n);
}

/// Runs up to max_epochs training passes, evaluating the validation split
/// after each. Stops early once the change in validation RMSE between
/// successive epochs falls below tol. The report holds the full epoch
/// trajectory; the model is left in its last-epoch state.
inline TrainReport train(NsftModel& m, const DataSplit& split,
                         const TrainConfig& cfg) {
  if (cfg.max_epochs < 1) throw config_error("max_epochs must be >= 1");
  if (!(cfg.epsilon_denom > 0.0))
    throw config_error("epsilon_denom must be > 0");
  if (cfg.tol < 0.0) throw config_error("tol must be >= 0");
  if (split.train.empty()) throw data_error("training split is empty");
  if (cfg.tol > 0.0 && split.valid.empty())
    throw data_error("tol > 0 requires a non-empty validation split");

  TrainReport report;
  double prev_rmse = std::numeric_limits<double>::quiet_NaN();
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const double objective = train_epoch(m, split.train, epoch, cfg);
    double vmae = std::numeric_limits<double>::quiet_NaN();
    double vrmse = std::numeric_limits<double>::quiet_NaN();
    if (!split.valid.empty()) {
      const EvalResult ev = evaluate(m, split.valid);
      vmae = ev.mae;
      vrmse = ev.rmse;
    }
    report.epochs.push_back(EpochRecord{epoch, objective, vmae, vrmse});
    if (epoch >= 2 && std::abs(vrmse - prev_rmse) < cfg.tol) {
      report.converged_at = epoch;
      report.stop_reason = StopReason::tolerance;
      return report;
    }
    prev_rmse = vrmse;
  }
  report.stop_reason = StopReason::max_epochs;
  return report;
}

}  // namespace nsft
