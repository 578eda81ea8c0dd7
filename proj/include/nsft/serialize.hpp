#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "nsft/errors.hpp"
#include "nsft/model.hpp"
#include "nsft/training.hpp"

namespace nsft {

namespace detail {

// Doubles are stored as shortest hexadecimal floats (no 0x prefix), which
// round-trip bit-exactly and print identically on every platform.
inline std::string hex_double(double v) {
  char buf[48];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, p);
}

inline double parse_hex_double(const std::string& tok) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v,
                                 std::chars_format::hex);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw parse_error("model file: bad float token '" + tok + "'");
  return v;
}

inline std::string expect_token(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok))
    throw parse_error(std::string("model file: missing ") + what);
  return tok;
}

inline void expect_keyword(std::istream& in, const std::string& kw) {
  const std::string tok = expect_token(in, kw.c_str());
  if (tok != kw)
    throw parse_error("model file: expected '" + kw + "', got '" + tok + "'");
}

template <class T>
T expect_number(std::istream& in, const char* what) {
  const std::string tok = expect_token(in, what);
  T v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw parse_error(std::string("model file: bad ") + what + " '" + tok + "'");
  return v;
}

}  // namespace detail

/// Text serialization of a model. Field order is fixed, core values are
/// listed in canonical support order keyed by (p, q, r), factor matrices are
/// row-major. Loading the output reproduces every double bit-exactly, and
/// the same model always serializes to the same bytes.
inline void save_model(std::ostream& out, const NsftModel& m) {
  out << "nsft-model 1\n";
  out << "dims " << m.dims.users << ' ' << m.dims.services << ' ' << m.dims.times << '\n';
  out << "rank " << m.core.rank() << '\n';
  out << "arm-width " << m.core.arm_width() << '\n';
  out << "use-bias " << (m.use_bias ? 1 : 0) << '\n';
  out << "lambda-core " << detail::hex_double(m.lambda_core) << '\n';
  out << "lambda-factor " << detail::hex_double(m.lambda_factor) << '\n';
  out << "lambda-bias " << detail::hex_double(m.lambda_bias) << '\n';

  out << "core " << m.core.support_size() << '\n';
  m.core.for_each([&](CoreIndex idx, double v) {
    out << idx.p << ' ' << idx.q << ' ' << idx.r << ' ' << detail::hex_double(v) << '\n';
  });

  auto matrix = [&](const char* name, const std::vector<double>& data,
                    std::uint32_t rows, int cols) {
    out << "matrix " << name << ' ' << rows << ' ' << cols << '\n';
    for (std::uint32_t row = 0; row < rows; ++row) {
      for (int c = 0; c < cols; ++c) {
        if (c) out << ' ';
        out << detail::hex_double(data[static_cast<std::size_t>(row) * cols + c]);
      }
      out << '\n';
    }
  };
  matrix("user", m.factors.users, m.dims.users, m.factors.rank);
  matrix("service", m.factors.services, m.dims.services, m.factors.rank);
  matrix("time", m.factors.times, m.dims.times, m.factors.rank);

  auto bias = [&](const char* name, const std::vector<double>& data) {
    out << "bias " << name << ' ' << data.size() << '\n';
    for (std::size_t x = 0; x < data.size(); ++x) {
      if (x) out << ' ';
      out << detail::hex_double(data[x]);
    }
    out << '\n';
  };
  bias("user", m.biases.user);
  bias("service", m.biases.service);
  bias("time", m.biases.time);
  out << "end\n";
}

inline NsftModel load_model(std::istream& in) {
  detail::expect_keyword(in, "nsft-model");
  const int version = detail::expect_number<int>(in, "format version");
  if (version != 1)
    throw parse_error("model file: unsupported format version " +
                      std::to_string(version));

  detail::expect_keyword(in, "dims");
  Dims dims;
  dims.users = detail::expect_number<std::uint32_t>(in, "user count");
  dims.services = detail::expect_number<std::uint32_t>(in, "service count");
  dims.times = detail::expect_number<std::uint32_t>(in, "time count");

  detail::expect_keyword(in, "rank");
  const int rank = detail::expect_number<int>(in, "rank");
  detail::expect_keyword(in, "arm-width");
  const int arm_width = detail::expect_number<int>(in, "arm width");
  detail::expect_keyword(in, "use-bias");
  const int use_bias = detail::expect_number<int>(in, "use-bias flag");

  NsftModel m{dims, SnowflakeCore(rank, arm_width), FactorMatrices{}, BiasVectors{}};
  m.use_bias = use_bias != 0;
  detail::expect_keyword(in, "lambda-core");
  m.lambda_core = detail::parse_hex_double(detail::expect_token(in, "lambda-core"));
  detail::expect_keyword(in, "lambda-factor");
  m.lambda_factor = detail::parse_hex_double(detail::expect_token(in, "lambda-factor"));
  detail::expect_keyword(in, "lambda-bias");
  m.lambda_bias = detail::parse_hex_double(detail::expect_token(in, "lambda-bias"));

  detail::expect_keyword(in, "core");
  const auto core_count = detail::expect_number<std::uint64_t>(in, "core count");
  if (core_count != m.core.support_size())
    throw parse_error("model file: core count does not match rank/arm width");
  m.core.for_each([&](CoreIndex idx, double& v) {
    const int p = detail::expect_number<int>(in, "core index");
    const int q = detail::expect_number<int>(in, "core index");
    const int r = detail::expect_number<int>(in, "core index");
    if (CoreIndex{p, q, r} != idx)
      throw parse_error("model file: core entries out of canonical order");
    v = detail::parse_hex_double(detail::expect_token(in, "core value"));
  });

  m.factors.rank = rank;
  auto matrix = [&](const char* name, std::vector<double>& data, std::uint32_t rows) {
    detail::expect_keyword(in, "matrix");
    detail::expect_keyword(in, name);
    const auto got_rows = detail::expect_number<std::uint32_t>(in, "matrix rows");
    const int got_cols = detail::expect_number<int>(in, "matrix cols");
    if (got_rows != rows || got_cols != rank)
      throw parse_error(std::string("model file: bad shape for matrix ") + name);
    data.resize(static_cast<std::size_t>(rows) * rank);
    for (double& v : data)
      v = detail::parse_hex_double(detail::expect_token(in, "matrix value"));
  };
  matrix("user", m.factors.users, dims.users);
  matrix("service", m.factors.services, dims.services);
  matrix("time", m.factors.times, dims.times);

  auto bias = [&](const char* name, std::vector<double>& data, std::uint32_t len) {
    detail::expect_keyword(in, "bias");
    detail::expect_keyword(in, name);
    const auto got = detail::expect_number<std::uint64_t>(in, "bias length");
    if (got != len)
      throw parse_error(std::string("model file: bad length for bias ") + name);
    data.resize(len);
    for (double& v : data)
      v = detail::parse_hex_double(detail::expect_token(in, "bias value"));
  };
  bias("user", m.biases.user, dims.users);
  bias("service", m.biases.service, dims.services);
  bias("time", m.biases.time, dims.times);
  detail::expect_keyword(in, "end");
  return m;
}

inline const char* to_string(StopReason reason) {
  return reason == StopReason::tolerance ? "tolerance" : "max_epochs";
}

/// Line-oriented training log: one record per epoch with the training
/// objective and validation metrics, then a footer with the stop reason and
/// convergence epoch. Written as one JSON object per line; NaN metrics
/// (no validation split) appear as null.
inline void write_report(std::ostream& out, const TrainReport& report) {
  auto number_or_null = [](double v) {
    return std::isnan(v) ? nlohmann::json() : nlohmann::json(v);
  };
  for (const EpochRecord& rec : report.epochs) {
    nlohmann::json line{{"type", "epoch"},
                        {"epoch", rec.epoch},
                        {"train_objective", number_or_null(rec.train_objective)},
                        {"valid_mae", number_or_null(rec.valid_mae)},
                        {"valid_rmse", number_or_null(rec.valid_rmse)}};
    out << line.dump() << '\n';
  }
  nlohmann::json footer{{"type", "footer"},
                        {"stop_reason", to_string(report.stop_reason)},
                        {"converged_at", report.converged_at
                                             ? nlohmann::json(*report.converged_at)
                                             : nlohmann::json()}};
  out << footer.dump() << '\n';
}

}  // namespace nsft
