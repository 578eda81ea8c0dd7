#pragma once

#include <stdexcept>
#include <string>

namespace nsft {

// Base class for everything thrown by this library.
class error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments at the API or CLI boundary (ratios, ranks, ranges, ...).
class config_error : public error {
  using error::error;
};

// Anything wrong with input data. Subclassed so callers can tell a
// malformed file from an out-of-bounds index or a duplicate entry.
class data_error : public error {
  using error::error;
};

class parse_error : public data_error {
  using data_error::data_error;
};

class range_error : public data_error {
  using data_error::data_error;
};

class integrity_error : public data_error {
  using data_error::data_error;
};

// Non-finite value produced during training; carries enough context in the
// message to locate the offending epoch/observation.
class divergence_error : public error {
  using error::error;
};

}  // namespace nsft
