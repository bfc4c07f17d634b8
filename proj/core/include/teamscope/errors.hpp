#pragma once

#include <stdexcept>

namespace teamscope {

// lookup of an id the caller claimed exists
struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// malformed input data; message carries file/line where possible
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// bad configuration or parameter combination
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// numeric procedure failed (non-convergence, collinearity, ...)
struct ComputeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace teamscope
