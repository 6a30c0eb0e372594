#pragma once

#include <stdexcept>

namespace mmmcmc {

// Bad user-supplied configuration. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numerical procedure failed (non-convergent quadrature, bad transition
// matrix, ...). The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mmmcmc
