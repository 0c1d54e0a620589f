#pragma once

#include <stdexcept>
#include <string>

namespace cellpop {

// Exit-code contract used by the CLI: 2 config, 3 subcritical, 4 resolution/CFL, 5 numeric.

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model has no positive growth eigenvalue (mu(0) <= 1).
struct subcritical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Discretization cannot resolve the problem (age tail too fat, CFL violated, ...).
struct resolution_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iteration/integration failure.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cellpop
