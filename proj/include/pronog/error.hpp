#pragma once

#include <stdexcept>
#include <string>

namespace pronog {

// Error categories map onto CLI exit codes: config=1, data=2, numeric=3.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violation of the freeze contract or another caller-facing invariant.
struct contract_violation : numeric_error {
  using numeric_error::numeric_error;
};

}  // namespace pronog
