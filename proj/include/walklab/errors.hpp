#pragma once

#include <stdexcept>
#include <string>

namespace walklab {

// Bad user input: malformed config, unknown fields, invalid parameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Valid request that this build cannot answer in closed form
// (unsupported law/set pair, infinite-mass target, undefined moment).
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural defect of a chain: reducible where irreducibility is required,
// absorbing complement, singular first-passage system.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Internal cross-check failed (two closed-form routes disagree).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace walklab
