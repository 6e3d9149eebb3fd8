// Shared error types and small integer helpers used across the library.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ovgen {

// Bad configuration values (out-of-range knobs, unknown preset names).
// The CLI maps these to exit code 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally invalid data passed between components (shape mismatches,
// non-binary code entries, inconsistent containers).
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical breakdown: singular systems, forbidden overflow.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files; message carries file/field diagnostics.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

// Ceiling division that is also correct for negative numerators.
inline std::int64_t ceil_div_signed(std::int64_t a, std::int64_t b) {
  if (a >= 0) return (a + b - 1) / b;
  return -((-a) / b);
}

inline bool is_pow2(std::int64_t v) {
  return v > 0 && (v & (v - 1)) == 0;
}

}  // namespace ovgen
