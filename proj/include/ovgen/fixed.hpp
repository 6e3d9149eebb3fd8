// Signed fixed-point helpers: round-half-even quantization with saturation.
#pragma once

#include <cmath>
#include <cstdint>

#include "ovgen/common.hpp"

namespace ovgen {

struct QuantSpec {
  int word_length = 16;
  int frac_bits = 8;
};

// Round to nearest, ties to even, independent of the ambient FP rounding mode.
inline double round_half_even(double x) {
  double fl = std::floor(x);
  double diff = x - fl;
  if (diff > 0.5) return fl + 1.0;
  if (diff < 0.5) return fl;
  return (std::fmod(fl, 2.0) == 0.0) ? fl : fl + 1.0;
}

// Quantize to a signed word_length-bit integer with frac_bits fractional bits,
// saturating at the range limits. saturated (if given) counts clamped values.
inline std::int32_t quantize_value(double x, const QuantSpec& spec,
                                   std::int64_t* saturated = nullptr) {
  if (spec.frac_bits < 1 || spec.frac_bits >= spec.word_length || spec.word_length > 32)
    throw config_error("quantization requires 1 <= frac_bits < word_length <= 32");
  double scaled = round_half_even(x * std::exp2(spec.frac_bits));
  std::int64_t lo = -(std::int64_t{1} << (spec.word_length - 1));
  std::int64_t hi = (std::int64_t{1} << (spec.word_length - 1)) - 1;
  std::int64_t q = static_cast<std::int64_t>(scaled);
  if (scaled < static_cast<double>(lo)) q = lo;
  if (scaled > static_cast<double>(hi)) q = hi;
  if ((q == lo || q == hi) && (scaled < static_cast<double>(lo) || scaled > static_cast<double>(hi)))
    if (saturated) ++*saturated;
  return static_cast<std::int32_t>(q);
}

inline double dequantize_value(std::int32_t q, const QuantSpec& spec) {
  return static_cast<double>(q) * std::exp2(-spec.frac_bits);
}

// Narrow a 32-bit accumulator to the signed 16-bit operand range, saturating.
inline std::int32_t saturate16(std::int64_t v, std::int64_t* saturated = nullptr) {
  if (v > 32767) {
    if (saturated) ++*saturated;
    return 32767;
  }
  if (v < -32768) {
    if (saturated) ++*saturated;
    return -32768;
  }
  return static_cast<std::int32_t>(v);
}

}  // namespace ovgen
