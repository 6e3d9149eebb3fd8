// Tiled GEMM engine model: functional output-stationary compute plus the
// per-output-tile cycle models for the plain and input-selective PE arrays.
#pragma once

#include <cstdint>
#include <vector>

#include "ovgen/common.hpp"
#include "ovgen/compress.hpp"
#include "ovgen/model.hpp"
#include "ovgen/wgen.hpp"

namespace ovgen {

struct MatF {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> a;

  MatF() = default;
  MatF(std::int64_t r, std::int64_t c)
      : rows(r), cols(c), a(static_cast<std::size_t>(r * c), 0.0) {}
  double& at(std::int64_t r, std::int64_t c) { return a[static_cast<std::size_t>(r * cols + c)]; }
  double at(std::int64_t r, std::int64_t c) const {
    return a[static_cast<std::size_t>(r * cols + c)];
  }
};

struct MatI16 {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::int16_t> a;

  MatI16() = default;
  MatI16(std::int64_t r, std::int64_t c)
      : rows(r), cols(c), a(static_cast<std::size_t>(r * c), 0) {}
  std::int16_t& at(std::int64_t r, std::int64_t c) {
    return a[static_cast<std::size_t>(r * cols + c)];
  }
  std::int16_t at(std::int64_t r, std::int64_t c) const {
    return a[static_cast<std::size_t>(r * cols + c)];
  }
};

struct MatI32 {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::int32_t> a;

  MatI32() = default;
  MatI32(std::int64_t r, std::int64_t c)
      : rows(r), cols(c), a(static_cast<std::size_t>(r * c), 0) {}
  std::int32_t& at(std::int64_t r, std::int64_t c) {
    return a[static_cast<std::size_t>(r * cols + c)];
  }
  std::int32_t at(std::int64_t r, std::int64_t c) const {
    return a[static_cast<std::size_t>(r * cols + c)];
  }
};

// Channel-major activation volume (c, then h, then w).
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Image() = default;
  Image(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, 0.0) {}
  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

// Output spatial extent for one dimension; requires dim + 2*pad >= k.
int conv_out_dim(int dim, int k, int stride, int pad);

// Direct sliding-window convolution, the functional oracle for the GEMM path.
// bias may be null.
Image conv_reference(const Image& input, const FilterBank& filters, int stride, int pad,
                     const std::vector<double>* bias);

// Patch matrix with one row per output position (row-major over y, then x)
// and one column per (channel, ky, kx) element, matching the P-dimension
// layout of the generated weight matrices.
MatF im2col(const Image& input, int k, int stride, int pad);

// Output-stationary tiled multiply: x is R x P, w is P x C, result R x C.
// Accumulates ceil(P/T_P) partial tile products per T_R x T_C output tile.
MatF tiled_gemm(const MatF& x, const MatF& w, const DesignPoint& sigma);

// Fixed-point variant: 16-bit operands, 32-bit accumulators. Accumulator
// overflow saturates and bumps *overflows rather than wrapping silently.
MatI32 tiled_gemm(const MatI16& x, const MatI16& w, const DesignPoint& sigma,
                  std::int64_t* overflows);

// Views of a generated weight matrix in the layout tiled_gemm expects.
MatF weights_as_float(const WeightMatrix& wm);
MatI16 weights_as_fixed(const WeightMatrix& wm);

// Cycles for one T_R x T_C output tile with every PE active on its own column.
std::int64_t cycles_baseline(const WorkloadTuple& w, const DesignPoint& sigma);

// Closed-form cycles with input-selective PEs absorbing idle columns, clamped
// between the work lower bound and the baseline.
std::int64_t cycles_selective(const WorkloadTuple& w, const DesignPoint& sigma);

// Discrete work-stealing simulator over the PE array for one output tile.
// Resident PEs each own a column; the remaining PEs join in one per cycle
// (one weight hop per cycle along the chain) and take rows from the column
// with the most work left, lowest index on ties. Each of the ceil(P/T_P)
// passes carries a fresh weight strip, so the ramp repeats per pass.
std::int64_t schedule_sim(const WorkloadTuple& w, const DesignPoint& sigma, bool selective);

}  // namespace ovgen
