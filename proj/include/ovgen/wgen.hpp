// Functional and cycle-granular model of the hardware weights generator:
// packed-code FIFO with aligner, parallel alpha fetches, M-wide multiply and
// accumulate arrays, and the tiled subtile traversal of the weight matrix.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ovgen/basis.hpp"
#include "ovgen/common.hpp"
#include "ovgen/compress.hpp"
#include "ovgen/model.hpp"

namespace ovgen {

// Accelerator configuration under exploration: vector-unit width M and the
// three tile sizes.
struct DesignPoint {
  std::int64_t m = 1;
  std::int64_t t_r = 1;
  std::int64_t t_p = 1;
  std::int64_t t_c = 1;

  void validate() const {
    if (m < 1 || t_r < 1 || t_p < 1 || t_c < 1)
      throw config_error("design point dimensions must be >= 1");
  }
  bool operator==(const DesignPoint&) const = default;
};

struct AlphaBufferGeom {
  std::int64_t n_f = 0;          // parallel fetch ports
  std::int64_t depth = 0;        // buffer depth
  std::int64_t total_alphas = 0; // alpha values across all compressed layers
};

// Literal filters-per-subtile port count. Known to undercount live slices
// when the effective slice length does not divide T_P (cropped 3x3 layers
// with power-of-two tiles); the simulator provisions ports from the actual
// traversal geometry instead and reports both.
std::int64_t filters_per_subtile(std::int64_t m, std::int64_t t_p, std::int64_t kmax_sq);

AlphaBufferGeom alpha_geometry(const ModelSpec& scheduled, const DesignPoint& sigma);

// Per-layer alpha count n_in * n_out * J (0 for bypass).
std::int64_t layer_alpha_count(const LayerSpec& layer);

struct AlignerResult {
  PackedCode out;        // next m bits of the periodic stream
  PackedCode writeback;  // code rotated so the next read continues the stream
};

// Reads m bits of the infinite periodic extension of v starting at bit 0 and
// returns the rotated code to write back (phase advance m mod Q).
AlignerResult aligner_step(const PackedCode& v, int m);

// v rotated left by r: result bit i = v bit (i + r) mod length.
PackedCode rotate_code(const PackedCode& v, int r);

enum class NumericMode { flt, fixed16 };

struct WeightMatrix {
  std::int64_t rows = 0;  // P
  std::int64_t cols = 0;  // C
  NumericMode mode = NumericMode::flt;
  std::vector<double> fval;         // float mode, row-major
  std::vector<std::int32_t> ival;   // fixed mode (int16 range), row-major

  double fat(std::int64_t r, std::int64_t c) const {
    return fval[static_cast<std::size_t>(r * cols + c)];
  }
  std::int32_t iat(std::int64_t r, std::int64_t c) const {
    return ival[static_cast<std::size_t>(r * cols + c)];
  }
};

// Software rendition of the tiled generation algorithm, loop for loop.
WeightMatrix tiwgen_reference(const CompressedLayer& layer, const DesignPoint& sigma,
                              NumericMode mode);

// Dense oracle: weights from the per-slice linear combination without any
// tiling, row p = c_in * Q + k, column c_out.
WeightMatrix dense_weight_matrix(const CompressedLayer& layer, NumericMode mode);

struct TileTrace {
  std::int64_t tile_p = 0;
  std::int64_t tile_c = 0;
  std::int64_t subtiles = 0;
  std::int64_t cycles = 0;
};

struct WgenTrace {
  std::vector<TileTrace> tiles;
  std::int64_t total_cycles = 0;
  std::int64_t max_alpha_ports = 0;   // observed per-cycle filter-slice demand
  std::int64_t provisioned_ports = 0; // geometric worst case for this (layer, sigma)
  std::int64_t realignments = 0;      // phase re-seeds at column boundaries
  std::int64_t saturated = 0;         // fixed-mode narrowing saturations
};

struct WgenResult {
  WeightMatrix weights;
  WgenTrace trace;
};

// Event-stepped generator model. Produces weights bit-identical to
// tiwgen_reference (fixed mode) and a per-tile cycle trace obeying
// cycles = ceil(T_P*T_C / M) * J exactly.
WgenResult simulate_wgen(const CompressedLayer& layer, const DesignPoint& sigma,
                         NumericMode mode);

void write_trace_csv(const std::string& path, const WgenTrace& trace);

}  // namespace ovgen
