// FPGA resource model (DSP count, on-chip RAM bits, LUT estimate) and the
// feasibility check used to prune the design space.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ovgen/model.hpp"
#include "ovgen/wgen.hpp"

namespace ovgen {

// Accelerator flavor: `unzip` generates weights on chip from stored
// coefficients; `baseline` streams raw weights from external memory.
enum class Variant { unzip, baseline };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ResourceVector {
  std::int64_t dsp = 0;
  std::int64_t bram_bits = 0;
  std::int64_t luts = 0;
};

// RAM bit accounting, kept separate so reports can show where capacity goes.
struct RamBreakdown {
  std::int64_t io_buffers = 0;     // double-buffered input/output activations
  std::int64_t fifo_bits = 0;      // code FIFO, K_max^4
  std::int64_t alpha_demand = 0;   // full coefficient residency, uncapped
  std::int64_t alpha_bits = 0;     // resident coefficient storage after capping
  std::int64_t working_bits = 0;   // double-buffered largest per-layer slice
  bool alpha_capped = false;
  std::int64_t weight_buffer = 0;  // baseline double-buffered weights tile
};

struct ResourceUsage {
  ResourceVector vec;
  RamBreakdown ram;
  AlphaBufferGeom alpha;
  std::int64_t augmented_pes = 0;
};

// Resource usage of design point `sigma` for the scheduled model. When the
// full coefficient set exceeds the RAM left after the activation buffers and
// FIFO, residency is capped: the buffer holds what fits, never less than a
// double-buffered single-layer working set streamed per column tile.
ResourceUsage usage(const DesignPoint& sigma, const ModelSpec& scheduled,
                    const PlatformSpec& platform, Variant variant, bool selective);

struct Feasibility {
  bool ok = true;
  std::vector<std::string> violated;  // subset of {"dsp", "bram", "lut"}
  ResourceUsage use;
};

Feasibility feasible(const DesignPoint& sigma, const ModelSpec& scheduled,
                     const PlatformSpec& platform, Variant variant, bool selective);

}  // namespace ovgen
