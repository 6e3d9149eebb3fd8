#include "ovgen/resources.hpp"

#include <algorithm>
#include <cmath>

namespace ovgen {

std::string to_string(Variant v) { return v == Variant::unzip ? "unzip" : "baseline"; }

Variant variant_from_string(const std::string& s) {
  if (s == "unzip") return Variant::unzip;
  if (s == "baseline") return Variant::baseline;
  throw parse_error("unknown variant: " + s + " (expected unzip or baseline)");
}

namespace {

std::int64_t augmented_pe_count(const DesignPoint& sigma, const ModelSpec& scheduled) {
  // PEs that sit idle for at least one layer: indices >= min over layers of
  // the layer's output-channel count, clamped to the array width.
  std::int64_t min_c = sigma.t_c;
  for (const LayerSpec& l : scheduled.layers)
    min_c = std::min(min_c, static_cast<std::int64_t>(l.n_out));
  return sigma.t_c - min_c;
}

}  // namespace

ResourceUsage usage(const DesignPoint& sigma, const ModelSpec& scheduled,
                    const PlatformSpec& platform, Variant variant, bool selective) {
  sigma.validate();
  platform.validate();
  const std::int64_t wl = platform.wl;

  ResourceUsage u;
  u.ram.io_buffers = 2 * (sigma.t_r * sigma.t_p + sigma.t_r * sigma.t_c) * wl;
  u.augmented_pes = selective ? augmented_pe_count(sigma, scheduled) : 0;

  if (variant == Variant::baseline) {
    u.ram.weight_buffer = 2 * sigma.t_p * sigma.t_c * wl;
    u.vec.dsp = platform.d_mac * sigma.t_p * sigma.t_c;
    u.vec.bram_bits = u.ram.io_buffers + u.ram.weight_buffer;
  } else {
    const std::int64_t kmax = scheduled.k_max();
    u.ram.fifo_bits = static_cast<std::int64_t>(kmax) * kmax * kmax * kmax;
    u.alpha = alpha_geometry(scheduled, sigma);
    u.ram.alpha_demand = u.alpha.depth * u.alpha.n_f * wl;

    // Largest double-buffered per-layer working set: coefficients for one
    // column tile, streamed in while the previous tile computes.
    std::int64_t working = 0;
    for (const LayerSpec& l : scheduled.layers) {
      if (l.repr_mode == ReprMode::bypass) continue;
      std::int64_t slice = static_cast<std::int64_t>(l.n_in) *
                           std::min<std::int64_t>(sigma.t_c, l.n_out) * l.retained_count();
      working = std::max(working, slice);
    }
    u.ram.working_bits = 2 * working * wl;

    const std::int64_t budget =
        std::max<std::int64_t>(0, platform.cfpga_bits - u.ram.io_buffers - u.ram.fifo_bits);
    if (u.ram.alpha_demand <= budget) {
      u.ram.alpha_bits = u.ram.alpha_demand;
    } else {
      u.ram.alpha_capped = true;
      u.ram.alpha_bits = std::max(u.ram.working_bits, budget);
    }

    u.vec.dsp = platform.d_mac * (sigma.m + sigma.t_p * sigma.t_c);
    u.vec.bram_bits = u.ram.io_buffers + u.ram.fifo_bits + u.ram.alpha_bits;
  }

  const LutModel& lm = platform.lut;
  double luts = lm.c0 + lm.c2 * static_cast<double>(sigma.t_p * sigma.t_c) +
                lm.c3 * static_cast<double>(u.augmented_pes);
  if (variant == Variant::unzip) luts += lm.c1 * static_cast<double>(sigma.m);
  u.vec.luts = static_cast<std::int64_t>(std::llround(luts));
  return u;
}

Feasibility feasible(const DesignPoint& sigma, const ModelSpec& scheduled,
                     const PlatformSpec& platform, Variant variant, bool selective) {
  Feasibility f;
  f.use = usage(sigma, scheduled, platform, variant, selective);
  if (f.use.vec.dsp > platform.dsp) f.violated.push_back("dsp");
  if (f.use.vec.bram_bits > platform.cfpga_bits) f.violated.push_back("bram");
  if (platform.lut.enforce && platform.lut_capacity > 0 && f.use.vec.luts > platform.lut_capacity)
    f.violated.push_back("lut");
  f.ok = f.violated.empty();
  return f;
}

}  // namespace ovgen
