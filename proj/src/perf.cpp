#include "ovgen/perf.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace ovgen {

namespace {

std::int64_t wl_bytes(const PlatformSpec& platform) {
  return ceil_div(static_cast<std::int64_t>(platform.wl), 8);
}

std::int64_t freq_hz(const PlatformSpec& platform) {
  return static_cast<std::int64_t>(std::llround(platform.freq_mhz * 1e6));
}

std::int64_t transfer_cycles(std::int64_t bytes, double bw_gbs, const PlatformSpec& platform) {
  if (bw_gbs <= 0.0) throw config_error("bandwidth must be positive");
  // Integer form of ceil(bytes / bytes-per-cycle) to keep results exact.
  std::int64_t bw_bytes = static_cast<std::int64_t>(std::llround(bw_gbs * 1e9));
  return ceil_div(bytes * freq_hz(platform), bw_bytes);
}

}  // namespace

std::int64_t transfer_cycles_in(std::int64_t bytes, const PlatformSpec& platform) {
  return transfer_cycles(bytes, platform.bw_in_gbs, platform);
}

std::int64_t t_wgen_cycles(const LayerSpec& layer, const DesignPoint& sigma) {
  sigma.validate();
  if (layer.repr_mode == ReprMode::bypass) return 0;
  WorkloadTuple w = to_workload(layer);
  return static_cast<std::int64_t>(layer.retained_count()) *
         ceil_div(sigma.t_p * sigma.t_c, sigma.m) * ceil_div(w.p, sigma.t_p);
}

MemCycles t_mem_cycles(const WorkloadTuple& w, const DesignPoint& sigma,
                       const PlatformSpec& platform) {
  MemCycles mc;
  mc.t_in = transfer_cycles(sigma.t_r * w.p * wl_bytes(platform), platform.bw_in_gbs, platform);
  mc.t_out =
      transfer_cycles(sigma.t_r * sigma.t_c * wl_bytes(platform), platform.bw_out_gbs, platform);
  return mc;
}

PerformanceEstimate estimate(const ModelSpec& scheduled, const DesignPoint& sigma,
                             const PlatformSpec& platform, Variant variant, bool selective) {
  scheduled.validate();
  sigma.validate();
  platform.validate();

  PerformanceEstimate pe;
  pe.sigma = sigma;
  pe.variant = variant;
  pe.selective = selective;

  // Weight caching for streamed layers draws on RAM not strictly required by
  // the activation buffers, FIFO, and coefficient store. When the coefficient
  // buffer is capped it only *needs* the double-buffered working set; the
  // rest of its allocation is discardable cache, so that slack is available
  // here. Layers run one at a time on the single engine, so the leftover is
  // checked per layer.
  ResourceUsage used = usage(sigma, scheduled, platform, variant, selective);
  std::int64_t required = used.vec.bram_bits;
  if (used.ram.alpha_capped)
    required = used.ram.io_buffers + used.ram.fifo_bits + used.ram.working_bits +
               used.ram.weight_buffer;
  const std::int64_t leftover = std::max<std::int64_t>(0, platform.cfpga_bits - required);

  for (const LayerSpec& layer : scheduled.layers) {
    LayerTiming lt;
    lt.name = layer.name;
    lt.workload = to_workload(layer);

    MemCycles mc = t_mem_cycles(lt.workload, sigma, platform);
    lt.t_mem_in = mc.t_in;
    lt.t_mem_out = mc.t_out;

    const bool streams_weights =
        variant == Variant::baseline || layer.repr_mode == ReprMode::bypass;
    if (streams_weights) {
      const std::int64_t wbits = lt.workload.p * lt.workload.c * platform.wl;
      if (wbits <= leftover) {
        lt.weights_cached = true;
        lt.upfront = transfer_cycles_in(lt.workload.p * lt.workload.c * wl_bytes(platform),
                                        platform);
      } else {
        // Re-stream the padded weight strip for every output tile.
        const std::int64_t strip_bytes =
            ceil_div(lt.workload.p, sigma.t_p) * sigma.t_p * sigma.t_c * wl_bytes(platform);
        lt.t_mem_in += transfer_cycles_in(strip_bytes, platform);
      }
    } else {
      lt.t_wgen = t_wgen_cycles(layer, sigma);
    }

    lt.t_eng = selective ? cycles_selective(lt.workload, sigma)
                         : cycles_baseline(lt.workload, sigma);

    lt.ii = std::max({lt.t_mem_in, lt.t_wgen, lt.t_eng, lt.t_mem_out});
    lt.tiles = ceil_div(lt.workload.r, sigma.t_r) * ceil_div(lt.workload.c, sigma.t_c);
    lt.t_total = lt.ii * lt.tiles + lt.upfront;

    if (lt.ii == lt.t_mem_in)
      lt.bottleneck = "mem_in";
    else if (lt.ii == lt.t_wgen)
      lt.bottleneck = "wgen";
    else if (lt.ii == lt.t_eng)
      lt.bottleneck = "eng";
    else
      lt.bottleneck = "mem_out";

    pe.total_cycles += lt.t_total;
    pe.layers.push_back(std::move(lt));
  }

  if (pe.total_cycles > 0)
    pe.throughput = static_cast<double>(freq_hz(platform)) / static_cast<double>(pe.total_cycles);
  return pe;
}

std::string report_csv(const PerformanceEstimate& pe) {
  std::ostringstream os;
  os << "layer,r,p,c,t_mem_in,t_wgen,t_eng,t_mem_out,ii,tiles,upfront,t_total,bottleneck\n";
  for (const LayerTiming& lt : pe.layers)
    os << lt.name << "," << lt.workload.r << "," << lt.workload.p << "," << lt.workload.c << ","
       << lt.t_mem_in << "," << lt.t_wgen << "," << lt.t_eng << "," << lt.t_mem_out << ","
       << lt.ii << "," << lt.tiles << "," << lt.upfront << "," << lt.t_total << ","
       << lt.bottleneck << "\n";
  os << "total_cycles," << pe.total_cycles << "\n";
  os << std::setprecision(6) << std::fixed << "throughput_inf_s," << pe.throughput << "\n";
  return os.str();
}

std::string report_markdown(const PerformanceEstimate& pe) {
  std::ostringstream os;
  os << "| layer | R | P | C | t_in | t_wgen | t_eng | t_out | II | tiles | total | bottleneck |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const LayerTiming& lt : pe.layers)
    os << "| " << lt.name << " | " << lt.workload.r << " | " << lt.workload.p << " | "
       << lt.workload.c << " | " << lt.t_mem_in << " | " << lt.t_wgen << " | " << lt.t_eng
       << " | " << lt.t_mem_out << " | " << lt.ii << " | " << lt.tiles << " | " << lt.t_total
       << " | " << lt.bottleneck << " |\n";
  os << "\nTotal cycles: " << pe.total_cycles << "  \n";
  os << std::setprecision(2) << std::fixed << "Throughput: " << pe.throughput << " inf/s\n";
  return os.str();
}

}  // namespace ovgen
