// Analytical performance model: per-layer stage cycles, initiation interval
// of the load/compute/store pipeline, and network throughput.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ovgen/engine.hpp"
#include "ovgen/model.hpp"
#include "ovgen/resources.hpp"

namespace ovgen {

struct LayerTiming {
  std::string name;
  WorkloadTuple workload;
  std::int64_t t_mem_in = 0;   // input activations (+ weight strip when streamed)
  std::int64_t t_wgen = 0;     // on-chip weights generation per output tile
  std::int64_t t_eng = 0;      // PE-array compute per output tile
  std::int64_t t_mem_out = 0;  // output activations
  std::int64_t ii = 0;         // initiation interval = max of the stages
  std::int64_t tiles = 0;      // output tiles = ceil(R/T_R) * ceil(C/T_C)
  std::int64_t upfront = 0;    // once-per-inference weights load when cached
  std::int64_t t_total = 0;    // ii * tiles + upfront
  bool weights_cached = false;
  std::string bottleneck;      // "mem_in" | "wgen" | "eng" | "mem_out"
};

struct PerformanceEstimate {
  DesignPoint sigma;
  Variant variant = Variant::unzip;
  bool selective = false;
  std::vector<LayerTiming> layers;
  std::int64_t total_cycles = 0;
  double throughput = 0.0;  // inferences per second
};

// Weights-generation cycles for one output tile: J * ceil(T_P*T_C/M) *
// ceil(P/T_P). Zero for bypass layers.
std::int64_t t_wgen_cycles(const LayerSpec& layer, const DesignPoint& sigma);

struct MemCycles {
  std::int64_t t_in = 0;
  std::int64_t t_out = 0;
};

// Activation transfer cycles for one output tile at the platform's
// bandwidth: in = T_R*P*WL bytes, out = T_R*T_C*WL bytes, whole cycles.
MemCycles t_mem_cycles(const WorkloadTuple& w, const DesignPoint& sigma,
                       const PlatformSpec& platform);

// Transfer cycles for `bytes` at the inbound bandwidth (integer ceiling).
std::int64_t transfer_cycles_in(std::int64_t bytes, const PlatformSpec& platform);

// Full-network estimate. Bypass layers (and every layer in the baseline
// variant) stream weights: when a layer's full weight set fits in the RAM
// left over by usage(), it loads once per inference; otherwise each output
// tile re-streams its weight strip on top of t_mem_in.
PerformanceEstimate estimate(const ModelSpec& scheduled, const DesignPoint& sigma,
                             const PlatformSpec& platform, Variant variant, bool selective);

std::string report_csv(const PerformanceEstimate& pe);
std::string report_markdown(const PerformanceEstimate& pe);

}  // namespace ovgen
