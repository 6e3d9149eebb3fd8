// CNN model, platform, and ratio-schedule descriptions plus the mapping from
// layers to GEMM workload shapes.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ovgen/common.hpp"
#include "ovgen/compress.hpp"

namespace ovgen {

enum class LayerKind { conv, fc };

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::conv;
  int n_in = 1;
  int n_out = 1;
  int k = 1;        // kernel size (fc: unused, treated as 1)
  int h = 1;        // input spatial dims
  int w = 1;
  int s = 1;        // stride
  int p = 0;        // padding
  double rho = 1.0;
  ReprMode repr_mode = ReprMode::bypass;
  bool has_bias = false;
  // Ratio-schedule group this layer belongs to; -1 means never compressed
  // (stem convs, 1x1 convs, fc).
  int group = -1;

  void validate() const;
  // Basis length the layer would use when compressed.
  int basis_len() const { return (repr_mode == ReprMode::direct) ? k * k : 16; }
  // Retained basis count J = ceil(rho * L); 0 for bypass layers.
  int retained_count() const;
  // Slice length seen by the weights generator (k*k for direct, 9 for crop/pool).
  int effective_q() const { return (repr_mode == ReprMode::direct) ? k * k : 9; }
  std::int64_t weight_count() const;  // includes bias when present
};

struct ModelSpec {
  std::string name;
  std::vector<LayerSpec> layers;

  void validate() const;
  // Max kernel-representation size over compressed layers (k, or 4 for
  // crop/pool modes); 1 when nothing is compressed.
  int k_max() const;
  bool any_compressed() const;
};

struct WorkloadTuple {
  std::int64_t r = 1;
  std::int64_t p = 1;
  std::int64_t c = 1;
};

// GEMM shape of a layer: R output positions (ceiling form), P = N_in*K^2
// unrolled patch length, C = N_out. FC maps to <1, N_in, N_out>.
WorkloadTuple to_workload(const LayerSpec& layer);

struct LutModel {
  // luts = c0 + c1*M + c2*T_P*T_C + c3*|augmented PE set|.
  double c0 = 30000.0;
  double c1 = 60.0;
  double c2 = 70.0;
  double c3 = 8.0;
  bool enforce = true;
  bool synthetic = true;  // placeholder coefficients, flagged in reports
};

struct PlatformSpec {
  std::string name;
  double freq_mhz = 150.0;
  std::int64_t dsp = 900;
  int d_mac = 1;  // DSPs per MAC operator
  std::int64_t cfpga_bits = 0;   // on-chip RAM capacity
  std::int64_t lut_capacity = 0;
  double bw_in_gbs = 1.1;
  double bw_out_gbs = 1.1;
  int wl = 16;  // operand wordlength in bits
  LutModel lut;

  void validate() const;
  double bytes_per_cycle_in() const { return bw_in_gbs * 1e9 / (freq_mhz * 1e6); }
  double bytes_per_cycle_out() const { return bw_out_gbs * 1e9 / (freq_mhz * 1e6); }
};

struct RatioSchedule {
  std::string name;
  // One ratio per layer group (residual stage / Fire-module pair).
  std::vector<double> ratios;
  ReprMode mode_3x3 = ReprMode::crop4;
  // When true, 3x3 convs outside any group (e.g. a 3x3 stem) join group 0.
  bool include_ungrouped_3x3 = false;
  // All-bypass marker: every layer streams raw weights (baseline networks).
  bool all_bypass = false;
};

// Returns a copy of `model` with rho/repr_mode assigned per the schedule.
ModelSpec apply_schedule(const ModelSpec& model, const RatioSchedule& schedule);

struct ParamCounts {
  std::int64_t original = 0;
  std::int64_t compressed = 0;
};

// Weight + bias counts before and after compression; compressed layers
// contribute n_in * n_out * J (+ bias).
ParamCounts count_params(const ModelSpec& model, const RatioSchedule& schedule);
ParamCounts count_params(const ModelSpec& scheduled_model);

// JSON (de)serialization for the three spec types.
std::string serialize_model(const ModelSpec& model);
ModelSpec parse_model(const std::string& text);
std::string serialize_platform(const PlatformSpec& platform);
PlatformSpec parse_platform(const std::string& text);
std::string serialize_schedule(const RatioSchedule& schedule);
RatioSchedule parse_schedule(const std::string& text);

ModelSpec load_model_file(const std::string& path);
PlatformSpec load_platform_file(const std::string& path);
RatioSchedule load_schedule_file(const std::string& path);

}  // namespace ovgen
