// Filter compression into OVSF-basis coefficient form: per-slice projection,
// 3x3 handling via crop/pool mapping to a 4x4 representation, greedy shared
// basis truncation, quantization, and parameter counting.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ovgen/basis.hpp"
#include "ovgen/common.hpp"
#include "ovgen/fixed.hpp"

namespace ovgen {

enum class ReprMode { direct, crop4, pool4, bypass };
enum class SelectionMode { shared, per_filter };

const char* to_string(ReprMode mode);
ReprMode repr_mode_from_string(const std::string& s);

// Dense conv weights, shape (n_out, n_in, k, k), row-major.
struct FilterBank {
  int n_out = 0;
  int n_in = 0;
  int k = 0;
  std::vector<float> data;

  static FilterBank zeros(int n_out, int n_in, int k);
  float& at(int co, int ci, int r, int c) {
    return data[((static_cast<std::size_t>(co) * n_in + ci) * k + r) * k + c];
  }
  float at(int co, int ci, int r, int c) const {
    return data[((static_cast<std::size_t>(co) * n_in + ci) * k + r) * k + c];
  }
  const float* slice(int co, int ci) const {
    return &data[(static_cast<std::size_t>(co) * n_in + ci) * k * k];
  }
  void validate() const;
};

// Linear map from the 4x4 representation domain to a 3x3 filter: crop4 rows
// are one-hot selectors, pool4 rows are adaptive-average-pool windows.
struct ReprOperator {
  ReprMode mode = ReprMode::crop4;
  // 9 x 16 row-major.
  std::vector<double> a;
  double at(int row, int col) const { return a[static_cast<std::size_t>(row) * 16 + col]; }
};

struct QuantInfo {
  int word_length = 16;
  int frac_bits = 8;
  std::int64_t saturated = 0;
};

// One layer in coefficient form. alphas is indexed [c_in][c_out][j] with j
// running over retained_indices order; bypass layers carry raw weights instead.
struct CompressedLayer {
  int layer_id = 0;
  std::string name;
  ReprMode repr_mode = ReprMode::direct;
  SelectionMode selection = SelectionMode::shared;
  int basis_len = 0;  // L: k*k for direct, 16 for crop4/pool4
  double ratio = 1.0;
  int retained_count = 0;  // J
  std::vector<int> retained_indices;                   // shared mode, ascending
  std::vector<std::vector<int>> per_filter_indices;    // per_filter mode, [ci*n_out+co]
  int n_in = 0;
  int n_out = 0;
  int k = 0;  // original kernel size
  std::vector<double> alphas;        // [c_in][c_out][J]
  std::optional<QuantInfo> quant;
  std::vector<std::int32_t> qalphas;  // same layout as alphas when quantized
  FilterBank raw;                     // bypass payload

  double alpha(int ci, int co, int j) const {
    return alphas[(static_cast<std::size_t>(ci) * n_out + co) * retained_count + j];
  }
  std::int32_t qalpha(int ci, int co, int j) const {
    return qalphas[(static_cast<std::size_t>(ci) * n_out + co) * retained_count + j];
  }
  // Slice length seen by the weights generator: k*k for direct, 9 for crop/pool.
  int effective_q() const;
  void validate() const;
};

struct CompressedModel {
  std::string model_name;
  std::vector<CompressedLayer> layers;
};

// Exact least squares by orthogonality: alpha = (1/L) * B * slice.
std::vector<double> slice_project(const std::vector<double>& slice, const OvsfBasis& basis);

ReprOperator build_repr_operator(ReprMode mode);

// Fit a 3x3 filter in the 16-length basis. crop4 zero-pads to 4x4 and projects
// (exact at full rank); pool4 solves the ridge-regularized normal equations
// of min ||A B^T alpha - f||^2 with lambda = 1e-8.
std::vector<double> fit_slice_3x3(const std::vector<double>& f3x3, const ReprOperator& op,
                                  const OvsfBasis& basis16);

// Keep the `keep` basis indices with the largest aggregate |alpha| over all
// slices, iteratively discarding the smallest (ties: lowest index first).
// Returns the surviving indices in ascending order.
std::vector<int> greedy_select(const std::vector<std::vector<double>>& slice_alphas, int keep);

CompressedLayer compress_layer(const FilterBank& weights, double ratio, ReprMode mode,
                               SelectionMode selection = SelectionMode::shared);
FilterBank reconstruct_layer(const CompressedLayer& layer, const OvsfBasis& basis);

CompressedLayer quantize_alphas(const CompressedLayer& layer, int word_length, int frac_bits);

// Round-trip container for compressed models (binary, checksummed).
void write_compressed(const std::string& path, const CompressedModel& model);
CompressedModel read_compressed(const std::string& path);

}  // namespace ovgen
