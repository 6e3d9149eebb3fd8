#include "ovgen/compress.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "binio.hpp"

namespace ovgen {

const char* to_string(ReprMode mode) {
  switch (mode) {
    case ReprMode::direct: return "direct";
    case ReprMode::crop4: return "crop4";
    case ReprMode::pool4: return "pool4";
    case ReprMode::bypass: return "bypass";
  }
  return "?";
}

ReprMode repr_mode_from_string(const std::string& s) {
  if (s == "direct") return ReprMode::direct;
  if (s == "crop4") return ReprMode::crop4;
  if (s == "pool4") return ReprMode::pool4;
  if (s == "bypass") return ReprMode::bypass;
  throw config_error("unknown repr mode: " + s);
}

FilterBank FilterBank::zeros(int n_out, int n_in, int k) {
  FilterBank fb;
  fb.n_out = n_out;
  fb.n_in = n_in;
  fb.k = k;
  fb.data.assign(static_cast<std::size_t>(n_out) * n_in * k * k, 0.0f);
  return fb;
}

void FilterBank::validate() const {
  if (n_out < 1 || n_in < 1 || k < 1)
    throw validation_error("filter bank dims must be >= 1");
  if (data.size() != static_cast<std::size_t>(n_out) * n_in * k * k)
    throw validation_error("filter bank data size does not match shape");
  for (float v : data)
    if (!std::isfinite(v)) throw validation_error("filter bank contains non-finite values");
}

int CompressedLayer::effective_q() const {
  if (repr_mode == ReprMode::crop4 || repr_mode == ReprMode::pool4) return 9;
  return k * k;
}

void CompressedLayer::validate() const {
  if (repr_mode == ReprMode::bypass) {
    if (!alphas.empty()) throw validation_error("bypass layer must not carry alphas");
    return;
  }
  if (retained_count < 1 || retained_count > basis_len)
    throw validation_error("retained count out of range");
  if (selection == SelectionMode::shared) {
    if (static_cast<int>(retained_indices.size()) != retained_count)
      throw validation_error("retained index count mismatch");
    for (std::size_t i = 0; i < retained_indices.size(); ++i) {
      if (retained_indices[i] < 0 || retained_indices[i] >= basis_len)
        throw validation_error("retained index out of range");
      if (i > 0 && retained_indices[i] <= retained_indices[i - 1])
        throw validation_error("retained indices must be strictly ascending");
    }
  }
  std::size_t expect = static_cast<std::size_t>(n_in) * n_out * retained_count;
  if (alphas.size() != expect) throw validation_error("alpha array size mismatch");
  if (quant && qalphas.size() != expect)
    throw validation_error("quantized alpha array size mismatch");
}

std::vector<double> slice_project(const std::vector<double>& slice, const OvsfBasis& basis) {
  int len = basis.length();
  if (static_cast<int>(slice.size()) != len)
    throw validation_error("slice length does not match basis length");
  std::vector<double> alpha(static_cast<std::size_t>(len), 0.0);
  for (int j = 0; j < len; ++j) {
    const PackedCode& row = basis.packed_row(j);
    double acc = 0.0;
    for (int i = 0; i < len; ++i)
      acc += row.bit(i) ? -slice[static_cast<std::size_t>(i)] : slice[static_cast<std::size_t>(i)];
    alpha[static_cast<std::size_t>(j)] = acc / len;
  }
  return alpha;
}

ReprOperator build_repr_operator(ReprMode mode) {
  if (mode != ReprMode::crop4 && mode != ReprMode::pool4)
    throw config_error("repr operator exists only for crop4/pool4");
  ReprOperator op;
  op.mode = mode;
  op.a.assign(9 * 16, 0.0);
  if (mode == ReprMode::crop4) {
    // Output (r, c) selects input position (r, c) of the 4x4 grid.
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        op.a[static_cast<std::size_t>(r * 3 + c) * 16 + (r * 4 + c)] = 1.0;
  } else {
    // Adaptive average pooling 4 -> 3: output i covers input rows
    // [floor(4i/3), ceil(4(i+1)/3) - 1], likewise for columns.
    for (int i = 0; i < 3; ++i) {
      int r0 = (4 * i) / 3;
      int r1 = (4 * (i + 1) + 2) / 3 - 1;
      for (int j = 0; j < 3; ++j) {
        int c0 = (4 * j) / 3;
        int c1 = (4 * (j + 1) + 2) / 3 - 1;
        double w = 1.0 / ((r1 - r0 + 1) * (c1 - c0 + 1));
        for (int r = r0; r <= r1; ++r)
          for (int c = c0; c <= c1; ++c)
            op.a[static_cast<std::size_t>(i * 3 + j) * 16 + (r * 4 + c)] = w;
      }
    }
  }
  return op;
}

std::vector<double> fit_slice_3x3(const std::vector<double>& f3x3, const ReprOperator& op,
                                  const OvsfBasis& basis16) {
  if (f3x3.size() != 9) throw validation_error("fit_slice_3x3 expects a 9-element target");
  if (basis16.length() != 16) throw validation_error("fit_slice_3x3 expects a length-16 basis");

  if (op.mode == ReprMode::crop4) {
    // Zero-pad into the 4x4 domain (row 3 and column 3 are zero) and project.
    std::vector<double> padded(16, 0.0);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        padded[static_cast<std::size_t>(r * 4 + c)] = f3x3[static_cast<std::size_t>(r * 3 + c)];
    return slice_project(padded, basis16);
  }

  // pool4: minimize ||A B^T alpha - f||^2 + lambda ||alpha||^2.
  Eigen::MatrixXd m(9, 16);
  for (int r = 0; r < 9; ++r)
    for (int j = 0; j < 16; ++j) {
      double acc = 0.0;
      for (int i = 0; i < 16; ++i)
        acc += op.at(r, i) * basis16.entry(j, i);
      m(r, j) = acc;
    }
  Eigen::VectorXd f(9);
  for (int r = 0; r < 9; ++r) f(r) = f3x3[static_cast<std::size_t>(r)];
  const double lambda = 1e-8;
  Eigen::MatrixXd lhs = m.transpose() * m + lambda * Eigen::MatrixXd::Identity(16, 16);
  Eigen::LLT<Eigen::MatrixXd> llt(lhs);
  if (llt.info() != Eigen::Success)
    throw numeric_error("pool4 normal equations not positive definite");
  Eigen::VectorXd alpha = llt.solve(m.transpose() * f);
  return std::vector<double>(alpha.data(), alpha.data() + 16);
}

std::vector<int> greedy_select(const std::vector<std::vector<double>>& slice_alphas, int keep) {
  if (slice_alphas.empty()) throw validation_error("greedy_select needs at least one slice");
  int len = static_cast<int>(slice_alphas.front().size());
  if (keep < 1 || keep > len) throw config_error("greedy_select keep count out of range");

  std::vector<double> score(static_cast<std::size_t>(len), 0.0);
  for (const auto& a : slice_alphas) {
    if (static_cast<int>(a.size()) != len)
      throw validation_error("slice alpha lengths differ");
    for (int j = 0; j < len; ++j) score[static_cast<std::size_t>(j)] += std::abs(a[static_cast<std::size_t>(j)]);
  }

  // Iteratively discard the index with the smallest aggregate mass; on ties
  // the lowest index goes first. Equivalent to one pass, but kept explicit
  // to mirror the documented procedure.
  std::vector<bool> alive(static_cast<std::size_t>(len), true);
  for (int remaining = len; remaining > keep; --remaining) {
    int victim = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < len; ++j)
      if (alive[static_cast<std::size_t>(j)] && score[static_cast<std::size_t>(j)] < best) {
        best = score[static_cast<std::size_t>(j)];
        victim = j;
      }
    alive[static_cast<std::size_t>(victim)] = false;
  }
  std::vector<int> kept;
  kept.reserve(static_cast<std::size_t>(keep));
  for (int j = 0; j < len; ++j)
    if (alive[static_cast<std::size_t>(j)]) kept.push_back(j);
  return kept;
}

CompressedLayer compress_layer(const FilterBank& weights, double ratio, ReprMode mode,
                               SelectionMode selection) {
  weights.validate();
  if (ratio <= 0.0 || ratio > 1.0) throw config_error("ratio must be in (0, 1]");

  CompressedLayer cl;
  cl.repr_mode = mode;
  cl.selection = selection;
  cl.ratio = ratio;
  cl.n_in = weights.n_in;
  cl.n_out = weights.n_out;
  cl.k = weights.k;

  if (mode == ReprMode::bypass) {
    cl.raw = weights;
    cl.basis_len = 0;
    cl.retained_count = 0;
    return cl;
  }

  int kk = weights.k * weights.k;
  if (mode == ReprMode::direct) {
    if (!is_pow2(kk))
      throw config_error("direct mode requires K^2 to be a power of two, got K=" +
                         std::to_string(weights.k));
    cl.basis_len = kk;
  } else {
    if (weights.k != 3) throw config_error("crop4/pool4 modes require K=3");
    cl.basis_len = 16;
  }

  int order = 0;
  while ((1 << order) < cl.basis_len) ++order;
  OvsfBasis basis = build_basis(order);
  ReprOperator op;
  if (mode != ReprMode::direct) op = build_repr_operator(mode);

  // Full-basis coefficients per (c_in, c_out) slice.
  std::vector<std::vector<double>> full(static_cast<std::size_t>(weights.n_in) * weights.n_out);
  for (int ci = 0; ci < weights.n_in; ++ci)
    for (int co = 0; co < weights.n_out; ++co) {
      std::vector<double> target(static_cast<std::size_t>(kk));
      const float* s = weights.slice(co, ci);
      for (int i = 0; i < kk; ++i) target[static_cast<std::size_t>(i)] = s[i];
      std::size_t idx = static_cast<std::size_t>(ci) * weights.n_out + co;
      full[idx] = (mode == ReprMode::direct) ? slice_project(target, basis)
                                             : fit_slice_3x3(target, op, basis);
    }

  // J = ceil(ratio * L); the tiny epsilon guards against FP noise in ratios
  // like 0.5 * 16 landing at 8.000000001.
  cl.retained_count = static_cast<int>(std::ceil(ratio * cl.basis_len - 1e-9));
  if (cl.retained_count < 1) cl.retained_count = 1;

  std::size_t n_slices = full.size();
  cl.alphas.assign(n_slices * static_cast<std::size_t>(cl.retained_count), 0.0);

  if (selection == SelectionMode::shared) {
    cl.retained_indices = greedy_select(full, cl.retained_count);
    for (std::size_t s = 0; s < n_slices; ++s)
      for (int j = 0; j < cl.retained_count; ++j)
        cl.alphas[s * cl.retained_count + j] =
            full[s][static_cast<std::size_t>(cl.retained_indices[static_cast<std::size_t>(j)])];
  } else {
    cl.per_filter_indices.resize(n_slices);
    for (std::size_t s = 0; s < n_slices; ++s) {
      cl.per_filter_indices[s] = greedy_select({full[s]}, cl.retained_count);
      for (int j = 0; j < cl.retained_count; ++j)
        cl.alphas[s * cl.retained_count + j] =
            full[s][static_cast<std::size_t>(cl.per_filter_indices[s][static_cast<std::size_t>(j)])];
    }
  }
  return cl;
}

FilterBank reconstruct_layer(const CompressedLayer& layer, const OvsfBasis& basis) {
  layer.validate();
  if (layer.repr_mode == ReprMode::bypass) return layer.raw;
  if (basis.length() != layer.basis_len)
    throw validation_error("basis length does not match layer basis_len");

  ReprOperator op;
  if (layer.repr_mode != ReprMode::direct) op = build_repr_operator(layer.repr_mode);

  FilterBank out = FilterBank::zeros(layer.n_out, layer.n_in, layer.k);
  int kk = layer.k * layer.k;
  std::vector<double> rep(static_cast<std::size_t>(layer.basis_len));
  for (int ci = 0; ci < layer.n_in; ++ci)
    for (int co = 0; co < layer.n_out; ++co) {
      std::fill(rep.begin(), rep.end(), 0.0);
      std::size_t s = static_cast<std::size_t>(ci) * layer.n_out + co;
      const std::vector<int>& idx = (layer.selection == SelectionMode::shared)
                                        ? layer.retained_indices
                                        : layer.per_filter_indices[s];
      for (int j = 0; j < layer.retained_count; ++j) {
        double a = layer.alphas[s * layer.retained_count + j];
        const PackedCode& row = basis.packed_row(idx[static_cast<std::size_t>(j)]);
        for (int i = 0; i < layer.basis_len; ++i)
          rep[static_cast<std::size_t>(i)] += row.bit(i) ? -a : a;
      }
      if (layer.repr_mode == ReprMode::direct) {
        for (int i = 0; i < kk; ++i)
          out.data[(static_cast<std::size_t>(co) * layer.n_in + ci) * kk + i] =
              static_cast<float>(rep[static_cast<std::size_t>(i)]);
      } else {
        // Map the 4x4 representation back to 3x3 through the operator rows.
        for (int r = 0; r < 9; ++r) {
          double acc = 0.0;
          for (int i = 0; i < 16; ++i) acc += op.at(r, i) * rep[static_cast<std::size_t>(i)];
          out.data[(static_cast<std::size_t>(co) * layer.n_in + ci) * 9 + r] =
              static_cast<float>(acc);
        }
      }
    }
  return out;
}

CompressedLayer quantize_alphas(const CompressedLayer& layer, int word_length, int frac_bits) {
  if (frac_bits < 1 || frac_bits >= word_length || word_length > 32)
    throw config_error("quantization requires 1 <= frac_bits < word_length <= 32");
  CompressedLayer q = layer;
  if (layer.repr_mode == ReprMode::bypass) return q;
  QuantSpec spec{word_length, frac_bits};
  QuantInfo info{word_length, frac_bits, 0};
  q.qalphas.assign(layer.alphas.size(), 0);
  for (std::size_t i = 0; i < layer.alphas.size(); ++i) {
    q.qalphas[i] = quantize_value(layer.alphas[i], spec, &info.saturated);
    // Keep the real-valued view consistent with what the hardware would use.
    q.alphas[i] = dequantize_value(q.qalphas[i], spec);
  }
  q.quant = info;
  return q;
}

namespace {

constexpr char kCompressedMagic[4] = {'O', 'V', 'C', 'M'};
constexpr std::uint32_t kCompressedVersion = 1;

}  // namespace

void write_compressed(const std::string& path, const CompressedModel& model) {
  detail::ByteWriter w;
  w.raw(kCompressedMagic, 4);
  w.u32(kCompressedVersion);
  w.str(model.model_name);
  w.u32(static_cast<std::uint32_t>(model.layers.size()));
  for (const CompressedLayer& l : model.layers) {
    w.i32(l.layer_id);
    w.str(l.name);
    w.u8(static_cast<std::uint8_t>(l.repr_mode));
    w.u8(static_cast<std::uint8_t>(l.selection));
    w.i32(l.basis_len);
    w.f64(l.ratio);
    w.i32(l.retained_count);
    w.i32(l.n_in);
    w.i32(l.n_out);
    w.i32(l.k);
    w.u32(static_cast<std::uint32_t>(l.retained_indices.size()));
    for (int idx : l.retained_indices) w.i32(idx);
    w.u32(static_cast<std::uint32_t>(l.per_filter_indices.size()));
    for (const auto& per : l.per_filter_indices) {
      w.u32(static_cast<std::uint32_t>(per.size()));
      for (int idx : per) w.i32(idx);
    }
    w.u64(l.alphas.size());
    for (double a : l.alphas) w.f64(a);
    w.u8(l.quant ? 1 : 0);
    if (l.quant) {
      w.i32(l.quant->word_length);
      w.i32(l.quant->frac_bits);
      w.i64(l.quant->saturated);
      w.u64(l.qalphas.size());
      for (std::int32_t qa : l.qalphas) w.i32(qa);
    }
    bool has_raw = l.repr_mode == ReprMode::bypass;
    w.u8(has_raw ? 1 : 0);
    if (has_raw) {
      w.i32(l.raw.n_out);
      w.i32(l.raw.n_in);
      w.i32(l.raw.k);
      for (float v : l.raw.data) w.f32(v);
    }
  }
  detail::write_file_with_crc(path, w.buf);
}

CompressedModel read_compressed(const std::string& path) {
  std::string payload = detail::read_file_with_crc(path);
  detail::ByteReader r(payload);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kCompressedMagic, 4) != 0)
    throw parse_error("bad magic in compressed container: " + path);
  if (r.u32() != kCompressedVersion)
    throw parse_error("unsupported compressed container version: " + path);

  CompressedModel model;
  model.model_name = r.str();
  std::uint32_t n_layers = r.u32();
  model.layers.reserve(n_layers);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    CompressedLayer l;
    l.layer_id = r.i32();
    l.name = r.str();
    l.repr_mode = static_cast<ReprMode>(r.u8());
    l.selection = static_cast<SelectionMode>(r.u8());
    l.basis_len = r.i32();
    l.ratio = r.f64();
    l.retained_count = r.i32();
    l.n_in = r.i32();
    l.n_out = r.i32();
    l.k = r.i32();
    std::uint32_t n_idx = r.u32();
    l.retained_indices.resize(n_idx);
    for (std::uint32_t j = 0; j < n_idx; ++j) l.retained_indices[j] = r.i32();
    std::uint32_t n_pf = r.u32();
    l.per_filter_indices.resize(n_pf);
    for (std::uint32_t s = 0; s < n_pf; ++s) {
      std::uint32_t cnt = r.u32();
      l.per_filter_indices[s].resize(cnt);
      for (std::uint32_t j = 0; j < cnt; ++j) l.per_filter_indices[s][j] = r.i32();
    }
    std::uint64_t n_alpha = r.u64();
    l.alphas.resize(n_alpha);
    for (std::uint64_t j = 0; j < n_alpha; ++j) l.alphas[j] = r.f64();
    if (r.u8()) {
      QuantInfo q;
      q.word_length = r.i32();
      q.frac_bits = r.i32();
      q.saturated = r.i64();
      l.quant = q;
      std::uint64_t n_q = r.u64();
      l.qalphas.resize(n_q);
      for (std::uint64_t j = 0; j < n_q; ++j) l.qalphas[j] = r.i32();
    }
    if (r.u8()) {
      l.raw.n_out = r.i32();
      l.raw.n_in = r.i32();
      l.raw.k = r.i32();
      l.raw.data.resize(static_cast<std::size_t>(l.raw.n_out) * l.raw.n_in * l.raw.k * l.raw.k);
      for (float& v : l.raw.data) v = r.f32();
    }
    model.layers.push_back(std::move(l));
  }
  return model;
}

}  // namespace ovgen
