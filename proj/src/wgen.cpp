#include "ovgen/wgen.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>

#include "ovgen/fixed.hpp"

namespace ovgen {

std::int64_t filters_per_subtile(std::int64_t m, std::int64_t t_p, std::int64_t kmax_sq) {
  if (m < 1 || t_p < 1 || kmax_sq < 1)
    throw config_error("filters_per_subtile arguments must be >= 1");
  return ceil_div(std::min(t_p, m), kmax_sq) * (m / t_p) + (m % t_p) * ceil_div(m, kmax_sq);
}

std::int64_t layer_alpha_count(const LayerSpec& layer) {
  if (layer.repr_mode == ReprMode::bypass) return 0;
  return static_cast<std::int64_t>(layer.n_in) * layer.n_out * layer.retained_count();
}

AlphaBufferGeom alpha_geometry(const ModelSpec& scheduled, const DesignPoint& sigma) {
  sigma.validate();
  AlphaBufferGeom geom;
  std::int64_t kmax = scheduled.k_max();
  geom.n_f = filters_per_subtile(sigma.m, sigma.t_p, kmax * kmax);
  for (const LayerSpec& l : scheduled.layers) geom.total_alphas += layer_alpha_count(l);
  geom.depth = geom.total_alphas > 0 ? ceil_div(geom.total_alphas, geom.n_f) : 0;
  return geom;
}

PackedCode rotate_code(const PackedCode& v, int r) {
  PackedCode out = make_packed(v.length);
  for (int i = 0; i < v.length; ++i) out.set_bit(i, v.bit((i + r) % v.length));
  return out;
}

AlignerResult aligner_step(const PackedCode& v, int m) {
  if (m < 1) throw config_error("aligner read width must be >= 1");
  AlignerResult res;
  res.out = make_packed(m);
  for (int i = 0; i < m; ++i) res.out.set_bit(i, v.bit(i % v.length));
  res.writeback = rotate_code(v, m % v.length);
  return res;
}

namespace {

// Flat 4x4 positions kept by the 3x3 crop (rows/cols 0..2).
constexpr int kCropIdx[9] = {0, 1, 2, 4, 5, 6, 8, 9, 10};

struct EffectiveCodes {
  int q = 0;
  bool is_real = false;
  std::vector<PackedCode> packed;             // one per retained index
  std::vector<std::vector<double>> real;      // pool4 effective codes
};

void check_mappable(const CompressedLayer& cl, NumericMode mode) {
  cl.validate();
  if (cl.repr_mode == ReprMode::bypass)
    throw validation_error("bypass layers do not use the weights generator");
  if (cl.selection == SelectionMode::per_filter)
    throw validation_error("per-filter basis selection is not hardware-mappable");
  if (mode == NumericMode::fixed16 && !cl.quant)
    throw validation_error("fixed16 mode requires quantized alphas");
  if (mode == NumericMode::fixed16 && cl.repr_mode == ReprMode::pool4)
    throw validation_error("pool4 layers run in functional float mode only");
}

EffectiveCodes build_effective_codes(const CompressedLayer& cl) {
  int order = 0;
  while ((1 << order) < cl.basis_len) ++order;
  OvsfBasis basis = build_basis(order);

  EffectiveCodes ec;
  ec.q = cl.effective_q();
  if (cl.repr_mode == ReprMode::direct) {
    for (int idx : cl.retained_indices) ec.packed.push_back(basis.packed_row(idx));
  } else if (cl.repr_mode == ReprMode::crop4) {
    // The crop is linear, so it folds into the stored code images.
    for (int idx : cl.retained_indices) {
      PackedCode pc = make_packed(9);
      for (int i = 0; i < 9; ++i)
        pc.set_bit(i, basis.packed_row(idx).bit(kCropIdx[i]));
      ec.packed.push_back(pc);
    }
  } else {
    ec.is_real = true;
    ReprOperator op = build_repr_operator(ReprMode::pool4);
    for (int idx : cl.retained_indices) {
      std::vector<double> code(9, 0.0);
      for (int r = 0; r < 9; ++r) {
        double acc = 0.0;
        for (int i = 0; i < 16; ++i) acc += op.at(r, i) * basis.entry(idx, i);
        code[static_cast<std::size_t>(r)] = acc;
      }
      ec.real.push_back(std::move(code));
    }
  }
  return ec;
}

WeightMatrix make_matrix(std::int64_t rows, std::int64_t cols, NumericMode mode) {
  WeightMatrix wm;
  wm.rows = rows;
  wm.cols = cols;
  wm.mode = mode;
  if (mode == NumericMode::flt)
    wm.fval.assign(static_cast<std::size_t>(rows * cols), 0.0);
  else
    wm.ival.assign(static_cast<std::size_t>(rows * cols), 0);
  return wm;
}

// Column segments of subtile s inside a T_P x T_C tile traversed column-major
// along P: element e maps to (row = e % T_P, col = e / T_P).
struct Segment {
  std::int64_t col = 0;
  std::int64_t row0 = 0;
  std::int64_t len = 0;
};

std::vector<Segment> subtile_segments(std::int64_t s, std::int64_t m, std::int64_t t_p,
                                      std::int64_t tile_elems) {
  std::vector<Segment> segs;
  std::int64_t e = s * m;
  std::int64_t end = std::min(e + m, tile_elems);
  while (e < end) {
    Segment seg;
    seg.col = e / t_p;
    seg.row0 = e % t_p;
    seg.len = std::min(t_p - seg.row0, end - e);
    segs.push_back(seg);
    e += seg.len;
  }
  return segs;
}

}  // namespace

WeightMatrix dense_weight_matrix(const CompressedLayer& cl, NumericMode mode) {
  check_mappable(cl, mode);
  EffectiveCodes ec = build_effective_codes(cl);
  std::int64_t rows = static_cast<std::int64_t>(cl.n_in) * ec.q;
  WeightMatrix wm = make_matrix(rows, cl.n_out, mode);
  std::int64_t ignored = 0;
  for (int ci = 0; ci < cl.n_in; ++ci)
    for (int kk = 0; kk < ec.q; ++kk) {
      std::int64_t gp = static_cast<std::int64_t>(ci) * ec.q + kk;
      for (int co = 0; co < cl.n_out; ++co) {
        if (mode == NumericMode::fixed16) {
          std::int64_t acc = 0;
          for (int j = 0; j < cl.retained_count; ++j) {
            int sgn = ec.packed[static_cast<std::size_t>(j)].entry(kk);
            acc += static_cast<std::int64_t>(cl.qalpha(ci, co, j)) * sgn;
          }
          wm.ival[static_cast<std::size_t>(gp * cl.n_out + co)] = saturate16(acc, &ignored);
        } else {
          double acc = 0.0;
          for (int j = 0; j < cl.retained_count; ++j) {
            double cv = ec.is_real ? ec.real[static_cast<std::size_t>(j)][static_cast<std::size_t>(kk)]
                                   : ec.packed[static_cast<std::size_t>(j)].entry(kk);
            acc += cl.alpha(ci, co, j) * cv;
          }
          wm.fval[static_cast<std::size_t>(gp * cl.n_out + co)] = acc;
        }
      }
    }
  return wm;
}

WeightMatrix tiwgen_reference(const CompressedLayer& cl, const DesignPoint& sigma,
                              NumericMode mode) {
  check_mappable(cl, mode);
  sigma.validate();
  EffectiveCodes ec = build_effective_codes(cl);
  std::int64_t p_dim = static_cast<std::int64_t>(cl.n_in) * ec.q;
  std::int64_t c_dim = cl.n_out;
  WeightMatrix wm = make_matrix(p_dim, c_dim, mode);

  std::int64_t tile_elems = sigma.t_p * sigma.t_c;
  std::int64_t n_sub = ceil_div(tile_elems, sigma.m);
  std::int64_t p_tiles = ceil_div(p_dim, sigma.t_p);
  std::int64_t c_tiles = ceil_div(c_dim, sigma.t_c);
  std::int64_t ignored = 0;

  std::vector<double> facc;
  std::vector<std::int64_t> iacc;
  for (std::int64_t tc = 0; tc < c_tiles; ++tc)
    for (std::int64_t tp = 0; tp < p_tiles; ++tp)
      for (std::int64_t s = 0; s < n_sub; ++s) {
        std::int64_t e0 = s * sigma.m;
        std::int64_t e1 = std::min(e0 + sigma.m, tile_elems);
        facc.assign(static_cast<std::size_t>(e1 - e0), 0.0);
        iacc.assign(static_cast<std::size_t>(e1 - e0), 0);
        for (int j = 0; j < cl.retained_count; ++j)
          for (std::int64_t e = e0; e < e1; ++e) {
            std::int64_t gp = tp * sigma.t_p + (e % sigma.t_p);
            std::int64_t gc = tc * sigma.t_c + (e / sigma.t_p);
            if (gp >= p_dim || gc >= c_dim) continue;  // zero-padded edge
            int ci = static_cast<int>(gp / ec.q);
            int kk = static_cast<int>(gp % ec.q);
            int co = static_cast<int>(gc);
            if (mode == NumericMode::fixed16) {
              int sgn = ec.packed[static_cast<std::size_t>(j)].entry(kk);
              iacc[static_cast<std::size_t>(e - e0)] +=
                  static_cast<std::int64_t>(cl.qalpha(ci, co, j)) * sgn;
            } else {
              double cv = ec.is_real
                              ? ec.real[static_cast<std::size_t>(j)][static_cast<std::size_t>(kk)]
                              : ec.packed[static_cast<std::size_t>(j)].entry(kk);
              facc[static_cast<std::size_t>(e - e0)] += cl.alpha(ci, co, j) * cv;
            }
          }
        // UpdateTile: commit the finished subtile into the weight matrix.
        for (std::int64_t e = e0; e < e1; ++e) {
          std::int64_t gp = tp * sigma.t_p + (e % sigma.t_p);
          std::int64_t gc = tc * sigma.t_c + (e / sigma.t_p);
          if (gp >= p_dim || gc >= c_dim) continue;
          if (mode == NumericMode::fixed16)
            wm.ival[static_cast<std::size_t>(gp * c_dim + gc)] =
                saturate16(iacc[static_cast<std::size_t>(e - e0)], &ignored);
          else
            wm.fval[static_cast<std::size_t>(gp * c_dim + gc)] =
                facc[static_cast<std::size_t>(e - e0)];
        }
      }
  return wm;
}

WgenResult simulate_wgen(const CompressedLayer& cl, const DesignPoint& sigma, NumericMode mode) {
  check_mappable(cl, mode);
  sigma.validate();
  EffectiveCodes ec = build_effective_codes(cl);
  const std::int64_t q = ec.q;
  const std::int64_t p_dim = static_cast<std::int64_t>(cl.n_in) * q;
  const std::int64_t c_dim = cl.n_out;
  const std::int64_t tile_elems = sigma.t_p * sigma.t_c;
  const std::int64_t n_sub = ceil_div(tile_elems, sigma.m);
  const std::int64_t p_tiles = ceil_div(p_dim, sigma.t_p);
  const std::int64_t c_tiles = ceil_div(c_dim, sigma.t_c);
  const int j_count = cl.retained_count;

  WgenResult res;
  res.weights = make_matrix(p_dim, c_dim, mode);
  res.trace.tiles.reserve(static_cast<std::size_t>(p_tiles * c_tiles));

  // Geometry pass: worst-case distinct filter slices touched by any subtile.
  // Consecutive traversal elements only change slice at slice/column borders,
  // so counting transitions suffices.
  for (std::int64_t tc = 0; tc < c_tiles; ++tc)
    for (std::int64_t tp = 0; tp < p_tiles; ++tp)
      for (std::int64_t s = 0; s < n_sub; ++s) {
        std::int64_t e0 = s * sigma.m;
        std::int64_t e1 = std::min(e0 + sigma.m, tile_elems);
        std::int64_t distinct = 0;
        std::int64_t last_ci = -1, last_gc = -1;
        for (std::int64_t e = e0; e < e1; ++e) {
          std::int64_t gp = tp * sigma.t_p + (e % sigma.t_p);
          std::int64_t gc = tc * sigma.t_c + (e / sigma.t_p);
          if (gp >= p_dim || gc >= c_dim) continue;
          std::int64_t ci = gp / q;
          if (ci != last_ci || gc != last_gc) {
            ++distinct;
            last_ci = ci;
            last_gc = gc;
          }
        }
        res.trace.provisioned_ports = std::max(res.trace.provisioned_ports, distinct);
      }

  // Sound coarse cap on live slices per subtile: segments cannot exceed
  // floor(M/T_P)+2 and each touches at most ceil(len/Q)+1 slices.
  const std::int64_t coarse_bound =
      (sigma.m / sigma.t_p + 2) * (ceil_div(std::min(sigma.t_p, sigma.m), q) + 1);

  std::vector<double> facc;
  std::vector<std::int64_t> iacc;
  std::vector<PackedCode> state(static_cast<std::size_t>(ec.packed.size()));
  std::vector<int> state_phase(static_cast<std::size_t>(j_count), -1);

  for (std::int64_t tc = 0; tc < c_tiles; ++tc)
    for (std::int64_t tp = 0; tp < p_tiles; ++tp) {
      const std::int64_t tile_base_p = tp * sigma.t_p;
      // Tile switch: the FIFO is reloaded, so stream phases restart.
      std::fill(state_phase.begin(), state_phase.end(), -1);

      TileTrace tt;
      tt.tile_p = tp;
      tt.tile_c = tc;
      tt.subtiles = n_sub;
      tt.cycles = n_sub * j_count;

      for (std::int64_t s = 0; s < n_sub; ++s) {
        std::vector<Segment> segs = subtile_segments(s, sigma.m, sigma.t_p, tile_elems);

        // Per-cycle alpha fetch demand: distinct live (c_in, c_out) slices.
        std::int64_t demand = 0;
        {
          std::int64_t last_ci = -1, last_gc = -1;
          for (const Segment& seg : segs) {
            std::int64_t gc = tc * sigma.t_c + seg.col;
            if (gc >= c_dim) continue;
            for (std::int64_t i = 0; i < seg.len; ++i) {
              std::int64_t gp = tile_base_p + seg.row0 + i;
              if (gp >= p_dim) break;
              std::int64_t ci = gp / q;
              if (ci != last_ci || gc != last_gc) {
                ++demand;
                last_ci = ci;
                last_gc = gc;
              }
            }
          }
        }
        if (demand > coarse_bound || demand > res.trace.provisioned_ports)
          throw numeric_error("alpha port demand exceeded the provisioned bound");
        res.trace.max_alpha_ports = std::max(res.trace.max_alpha_ports, demand);

        std::int64_t e0 = s * sigma.m;
        std::int64_t e1 = std::min(e0 + sigma.m, tile_elems);
        facc.assign(static_cast<std::size_t>(e1 - e0), 0.0);
        iacc.assign(static_cast<std::size_t>(e1 - e0), 0);

        for (int j = 0; j < j_count; ++j) {
          // One FIFO pop per cycle; the aligner serves each column segment of
          // the M-wide window, with a phase re-seed at discontinuities.
          std::int64_t off = 0;
          for (const Segment& seg : segs) {
            int phase_req = static_cast<int>((tile_base_p + seg.row0) % q);
            if (!ec.is_real) {
              if (state_phase[static_cast<std::size_t>(j)] != phase_req) {
                state[static_cast<std::size_t>(j)] =
                    rotate_code(ec.packed[static_cast<std::size_t>(j)], phase_req);
                if (j == 0) ++res.trace.realignments;
              }
              AlignerResult ar =
                  aligner_step(state[static_cast<std::size_t>(j)], static_cast<int>(seg.len));
              state[static_cast<std::size_t>(j)] = std::move(ar.writeback);
              state_phase[static_cast<std::size_t>(j)] =
                  static_cast<int>((phase_req + seg.len) % q);

              std::int64_t gc = tc * sigma.t_c + seg.col;
              for (std::int64_t i = 0; i < seg.len; ++i) {
                std::int64_t gp = tile_base_p + seg.row0 + i;
                if (gp >= p_dim || gc >= c_dim) continue;
                int ci = static_cast<int>(gp / q);
                int sgn = ar.out.entry(static_cast<int>(i));
                if (mode == NumericMode::fixed16)
                  iacc[static_cast<std::size_t>(off + i)] +=
                      static_cast<std::int64_t>(cl.qalpha(ci, static_cast<int>(gc), j)) * sgn;
                else
                  facc[static_cast<std::size_t>(off + i)] +=
                      cl.alpha(ci, static_cast<int>(gc), j) * sgn;
              }
            } else {
              std::int64_t gc = tc * sigma.t_c + seg.col;
              for (std::int64_t i = 0; i < seg.len; ++i) {
                std::int64_t gp = tile_base_p + seg.row0 + i;
                if (gp >= p_dim || gc >= c_dim) continue;
                int ci = static_cast<int>(gp / q);
                double cv = ec.real[static_cast<std::size_t>(j)]
                                   [static_cast<std::size_t>((phase_req + i) % q)];
                facc[static_cast<std::size_t>(off + i)] +=
                    cl.alpha(ci, static_cast<int>(gc), j) * cv;
              }
            }
            off += seg.len;
          }
        }

        // Accumulator reset boundary: commit the subtile, then clear.
        std::int64_t off = 0;
        for (const Segment& seg : segs) {
          std::int64_t gc = tc * sigma.t_c + seg.col;
          for (std::int64_t i = 0; i < seg.len; ++i) {
            std::int64_t gp = tile_base_p + seg.row0 + i;
            if (gp >= p_dim || gc >= c_dim) continue;
            if (mode == NumericMode::fixed16)
              res.weights.ival[static_cast<std::size_t>(gp * c_dim + gc)] =
                  saturate16(iacc[static_cast<std::size_t>(off + i)], &res.trace.saturated);
            else
              res.weights.fval[static_cast<std::size_t>(gp * c_dim + gc)] =
                  facc[static_cast<std::size_t>(off + i)];
          }
          off += seg.len;
        }
      }

      res.trace.tiles.push_back(tt);
      res.trace.total_cycles += tt.cycles;
    }

  return res;
}

void write_trace_csv(const std::string& path, const WgenTrace& trace) {
  std::ofstream f(path);
  if (!f) throw parse_error("cannot open for writing: " + path);
  f << "tile_p,tile_c,subtiles,cycles\n";
  for (const TileTrace& t : trace.tiles)
    f << t.tile_p << "," << t.tile_c << "," << t.subtiles << "," << t.cycles << "\n";
  f << "# total_cycles," << trace.total_cycles << "\n";
  f << "# max_alpha_ports," << trace.max_alpha_ports << "\n";
  f << "# provisioned_ports," << trace.provisioned_ports << "\n";
  f << "# realignments," << trace.realignments << "\n";
}

}  // namespace ovgen
