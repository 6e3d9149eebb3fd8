#include "ovgen/engine.hpp"

#include <algorithm>
#include <limits>

namespace ovgen {

int conv_out_dim(int dim, int k, int stride, int pad) {
  if (dim < 1 || k < 1 || stride < 1 || pad < 0)
    throw config_error("convolution geometry out of range");
  if (dim + 2 * pad < k) throw config_error("kernel larger than padded input");
  return (dim + 2 * pad - k) / stride + 1;
}

Image conv_reference(const Image& input, const FilterBank& filters, int stride, int pad,
                     const std::vector<double>* bias) {
  if (filters.n_in != input.channels)
    throw validation_error("filter bank channel count does not match the input");
  if (bias && static_cast<int>(bias->size()) != filters.n_out)
    throw validation_error("bias length does not match the filter count");
  const int k = filters.k;
  const int oh = conv_out_dim(input.height, k, stride, pad);
  const int ow = conv_out_dim(input.width, k, stride, pad);

  Image out(filters.n_out, oh, ow);
  for (int co = 0; co < filters.n_out; ++co)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = bias ? (*bias)[static_cast<std::size_t>(co)] : 0.0;
        for (int ci = 0; ci < input.channels; ++ci)
          for (int ky = 0; ky < k; ++ky) {
            int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= input.height) continue;
            for (int kx = 0; kx < k; ++kx) {
              int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= input.width) continue;
              acc += input.at(ci, iy, ix) * filters.at(co, ci, ky, kx);
            }
          }
        out.at(co, oy, ox) = acc;
      }
  return out;
}

MatF im2col(const Image& input, int k, int stride, int pad) {
  const int oh = conv_out_dim(input.height, k, stride, pad);
  const int ow = conv_out_dim(input.width, k, stride, pad);
  MatF x(static_cast<std::int64_t>(oh) * ow, static_cast<std::int64_t>(input.channels) * k * k);
  std::int64_t row = 0;
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox, ++row)
      for (int ci = 0; ci < input.channels; ++ci)
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            int iy = oy * stride + ky - pad;
            int ix = ox * stride + kx - pad;
            double v = 0.0;
            if (iy >= 0 && iy < input.height && ix >= 0 && ix < input.width)
              v = input.at(ci, iy, ix);
            x.at(row, static_cast<std::int64_t>(ci) * k * k + ky * k + kx) = v;
          }
  return x;
}

MatF tiled_gemm(const MatF& x, const MatF& w, const DesignPoint& sigma) {
  sigma.validate();
  if (x.cols != w.rows) throw validation_error("tiled_gemm inner dimensions disagree");
  MatF y(x.rows, w.cols);
  std::vector<double> tile(static_cast<std::size_t>(sigma.t_r * sigma.t_c));
  for (std::int64_t r0 = 0; r0 < x.rows; r0 += sigma.t_r)
    for (std::int64_t c0 = 0; c0 < w.cols; c0 += sigma.t_c) {
      std::fill(tile.begin(), tile.end(), 0.0);
      std::int64_t rn = std::min(sigma.t_r, x.rows - r0);
      std::int64_t cn = std::min(sigma.t_c, w.cols - c0);
      for (std::int64_t p0 = 0; p0 < x.cols; p0 += sigma.t_p) {
        std::int64_t pn = std::min(sigma.t_p, x.cols - p0);
        for (std::int64_t r = 0; r < rn; ++r)
          for (std::int64_t c = 0; c < cn; ++c) {
            double acc = 0.0;
            for (std::int64_t p = 0; p < pn; ++p)
              acc += x.at(r0 + r, p0 + p) * w.at(p0 + p, c0 + c);
            tile[static_cast<std::size_t>(r * sigma.t_c + c)] += acc;
          }
      }
      for (std::int64_t r = 0; r < rn; ++r)
        for (std::int64_t c = 0; c < cn; ++c)
          y.at(r0 + r, c0 + c) = tile[static_cast<std::size_t>(r * sigma.t_c + c)];
    }
  return y;
}

MatI32 tiled_gemm(const MatI16& x, const MatI16& w, const DesignPoint& sigma,
                  std::int64_t* overflows) {
  sigma.validate();
  if (x.cols != w.rows) throw validation_error("tiled_gemm inner dimensions disagree");
  constexpr std::int64_t kMax = std::numeric_limits<std::int32_t>::max();
  constexpr std::int64_t kMin = std::numeric_limits<std::int32_t>::min();
  std::int64_t local_ovf = 0;

  MatI32 y(x.rows, w.cols);
  std::vector<std::int64_t> tile(static_cast<std::size_t>(sigma.t_r * sigma.t_c));
  for (std::int64_t r0 = 0; r0 < x.rows; r0 += sigma.t_r)
    for (std::int64_t c0 = 0; c0 < w.cols; c0 += sigma.t_c) {
      std::fill(tile.begin(), tile.end(), 0);
      std::int64_t rn = std::min(sigma.t_r, x.rows - r0);
      std::int64_t cn = std::min(sigma.t_c, w.cols - c0);
      for (std::int64_t p0 = 0; p0 < x.cols; p0 += sigma.t_p) {
        std::int64_t pn = std::min(sigma.t_p, x.cols - p0);
        for (std::int64_t r = 0; r < rn; ++r)
          for (std::int64_t c = 0; c < cn; ++c) {
            std::int64_t& acc = tile[static_cast<std::size_t>(r * sigma.t_c + c)];
            for (std::int64_t p = 0; p < pn; ++p) {
              acc += static_cast<std::int64_t>(x.at(r0 + r, p0 + p)) * w.at(p0 + p, c0 + c);
              // The hardware accumulator is 32 bits wide and saturates.
              if (acc > kMax) {
                acc = kMax;
                ++local_ovf;
              } else if (acc < kMin) {
                acc = kMin;
                ++local_ovf;
              }
            }
          }
      }
      for (std::int64_t r = 0; r < rn; ++r)
        for (std::int64_t c = 0; c < cn; ++c)
          y.at(r0 + r, c0 + c) =
              static_cast<std::int32_t>(tile[static_cast<std::size_t>(r * sigma.t_c + c)]);
    }
  if (overflows) *overflows += local_ovf;
  return y;
}

MatF weights_as_float(const WeightMatrix& wm) {
  if (wm.mode != NumericMode::flt)
    throw validation_error("weight matrix is not in float mode");
  MatF w(wm.rows, wm.cols);
  w.a = wm.fval;
  return w;
}

MatI16 weights_as_fixed(const WeightMatrix& wm) {
  if (wm.mode != NumericMode::fixed16)
    throw validation_error("weight matrix is not in fixed16 mode");
  MatI16 w(wm.rows, wm.cols);
  // Generated values are already saturated to the int16 range.
  for (std::size_t i = 0; i < wm.ival.size(); ++i)
    w.a[i] = static_cast<std::int16_t>(wm.ival[i]);
  return w;
}

std::int64_t cycles_baseline(const WorkloadTuple& w, const DesignPoint& sigma) {
  sigma.validate();
  return sigma.t_r * ceil_div(w.p, sigma.t_p);
}

std::int64_t cycles_selective(const WorkloadTuple& w, const DesignPoint& sigma) {
  sigma.validate();
  const std::int64_t u = ceil_div(w.p, sigma.t_p);
  const std::int64_t base = sigma.t_r * u;
  const std::int64_t c = std::min(w.c, sigma.t_c);
  if (c == sigma.t_c) return base;

  const std::int64_t lower = ceil_div(sigma.t_r * c, sigma.t_c) * u;
  const std::int64_t num = sigma.t_r * c - (sigma.t_c - c) * (c + 1);
  const std::int64_t eff = (sigma.t_c - c + ceil_div_signed(num, sigma.t_c)) * u;
  return std::max(lower, std::min(base, eff));
}

std::int64_t schedule_sim(const WorkloadTuple& w, const DesignPoint& sigma, bool selective) {
  sigma.validate();
  const std::int64_t u = ceil_div(w.p, sigma.t_p);
  const std::int64_t c = std::min(w.c, sigma.t_c);
  if (!selective || c == sigma.t_c) return sigma.t_r * u;

  // One pass per P-tile. The weight strip changes between passes, so the
  // augmented PEs pay the propagation ramp again each time and the pass
  // schedule simply repeats.
  const std::int64_t helpers = sigma.t_c - c;
  std::vector<std::int64_t> remaining(static_cast<std::size_t>(c), sigma.t_r);
  std::int64_t tasks = c * sigma.t_r;
  std::int64_t finish = 0;

  for (std::int64_t t = 1; tasks > 0; ++t) {
    for (std::int64_t i = 0; i < c; ++i)
      if (remaining[static_cast<std::size_t>(i)] > 0) {
        --remaining[static_cast<std::size_t>(i)];
        --tasks;
        finish = t;
      }
    for (std::int64_t j = 0; j < helpers && tasks > 0; ++j) {
      // Weight hop latency: helper j first sees a weight at cycle j + 1.
      if (t < j + 1) continue;
      std::int64_t pick = -1;
      for (std::int64_t i = 0; i < c; ++i)
        if (remaining[static_cast<std::size_t>(i)] > 0 &&
            (pick < 0 ||
             remaining[static_cast<std::size_t>(i)] > remaining[static_cast<std::size_t>(pick)]))
          pick = i;
      if (pick < 0) break;
      --remaining[static_cast<std::size_t>(pick)];
      --tasks;
      finish = t;
    }
  }
  return finish * u;
}

}  // namespace ovgen
