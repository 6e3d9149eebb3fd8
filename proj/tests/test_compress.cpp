#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <doctest.h>

#include "ovgen/compress.hpp"
#include "ovgen/fixed.hpp"

using namespace ovgen;

namespace {

FilterBank random_bank(int n_out, int n_in, int k, unsigned seed) {
  FilterBank fb = FilterBank::zeros(n_out, n_in, k);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (float& v : fb.data) v = dist(rng);
  return fb;
}

double max_abs_diff(const FilterBank& a, const FilterBank& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
  return m;
}

std::string temp_path(const char* stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("projection recovers known coefficients") {
  for (int order : {1, 2, 3, 4}) {
    OvsfBasis basis = build_basis(order);
    int len = basis.length();
    std::mt19937 rng(static_cast<unsigned>(order));
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<double> alpha(static_cast<std::size_t>(len));
    for (double& a : alpha) a = dist(rng);
    // slice = B^T alpha, then projecting must give alpha back exactly.
    std::vector<double> slice(static_cast<std::size_t>(len), 0.0);
    for (int i = 0; i < len; ++i)
      for (int j = 0; j < len; ++j)
        slice[static_cast<std::size_t>(j)] += alpha[static_cast<std::size_t>(i)] * basis.entry(i, j);
    std::vector<double> back = slice_project(slice, basis);
    for (int i = 0; i < len; ++i)
      CHECK(back[static_cast<std::size_t>(i)] == doctest::Approx(alpha[static_cast<std::size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("full-ratio compression reconstructs square-power kernels exactly") {
  for (int k : {2, 4}) {
    FilterBank fb = random_bank(6, 3, k, 11u + static_cast<unsigned>(k));
    CompressedLayer cl = compress_layer(fb, 1.0, ReprMode::direct);
    OvsfBasis basis = build_basis(k == 2 ? 2 : 4);
    FilterBank rec = reconstruct_layer(cl, basis);
    CHECK(max_abs_diff(fb, rec) < 1e-5);
  }
}

TEST_CASE("full-ratio crop mapping reconstructs 3x3 kernels exactly") {
  FilterBank fb = random_bank(4, 5, 3, 23);
  CompressedLayer cl = compress_layer(fb, 1.0, ReprMode::crop4);
  FilterBank rec = reconstruct_layer(cl, build_basis(4));
  CHECK(max_abs_diff(fb, rec) < 1e-5);
}

TEST_CASE("crop operator rows are one-hot on the top-left 3x3") {
  ReprOperator op = build_repr_operator(ReprMode::crop4);
  const int kept[9] = {0, 1, 2, 4, 5, 6, 8, 9, 10};
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 16; ++c) CHECK(op.at(r, c) == (c == kept[r] ? 1.0 : 0.0));
}

TEST_CASE("pool operator rows are averaging windows summing to one") {
  ReprOperator op = build_repr_operator(ReprMode::pool4);
  for (int r = 0; r < 9; ++r) {
    double sum = 0.0;
    for (int c = 0; c < 16; ++c) {
      sum += op.at(r, c);
      CHECK((op.at(r, c) == 0.0 || op.at(r, c) == 0.25));
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("pool mapping is exact on constant filters") {
  FilterBank fb = FilterBank::zeros(2, 2, 3);
  for (float& v : fb.data) v = 0.75f;
  CompressedLayer cl = compress_layer(fb, 1.0, ReprMode::pool4);
  FilterBank rec = reconstruct_layer(cl, build_basis(4));
  CHECK(max_abs_diff(fb, rec) < 1e-5);
}

TEST_CASE("pool mapping recovers filters generated from its own range") {
  // f = A B^T alpha for random alpha must be fit with near-zero residual.
  OvsfBasis basis = build_basis(4);
  ReprOperator op = build_repr_operator(ReprMode::pool4);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FilterBank fb = FilterBank::zeros(1, 1, 3);
  std::vector<double> alpha(16);
  for (double& a : alpha) a = dist(rng);
  std::vector<double> rep(16, 0.0);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i)
      rep[static_cast<std::size_t>(i)] += alpha[static_cast<std::size_t>(j)] * basis.entry(j, i);
  for (int r = 0; r < 9; ++r) {
    double acc = 0.0;
    for (int i = 0; i < 16; ++i) acc += op.at(r, i) * rep[static_cast<std::size_t>(i)];
    fb.data[static_cast<std::size_t>(r)] = static_cast<float>(acc);
  }
  CompressedLayer cl = compress_layer(fb, 1.0, ReprMode::pool4);
  FilterBank rec = reconstruct_layer(cl, build_basis(4));
  CHECK(max_abs_diff(fb, rec) < 1e-4);
}

TEST_CASE("greedy selection keeps the largest aggregate magnitudes") {
  std::vector<std::vector<double>> sa = {{3.0, 1.0, 2.0}};
  CHECK(greedy_select(sa, 2) == std::vector<int>{0, 2});
  CHECK(greedy_select(sa, 3) == std::vector<int>{0, 1, 2});
}

TEST_CASE("greedy selection breaks ties by discarding the lowest index") {
  std::vector<std::vector<double>> sa = {{1.0, 1.0, 2.0}};
  CHECK(greedy_select(sa, 2) == std::vector<int>{1, 2});
  // Aggregation across slices before comparison.
  std::vector<std::vector<double>> multi = {{1.0, -4.0}, {-1.0, 0.5}};
  CHECK(greedy_select(multi, 1) == std::vector<int>{1});
}

TEST_CASE("retained count follows the ceiling of ratio times length") {
  FilterBank fb = random_bank(2, 2, 4, 3);
  CHECK(compress_layer(fb, 0.5, ReprMode::direct).retained_count == 8);
  CHECK(compress_layer(fb, 0.03, ReprMode::direct).retained_count == 1);
  CHECK(compress_layer(fb, 0.25, ReprMode::direct).retained_count == 4);
  CHECK(compress_layer(fb, 1.0, ReprMode::direct).retained_count == 16);
}

TEST_CASE("invalid compression arguments are rejected") {
  FilterBank fb = random_bank(2, 2, 3, 9);
  CHECK_THROWS_AS(compress_layer(fb, 0.0, ReprMode::crop4), config_error);
  CHECK_THROWS_AS(compress_layer(fb, 1.5, ReprMode::crop4), config_error);
  // 3x3 kernels have no power-of-two square length for the direct mode.
  CHECK_THROWS_AS(compress_layer(fb, 1.0, ReprMode::direct), config_error);
  FilterBank fb5 = random_bank(2, 2, 5, 9);
  CHECK_THROWS_AS(compress_layer(fb5, 1.0, ReprMode::crop4), config_error);
}

TEST_CASE("rounding is half-to-even") {
  CHECK(round_half_even(0.5) == 0.0);
  CHECK(round_half_even(1.5) == 2.0);
  CHECK(round_half_even(2.5) == 2.0);
  CHECK(round_half_even(-0.5) == 0.0);
  CHECK(round_half_even(-1.5) == -2.0);
  CHECK(round_half_even(0.4999) == 0.0);
  CHECK(round_half_even(2.51) == 3.0);
}

TEST_CASE("saturating narrow to 16 bits counts clips") {
  std::int64_t n = 0;
  CHECK(saturate16(40000, &n) == 32767);
  CHECK(saturate16(-40000, &n) == -32768);
  CHECK(saturate16(123, &n) == 123);
  CHECK(n == 2);
}

TEST_CASE("quantization stores dequantized coefficients") {
  FilterBank fb = random_bank(3, 2, 4, 17);
  CompressedLayer cl = compress_layer(fb, 0.5, ReprMode::direct);
  CompressedLayer q = quantize_alphas(cl, 16, 8);
  REQUIRE(q.quant.has_value());
  CHECK(q.quant->word_length == 16);
  CHECK(q.quant->frac_bits == 8);
  CHECK(q.qalphas.size() == q.alphas.size());
  for (std::size_t i = 0; i < q.alphas.size(); ++i) {
    CHECK(q.alphas[i] == static_cast<double>(q.qalphas[i]) / 256.0);
    CHECK(std::abs(q.alphas[i] - cl.alphas[i]) <= 1.0 / 512.0 + 1e-12);
  }
}

TEST_CASE("per-filter selection never reconstructs worse than shared") {
  FilterBank fb = random_bank(4, 3, 4, 29);
  CompressedLayer shared = compress_layer(fb, 0.25, ReprMode::direct, SelectionMode::shared);
  CompressedLayer perf = compress_layer(fb, 0.25, ReprMode::direct, SelectionMode::per_filter);
  OvsfBasis basis = build_basis(4);
  FilterBank rs = reconstruct_layer(shared, basis);
  FilterBank rp = reconstruct_layer(perf, basis);
  double es = 0.0, ep = 0.0;
  for (std::size_t i = 0; i < fb.data.size(); ++i) {
    es += (rs.data[i] - fb.data[i]) * (rs.data[i] - fb.data[i]);
    ep += (rp.data[i] - fb.data[i]) * (rp.data[i] - fb.data[i]);
  }
  CHECK(ep <= es + 1e-9);
  CHECK(perf.per_filter_indices.size() == 12);
}

TEST_CASE("compressed container round trips") {
  CompressedModel cm;
  cm.model_name = "toy";
  FilterBank fb = random_bank(3, 2, 3, 31);
  CompressedLayer cl = compress_layer(fb, 0.5, ReprMode::crop4);
  cl = quantize_alphas(cl, 16, 8);
  cl.layer_id = 0;
  cl.name = "conv_a";
  cm.layers.push_back(cl);

  std::string path = temp_path("ovgen_test_container.ovcm");
  write_compressed(path, cm);
  CompressedModel back = read_compressed(path);
  REQUIRE(back.layers.size() == 1);
  const CompressedLayer& b = back.layers[0];
  CHECK(b.name == "conv_a");
  CHECK(b.repr_mode == ReprMode::crop4);
  CHECK(b.retained_indices == cl.retained_indices);
  CHECK(b.alphas == cl.alphas);
  CHECK(b.qalphas == cl.qalphas);
  REQUIRE(b.quant.has_value());
  CHECK(b.quant->frac_bits == 8);
  std::remove(path.c_str());
}

TEST_CASE("truncated container fails the checksum") {
  CompressedModel cm;
  cm.model_name = "toy";
  FilterBank fb = random_bank(2, 2, 3, 37);
  CompressedLayer cl = compress_layer(fb, 1.0, ReprMode::crop4);
  cm.layers.push_back(cl);
  std::string path = temp_path("ovgen_test_trunc.ovcm");
  write_compressed(path, cm);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 7));
  out.close();
  CHECK_THROWS_AS(read_compressed(path), parse_error);
  std::remove(path.c_str());
}
