#include <cstdio>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "ovgen/engine.hpp"
#include "ovgen/model.hpp"
#include "ovgen/networks.hpp"
#include "ovgen/tensor.hpp"

using namespace ovgen;

namespace {

LayerSpec conv_layer(int n_in, int n_out, int k, int h, int s, int p) {
  LayerSpec l;
  l.name = "conv";
  l.kind = LayerKind::conv;
  l.n_in = n_in;
  l.n_out = n_out;
  l.k = k;
  l.h = h;
  l.w = h;
  l.s = s;
  l.p = p;
  return l;
}

std::string temp_path(const char* stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("workload mapping uses the ceiling output-count form") {
  // 7x7 stride-2 pad-3 stem on 224x224: (224+6-7)/2+1 = 112.5 rounds up.
  WorkloadTuple w = to_workload(conv_layer(3, 64, 7, 224, 2, 3));
  CHECK(w.r == 113 * 113);
  CHECK(w.p == 3 * 49);
  CHECK(w.c == 64);
  // The actual convolution output grid stays on the floor form.
  CHECK(conv_out_dim(224, 7, 2, 3) == 112);
}

TEST_CASE("workload mapping matches the dense grid when strides divide evenly") {
  WorkloadTuple w = to_workload(conv_layer(64, 128, 3, 56, 1, 1));
  CHECK(w.r == 56 * 56);
  CHECK(w.p == 64 * 9);
  CHECK(w.c == 128);
  CHECK(conv_out_dim(56, 3, 1, 1) == 56);
}

TEST_CASE("fully connected layers map to a single output position") {
  LayerSpec l;
  l.name = "fc";
  l.kind = LayerKind::fc;
  l.n_in = 512;
  l.n_out = 1000;
  WorkloadTuple w = to_workload(l);
  CHECK(w.r == 1);
  CHECK(w.p == 512);
  CHECK(w.c == 1000);
}

TEST_CASE("im2col row count equals the floor-form output grid") {
  Image img;
  img.channels = 2;
  img.height = 8;
  img.width = 8;
  img.data.assign(2 * 8 * 8, 0.5f);
  MatF x = im2col(img, 3, 1, 1);
  CHECK(x.rows == 64);
  CHECK(x.cols == 2 * 9);
  WorkloadTuple w = to_workload(conv_layer(2, 4, 3, 8, 1, 1));
  CHECK(w.r == x.rows);
  CHECK(w.p == x.cols);
}

TEST_CASE("model spec round trips through JSON") {
  ModelSpec m;
  m.name = "toy";
  m.layers.push_back(conv_layer(3, 8, 3, 16, 1, 1));
  m.layers.back().group = 0;
  LayerSpec fc;
  fc.name = "head";
  fc.kind = LayerKind::fc;
  fc.n_in = 8;
  fc.n_out = 10;
  fc.has_bias = true;
  m.layers.push_back(fc);

  ModelSpec back = parse_model(serialize_model(m));
  REQUIRE(back.layers.size() == 2);
  CHECK(back.name == "toy");
  CHECK(back.layers[0].k == 3);
  CHECK(back.layers[0].group == 0);
  CHECK(back.layers[1].kind == LayerKind::fc);
  CHECK(back.layers[1].has_bias);
}

TEST_CASE("platform spec round trips through JSON") {
  PlatformSpec p = builtin_platform("z7045");
  PlatformSpec back = parse_platform(serialize_platform(p));
  CHECK(back.name == p.name);
  CHECK(back.freq_mhz == p.freq_mhz);
  CHECK(back.dsp == p.dsp);
  CHECK(back.cfpga_bits == p.cfpga_bits);
  CHECK(back.lut_capacity == p.lut_capacity);
  CHECK(back.wl == p.wl);
  CHECK(back.lut.c2 == p.lut.c2);
}

TEST_CASE("schedule spec round trips through JSON") {
  RatioSchedule s = builtin_schedule("ovsf25");
  RatioSchedule back = parse_schedule(serialize_schedule(s));
  CHECK(back.name == s.name);
  CHECK(back.ratios == s.ratios);
  CHECK(back.mode_3x3 == s.mode_3x3);
  CHECK(back.include_ungrouped_3x3 == s.include_ungrouped_3x3);
  CHECK(back.all_bypass == s.all_bypass);
}

TEST_CASE("malformed specs raise parse errors") {
  CHECK_THROWS_AS(parse_model("{"), parse_error);
  CHECK_THROWS_AS(parse_model("{\"layers\": []}"), parse_error);
  CHECK_THROWS_AS(parse_schedule("{\"name\":\"x\",\"ratios\":[0.0]}"), parse_error);
  CHECK_THROWS_AS(parse_platform("{\"name\":\"x\"}"), parse_error);
}

TEST_CASE("all-bypass schedule leaves every layer uncompressed") {
  ModelSpec m = apply_schedule(builtin_model("resnet18"), builtin_schedule("none"));
  for (const LayerSpec& l : m.layers) {
    CHECK(l.repr_mode == ReprMode::bypass);
    CHECK(l.rho == 1.0);
    CHECK(l.retained_count() == 0);
  }
  CHECK_FALSE(m.any_compressed());
  CHECK(m.k_max() == 1);
}

TEST_CASE("half-ratio schedule compresses grouped 3x3 layers only") {
  // ovsf50 keeps the first group at full ratio: [1.0, 0.5, 0.5, 0.5].
  ModelSpec m = apply_schedule(builtin_model("resnet18"), builtin_schedule("ovsf50"));
  int compressed = 0;
  for (const LayerSpec& l : m.layers) {
    if (l.group >= 0) {
      CHECK(l.repr_mode == ReprMode::crop4);
      CHECK(l.rho == (l.group == 0 ? 1.0 : 0.5));
      CHECK(l.k == 3);
      CHECK(l.retained_count() == (l.group == 0 ? 16 : 8));
      ++compressed;
    } else {
      CHECK(l.repr_mode == ReprMode::bypass);
    }
  }
  // Sixteen 3x3 convs in the four residual stages.
  CHECK(compressed == 16);
  CHECK(m.any_compressed());
  CHECK(m.k_max() == 4);
}

TEST_CASE("all3x3 variant additionally compresses an ungrouped 3x3 stem") {
  ModelSpec plain = apply_schedule(builtin_model("squeezenet1.1"), builtin_schedule("ovsf50"));
  ModelSpec all3 = apply_schedule(builtin_model("squeezenet1.1"), builtin_schedule("ovsf50_all3x3"));
  REQUIRE(plain.layers.size() == all3.layers.size());
  CHECK(plain.layers[0].k == 3);
  CHECK(plain.layers[0].group == -1);
  CHECK(plain.layers[0].repr_mode == ReprMode::bypass);
  // Ungrouped 3x3 convs join group 0, which ovsf50 keeps at full ratio.
  CHECK(all3.layers[0].repr_mode == ReprMode::crop4);
  CHECK(all3.layers[0].rho == 1.0);
}

TEST_CASE("builtin platforms carry the published capacities") {
  PlatformSpec z = builtin_platform("z7045");
  CHECK(z.freq_mhz == 150.0);
  CHECK(z.dsp == 900);
  CHECK(z.cfpga_bits == 19200000);
  CHECK(z.lut_capacity == 218600);
  CHECK(z.wl == 16);
  CHECK(z.d_mac == 1);

  PlatformSpec u = builtin_platform("zu7ev");
  CHECK(u.freq_mhz == 200.0);
  CHECK(u.dsp == 1728);
  CHECK(u.cfpga_bits == 38000000);
  CHECK(u.lut_capacity == 230000);

  CHECK_THROWS_AS(builtin_platform("nonesuch"), config_error);
}

TEST_CASE("bandwidth tiers step from 1.1 to 13.4 GB/s") {
  std::vector<BandwidthTier> tiers = bandwidth_tiers();
  REQUIRE(tiers.size() == 4);
  CHECK(tiers[0].label == "1x");
  CHECK(tiers[0].gbs == 1.1);
  CHECK(tiers[1].gbs == 2.2);
  CHECK(tiers[2].gbs == 4.5);
  CHECK(tiers[3].label == "12x");
  CHECK(tiers[3].gbs == 13.4);
}

TEST_CASE("original parameter counts match the builtin networks") {
  RatioSchedule none = builtin_schedule("none");
  CHECK(count_params(builtin_model("resnet18"), none).original == 11679912);
  CHECK(count_params(builtin_model("resnet34"), none).original == 21780648);
  CHECK(count_params(builtin_model("resnet50"), none).original == 25503912);
  CHECK(count_params(builtin_model("squeezenet1.1"), none).original == 1235496);
  // Without compression both counts agree.
  ParamCounts pc = count_params(builtin_model("resnet18"), none);
  CHECK(pc.compressed == pc.original);
}

TEST_CASE("compressed parameter counts are stable regression values") {
  auto compressed = [](const char* model, const char* sched) {
    return count_params(builtin_model(model), builtin_schedule(sched)).compressed;
  };
  CHECK(compressed("resnet18", "ovsf50") == 10590376);
  CHECK(compressed("resnet18", "ovsf25") == 4110504);
  CHECK(compressed("resnet34", "ovsf50") == 19634344);
  CHECK(compressed("resnet34", "ovsf25") == 7846056);
  CHECK(compressed("resnet50", "ovsf50") == 24344744);
  CHECK(compressed("squeezenet1.1", "ovsf50") == 1190440);
  CHECK(compressed("squeezenet1.1", "ovsf25") == 911912);
}

TEST_CASE("synthetic weights are reproducible per seed") {
  ModelSpec m;
  m.name = "toy";
  m.layers.push_back(conv_layer(2, 4, 3, 8, 1, 1));
  TensorContainer a = random_weights(m, 42);
  TensorContainer b = random_weights(m, 42);
  TensorContainer c = random_weights(m, 43);
  REQUIRE(a.tensors.size() == 1);
  CHECK(a.tensors[0].data == b.tensors[0].data);
  CHECK(a.tensors[0].data != c.tensors[0].data);
  CHECK(a.tensors[0].shape == std::vector<std::int64_t>{4, 2, 3, 3});
  for (float v : a.tensors[0].data) {
    CHECK(v >= -1.0f);
    CHECK(v < 1.0f);
  }
}

TEST_CASE("layer filters extract the right shapes") {
  ModelSpec m;
  m.name = "toy";
  m.layers.push_back(conv_layer(2, 4, 3, 8, 1, 1));
  LayerSpec fc;
  fc.name = "head";
  fc.kind = LayerKind::fc;
  fc.n_in = 6;
  fc.n_out = 3;
  m.layers.push_back(fc);
  TensorContainer tc = random_weights(m, 7);
  FilterBank conv = layer_filters(tc, m.layers[0]);
  CHECK(conv.n_out == 4);
  CHECK(conv.n_in == 2);
  CHECK(conv.k == 3);
  FilterBank dense = layer_filters(tc, m.layers[1]);
  CHECK(dense.n_out == 3);
  CHECK(dense.n_in == 6);
  CHECK(dense.k == 1);
}

TEST_CASE("weights container round trips and rejects truncation") {
  ModelSpec m;
  m.name = "toy";
  m.layers.push_back(conv_layer(1, 2, 3, 4, 1, 1));
  TensorContainer tc = random_weights(m, 99);
  std::string path = temp_path("ovgen_test_weights.ovwt");
  write_weights(path, tc);
  TensorContainer back = read_weights(path);
  REQUIRE(back.tensors.size() == 1);
  CHECK(back.tensors[0].name == tc.tensors[0].name);
  CHECK(back.tensors[0].data == tc.tensors[0].data);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
  out.close();
  CHECK_THROWS_AS(read_weights(path), parse_error);
  std::remove(path.c_str());
}
