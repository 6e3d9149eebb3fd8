#include "ovgen/networks.hpp"

namespace ovgen {

namespace {

LayerSpec conv(const std::string& name, int n_in, int n_out, int k, int h, int s, int p,
               int group = -1, bool bias = false) {
  LayerSpec l;
  l.name = name;
  l.kind = LayerKind::conv;
  l.n_in = n_in;
  l.n_out = n_out;
  l.k = k;
  l.h = h;
  l.w = h;
  l.s = s;
  l.p = p;
  l.group = group;
  l.has_bias = bias;
  return l;
}

LayerSpec fc(const std::string& name, int n_in, int n_out) {
  LayerSpec l;
  l.name = name;
  l.kind = LayerKind::fc;
  l.n_in = n_in;
  l.n_out = n_out;
  l.has_bias = true;
  return l;
}

// Basic-block ResNet (18/34). Groups 0..3 tag the stage's 3x3 convs; stem,
// 1x1 downsamples, and fc stay ungrouped (bypass under every schedule).
ModelSpec resnet_basic(const std::string& name, const std::vector<int>& blocks) {
  ModelSpec m;
  m.name = name;
  m.layers.push_back(conv("conv1", 3, 64, 7, 224, 2, 3));
  int in_ch = 64;
  int dim = 56;  // after the stride-2 stem and stride-2 max-pool
  const int stage_ch[4] = {64, 128, 256, 512};
  for (int stage = 0; stage < 4; ++stage) {
    int out_ch = stage_ch[stage];
    for (int b = 0; b < blocks[static_cast<std::size_t>(stage)]; ++b) {
      bool first = (b == 0);
      int stride = (first && stage > 0) ? 2 : 1;
      std::string base = "layer" + std::to_string(stage + 1) + "." + std::to_string(b);
      m.layers.push_back(
          conv(base + ".conv1", in_ch, out_ch, 3, dim, stride, 1, stage));
      int out_dim = dim / stride;
      m.layers.push_back(conv(base + ".conv2", out_ch, out_ch, 3, out_dim, 1, 1, stage));
      if (first && stage > 0)
        m.layers.push_back(conv(base + ".downsample", in_ch, out_ch, 1, dim, stride, 0));
      in_ch = out_ch;
      dim = out_dim;
    }
  }
  m.layers.push_back(fc("fc", 512, 1000));
  return m;
}

// Bottleneck ResNet-50. Only the 3x3 mid convs carry a group.
ModelSpec resnet50() {
  ModelSpec m;
  m.name = "resnet50";
  m.layers.push_back(conv("conv1", 3, 64, 7, 224, 2, 3));
  int in_ch = 64;
  int dim = 56;
  const int widths[4] = {64, 128, 256, 512};
  const int blocks[4] = {3, 4, 6, 3};
  for (int stage = 0; stage < 4; ++stage) {
    int width = widths[stage];
    int out_ch = width * 4;
    for (int b = 0; b < blocks[stage]; ++b) {
      bool first = (b == 0);
      int stride = (first && stage > 0) ? 2 : 1;
      std::string base = "layer" + std::to_string(stage + 1) + "." + std::to_string(b);
      m.layers.push_back(conv(base + ".conv1", in_ch, width, 1, dim, 1, 0));
      m.layers.push_back(conv(base + ".conv2", width, width, 3, dim, stride, 1, stage));
      int out_dim = dim / stride;
      m.layers.push_back(conv(base + ".conv3", width, out_ch, 1, out_dim, 1, 0));
      if (first)
        m.layers.push_back(conv(base + ".downsample", in_ch, out_ch, 1, dim, stride, 0));
      in_ch = out_ch;
      dim = out_dim;
    }
  }
  m.layers.push_back(fc("fc", 2048, 1000));
  return m;
}

// SqueezeNet 1.1: Fire modules in pairs; the expand 3x3 convs carry groups
// 0..3 (two consecutive Fire modules per group). All convs have biases.
ModelSpec squeezenet11() {
  ModelSpec m;
  m.name = "squeezenet1.1";
  m.layers.push_back(conv("conv1", 3, 64, 3, 224, 2, 0, -1, true));
  struct Fire {
    int in, squeeze, expand, dim;
  };
  const Fire fires[8] = {{64, 16, 64, 55},   {128, 16, 64, 55},  {128, 32, 128, 27},
                         {256, 32, 128, 27}, {256, 48, 192, 13}, {384, 48, 192, 13},
                         {384, 64, 256, 13}, {512, 64, 256, 13}};
  for (int f = 0; f < 8; ++f) {
    const Fire& fire = fires[f];
    std::string base = "fire" + std::to_string(f + 1);
    int group = f / 2;
    m.layers.push_back(conv(base + ".squeeze", fire.in, fire.squeeze, 1, fire.dim, 1, 0, -1, true));
    m.layers.push_back(
        conv(base + ".expand1x1", fire.squeeze, fire.expand, 1, fire.dim, 1, 0, -1, true));
    m.layers.push_back(
        conv(base + ".expand3x3", fire.squeeze, fire.expand, 3, fire.dim, 1, 1, group, true));
  }
  m.layers.push_back(conv("classifier", 512, 1000, 1, 13, 1, 0, -1, true));
  return m;
}

}  // namespace

ModelSpec builtin_model(const std::string& name) {
  ModelSpec m;
  if (name == "resnet18")
    m = resnet_basic(name, {2, 2, 2, 2});
  else if (name == "resnet34")
    m = resnet_basic(name, {3, 4, 6, 3});
  else if (name == "resnet50")
    m = resnet50();
  else if (name == "squeezenet1.1")
    m = squeezenet11();
  else
    throw config_error("unknown model preset: " + name);
  m.validate();
  return m;
}

PlatformSpec builtin_platform(const std::string& name) {
  PlatformSpec p;
  p.name = name;
  if (name == "z7045") {
    p.freq_mhz = 150.0;
    p.dsp = 900;
    p.cfpga_bits = 19'200'000;  // 2.40 MB
    p.lut_capacity = 218'600;
  } else if (name == "zu7ev") {
    p.freq_mhz = 200.0;
    p.dsp = 1728;
    p.cfpga_bits = 38'000'000;  // 4.75 MB
    p.lut_capacity = 230'000;
  } else {
    throw config_error("unknown platform preset: " + name);
  }
  p.d_mac = 1;
  p.wl = 16;
  p.bw_in_gbs = 1.1;
  p.bw_out_gbs = 1.1;
  p.validate();
  return p;
}

RatioSchedule builtin_schedule(const std::string& name) {
  RatioSchedule s;
  s.name = name;
  std::string base = name;
  bool all3x3 = false;
  const std::string suffix = "_all3x3";
  if (base.size() > suffix.size() &&
      base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    all3x3 = true;
    base = base.substr(0, base.size() - suffix.size());
  }
  if (base == "none") {
    s.all_bypass = true;
  } else if (base == "ovsf50") {
    s.ratios = {1.0, 0.5, 0.5, 0.5};
  } else if (base == "ovsf25") {
    s.ratios = {1.0, 0.4, 0.25, 0.125};
  } else {
    throw config_error("unknown schedule preset: " + name);
  }
  s.include_ungrouped_3x3 = all3x3;
  return s;
}

std::vector<std::string> builtin_model_names() {
  return {"resnet18", "resnet34", "resnet50", "squeezenet1.1"};
}

std::vector<std::string> builtin_platform_names() { return {"z7045", "zu7ev"}; }

std::vector<std::string> builtin_schedule_names() {
  return {"none", "ovsf50", "ovsf25", "ovsf50_all3x3", "ovsf25_all3x3"};
}

std::vector<BandwidthTier> bandwidth_tiers() {
  return {{"1x", 1.1}, {"2x", 2.2}, {"4x", 4.5}, {"12x", 13.4}};
}

}  // namespace ovgen
