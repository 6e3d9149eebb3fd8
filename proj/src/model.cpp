#include "ovgen/model.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace ovgen {

using nlohmann::json;

void LayerSpec::validate() const {
  if (n_in < 1 || n_out < 1 || k < 1 || h < 1 || w < 1 || s < 1 || p < 0)
    throw validation_error("layer " + name + ": dims must be >= 1 (padding >= 0)");
  if (rho <= 0.0 || rho > 1.0)
    throw validation_error("layer " + name + ": rho must be in (0, 1]");
  if (kind == LayerKind::conv && (h + 2 * p < k || w + 2 * p < k))
    throw validation_error("layer " + name + ": kernel exceeds padded input");
  if (repr_mode == ReprMode::direct && !is_pow2(static_cast<std::int64_t>(k) * k))
    throw validation_error("layer " + name + ": direct mode requires K^2 power of two");
  if ((repr_mode == ReprMode::crop4 || repr_mode == ReprMode::pool4) && k != 3)
    throw validation_error("layer " + name + ": crop4/pool4 require K=3");
}

int LayerSpec::retained_count() const {
  if (repr_mode == ReprMode::bypass) return 0;
  int j = static_cast<int>(std::ceil(rho * basis_len() - 1e-9));
  return j < 1 ? 1 : j;
}

std::int64_t LayerSpec::weight_count() const {
  std::int64_t weights;
  if (kind == LayerKind::fc)
    weights = static_cast<std::int64_t>(n_in) * n_out;
  else
    weights = static_cast<std::int64_t>(n_in) * n_out * k * k;
  return weights + (has_bias ? n_out : 0);
}

void ModelSpec::validate() const {
  if (layers.empty()) throw validation_error("model " + name + " has no layers");
  for (const LayerSpec& l : layers) l.validate();
}

int ModelSpec::k_max() const {
  int best = 1;
  for (const LayerSpec& l : layers) {
    if (l.repr_mode == ReprMode::bypass) continue;
    int rep = (l.repr_mode == ReprMode::direct) ? l.k : 4;
    if (rep > best) best = rep;
  }
  return best;
}

bool ModelSpec::any_compressed() const {
  for (const LayerSpec& l : layers)
    if (l.repr_mode != ReprMode::bypass) return true;
  return false;
}

WorkloadTuple to_workload(const LayerSpec& layer) {
  layer.validate();
  if (layer.kind == LayerKind::fc)
    return WorkloadTuple{1, layer.n_in, layer.n_out};

  // Ceiling form of the output-position count. Real convolution arithmetic
  // floors instead; the two agree whenever the stride divides evenly, which
  // holds for every layer the property tests sample.
  auto out_dim = [&](int dim) {
    return ceil_div(static_cast<std::int64_t>(dim) + 2 * layer.p - layer.k + layer.s,
                    layer.s);
  };
  std::int64_t oh = out_dim(layer.h);
  std::int64_t ow = out_dim(layer.w);
  if (oh < 1 || ow < 1)
    throw validation_error("layer " + layer.name + ": degenerate output size");
  return WorkloadTuple{oh * ow, static_cast<std::int64_t>(layer.n_in) * layer.k * layer.k,
                       layer.n_out};
}

void PlatformSpec::validate() const {
  if (freq_mhz <= 0 || dsp < 1 || d_mac < 1 || cfpga_bits < 1 || lut_capacity < 1 ||
      bw_in_gbs <= 0 || bw_out_gbs <= 0)
    throw validation_error("platform " + name + ": all capacities must be positive");
  if (wl != 8 && wl != 16 && wl != 32)
    throw validation_error("platform " + name + ": wordlength must be 8, 16, or 32");
}

ModelSpec apply_schedule(const ModelSpec& model, const RatioSchedule& schedule) {
  ModelSpec out = model;
  for (LayerSpec& l : out.layers) {
    l.repr_mode = ReprMode::bypass;
    l.rho = 1.0;
    if (schedule.all_bypass) continue;
    int group = l.group;
    if (group < 0 && schedule.include_ungrouped_3x3 && l.kind == LayerKind::conv && l.k == 3)
      group = 0;
    if (group < 0) continue;
    if (group >= static_cast<int>(schedule.ratios.size()))
      throw config_error("schedule " + schedule.name + " has no ratio for group " +
                         std::to_string(group) + " (layer " + l.name + ")");
    l.rho = schedule.ratios[static_cast<std::size_t>(group)];
    l.repr_mode = (l.k == 3) ? schedule.mode_3x3 : ReprMode::direct;
    l.validate();
  }
  return out;
}

ParamCounts count_params(const ModelSpec& scheduled_model) {
  ParamCounts counts;
  for (const LayerSpec& l : scheduled_model.layers) {
    counts.original += l.weight_count();
    if (l.repr_mode == ReprMode::bypass) {
      counts.compressed += l.weight_count();
    } else {
      counts.compressed += static_cast<std::int64_t>(l.n_in) * l.n_out * l.retained_count() +
                           (l.has_bias ? l.n_out : 0);
    }
  }
  return counts;
}

ParamCounts count_params(const ModelSpec& model, const RatioSchedule& schedule) {
  return count_params(apply_schedule(model, schedule));
}

namespace {

json layer_to_json(const LayerSpec& l) {
  json j;
  j["name"] = l.name;
  j["kind"] = (l.kind == LayerKind::conv) ? "conv" : "fc";
  j["n_in"] = l.n_in;
  j["n_out"] = l.n_out;
  j["k"] = l.k;
  j["h"] = l.h;
  j["w"] = l.w;
  j["s"] = l.s;
  j["p"] = l.p;
  j["rho"] = l.rho;
  j["repr_mode"] = to_string(l.repr_mode);
  j["has_bias"] = l.has_bias;
  j["group"] = l.group;
  return j;
}

LayerSpec layer_from_json(const json& j, const std::string& where) {
  LayerSpec l;
  try {
    l.name = j.at("name").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "conv")
      l.kind = LayerKind::conv;
    else if (kind == "fc")
      l.kind = LayerKind::fc;
    else
      throw parse_error(where + ": unknown layer kind '" + kind + "'");
    l.n_in = j.at("n_in").get<int>();
    l.n_out = j.at("n_out").get<int>();
    l.k = j.value("k", 1);
    l.h = j.value("h", 1);
    l.w = j.value("w", 1);
    l.s = j.value("s", 1);
    l.p = j.value("p", 0);
    l.rho = j.value("rho", 1.0);
    l.repr_mode = repr_mode_from_string(j.value("repr_mode", std::string("bypass")));
    l.has_bias = j.value("has_bias", false);
    l.group = j.value("group", -1);
  } catch (const json::exception& e) {
    throw parse_error(where + ": " + e.what());
  }
  return l;
}

}  // namespace

std::string serialize_model(const ModelSpec& model) {
  json j;
  j["name"] = model.name;
  j["layers"] = json::array();
  for (const LayerSpec& l : model.layers) j["layers"].push_back(layer_to_json(l));
  return j.dump(2);
}

ModelSpec parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw parse_error(std::string("model spec: ") + e.what());
  }
  ModelSpec m;
  try {
    m.name = j.at("name").get<std::string>();
    int idx = 0;
    for (const json& lj : j.at("layers"))
      m.layers.push_back(layer_from_json(lj, "model spec layer " + std::to_string(idx++)));
  } catch (const json::exception& e) {
    throw parse_error(std::string("model spec: ") + e.what());
  }
  m.validate();
  return m;
}

std::string serialize_platform(const PlatformSpec& p) {
  json j;
  j["name"] = p.name;
  j["freq_mhz"] = p.freq_mhz;
  j["dsp"] = p.dsp;
  j["d_mac"] = p.d_mac;
  j["cfpga_bits"] = p.cfpga_bits;
  j["lut_capacity"] = p.lut_capacity;
  j["bw_in_gbs"] = p.bw_in_gbs;
  j["bw_out_gbs"] = p.bw_out_gbs;
  j["wl"] = p.wl;
  j["lut_model"] = {{"c0", p.lut.c0},       {"c1", p.lut.c1},
                    {"c2", p.lut.c2},       {"c3", p.lut.c3},
                    {"enforce", p.lut.enforce}, {"synthetic", p.lut.synthetic}};
  return j.dump(2);
}

PlatformSpec parse_platform(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw parse_error(std::string("platform spec: ") + e.what());
  }
  PlatformSpec p;
  try {
    p.name = j.at("name").get<std::string>();
    p.freq_mhz = j.at("freq_mhz").get<double>();
    p.dsp = j.at("dsp").get<std::int64_t>();
    p.d_mac = j.value("d_mac", 1);
    p.cfpga_bits = j.at("cfpga_bits").get<std::int64_t>();
    p.lut_capacity = j.at("lut_capacity").get<std::int64_t>();
    p.bw_in_gbs = j.at("bw_in_gbs").get<double>();
    p.bw_out_gbs = j.at("bw_out_gbs").get<double>();
    p.wl = j.value("wl", 16);
    if (j.contains("lut_model")) {
      const json& lm = j["lut_model"];
      p.lut.c0 = lm.value("c0", p.lut.c0);
      p.lut.c1 = lm.value("c1", p.lut.c1);
      p.lut.c2 = lm.value("c2", p.lut.c2);
      p.lut.c3 = lm.value("c3", p.lut.c3);
      p.lut.enforce = lm.value("enforce", p.lut.enforce);
      p.lut.synthetic = lm.value("synthetic", p.lut.synthetic);
    }
  } catch (const json::exception& e) {
    throw parse_error(std::string("platform spec: ") + e.what());
  }
  p.validate();
  return p;
}

std::string serialize_schedule(const RatioSchedule& s) {
  json j;
  j["name"] = s.name;
  j["ratios"] = s.ratios;
  j["mode_3x3"] = to_string(s.mode_3x3);
  j["include_ungrouped_3x3"] = s.include_ungrouped_3x3;
  j["all_bypass"] = s.all_bypass;
  return j.dump(2);
}

RatioSchedule parse_schedule(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw parse_error(std::string("schedule spec: ") + e.what());
  }
  RatioSchedule s;
  try {
    s.name = j.at("name").get<std::string>();
    s.ratios = j.value("ratios", std::vector<double>{});
    s.mode_3x3 = repr_mode_from_string(j.value("mode_3x3", std::string("crop4")));
    s.include_ungrouped_3x3 = j.value("include_ungrouped_3x3", false);
    s.all_bypass = j.value("all_bypass", false);
  } catch (const json::exception& e) {
    throw parse_error(std::string("schedule spec: ") + e.what());
  }
  for (double r : s.ratios)
    if (r <= 0.0 || r > 1.0) throw parse_error("schedule spec: ratios must be in (0, 1]");
  return s;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw parse_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

ModelSpec load_model_file(const std::string& path) { return parse_model(slurp(path)); }
PlatformSpec load_platform_file(const std::string& path) { return parse_platform(slurp(path)); }
RatioSchedule load_schedule_file(const std::string& path) { return parse_schedule(slurp(path)); }

}  // namespace ovgen
