// Command-line front end: compress weights, run the generator/engine
// simulators, evaluate the analytical models, and search design points.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ovgen/basis.hpp"
#include "ovgen/compress.hpp"
#include "ovgen/dse.hpp"
#include "ovgen/engine.hpp"
#include "ovgen/model.hpp"
#include "ovgen/networks.hpp"
#include "ovgen/perf.hpp"
#include "ovgen/resources.hpp"
#include "ovgen/tensor.hpp"
#include "ovgen/wgen.hpp"

namespace {

using namespace ovgen;

struct Opts {
  std::string model;
  std::string platform = "z7045";
  std::string schedule = "none";
  std::string weights;
  std::string compressed;
  std::string sigma;
  std::string bw;
  std::string variant = "unzip";
  std::string selective = "on";
  std::string mode = "fixed16";
  std::string out;
  std::string format = "md";
  std::string trace;
  std::uint64_t seed = 1;
  int quant_frac = 8;
  int topk = 0;
  int threads = 0;
};

bool file_exists(const std::string& p) {
  std::error_code ec;
  return std::filesystem::exists(p, ec) && !std::filesystem::is_directory(p, ec);
}

ModelSpec resolve_model(const std::string& s) {
  if (s.empty()) throw config_error("a model name or file is required (--model)");
  return file_exists(s) ? load_model_file(s) : builtin_model(s);
}

PlatformSpec resolve_platform(const std::string& s) {
  return file_exists(s) ? load_platform_file(s) : builtin_platform(s);
}

RatioSchedule resolve_schedule(const std::string& s) {
  return file_exists(s) ? load_schedule_file(s) : builtin_schedule(s);
}

DesignPoint parse_sigma(const std::string& s) {
  std::vector<std::int64_t> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stoll(item));
  if (v.size() != 4) throw config_error("--sigma expects M,TR,TP,TC");
  DesignPoint d;
  d.m = v[0];
  d.t_r = v[1];
  d.t_p = v[2];
  d.t_c = v[3];
  d.validate();
  return d;
}

void apply_bandwidth(PlatformSpec& plat, const std::string& bw) {
  if (bw.empty()) return;
  for (const BandwidthTier& t : bandwidth_tiers())
    if (t.label == bw) {
      plat.bw_in_gbs = plat.bw_out_gbs = t.gbs;
      return;
    }
  double v = std::stod(bw);
  if (v <= 0.0) throw config_error("--bw must be positive");
  plat.bw_in_gbs = plat.bw_out_gbs = v;
}

bool parse_on_off(const std::string& s, const char* flag) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw config_error(std::string(flag) + " expects on|off");
}

NumericMode parse_mode(const std::string& s) {
  if (s == "float") return NumericMode::flt;
  if (s == "fixed16") return NumericMode::fixed16;
  throw config_error("--mode expects float|fixed16");
}

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw config_error("cannot open for writing: " + out);
  f << text;
}

// Environment-provided defaults, overridden by explicit flags.
void load_env_defaults(Opts& o) {
  const char* path = std::getenv("OVGEN_CONFIG");
  if (!path || !file_exists(path)) return;
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad config file ") + path + ": " + e.what());
  }
  auto pick = [&j](const char* key, std::string& into) {
    if (j.contains(key) && j[key].is_string()) into = j[key].get<std::string>();
  };
  pick("model", o.model);
  pick("platform", o.platform);
  pick("schedule", o.schedule);
  pick("variant", o.variant);
  pick("mode", o.mode);
  pick("bw", o.bw);
}

CompressedModel build_compressed(const Opts& o, const ModelSpec& scheduled,
                                 const TensorContainer& weights) {
  CompressedModel cm;
  cm.model_name = scheduled.name;
  for (std::size_t i = 0; i < scheduled.layers.size(); ++i) {
    const LayerSpec& l = scheduled.layers[i];
    CompressedLayer cl;
    if (l.repr_mode == ReprMode::bypass) {
      cl.repr_mode = ReprMode::bypass;
      cl.n_in = l.n_in;
      cl.n_out = l.n_out;
      cl.k = l.kind == LayerKind::conv ? l.k : 1;
      cl.raw = layer_filters(weights, l);
    } else {
      FilterBank fb = layer_filters(weights, l);
      cl = compress_layer(fb, l.rho, l.repr_mode);
      cl = quantize_alphas(cl, 16, o.quant_frac);
    }
    cl.layer_id = static_cast<int>(i);
    cl.name = l.name;
    cm.layers.push_back(std::move(cl));
  }
  return cm;
}

int cmd_compress(const Opts& o) {
  ModelSpec model = resolve_model(o.model);
  RatioSchedule sched = resolve_schedule(o.schedule);
  ModelSpec scheduled = apply_schedule(model, sched);
  TensorContainer weights =
      o.weights.empty() ? random_weights(model, o.seed) : read_weights(o.weights);

  CompressedModel cm = build_compressed(o, scheduled, weights);

  ParamCounts pc = count_params(scheduled);
  std::ostringstream os;
  os << "# seed=" << o.seed << " model=" << model.name << " schedule=" << sched.name << "\n";
  os << "params_original," << pc.original << "\n";
  os << "params_compressed," << pc.compressed << "\n";
  os << "layer,mode,rho,retained,max_recon_err\n";
  for (const CompressedLayer& cl : cm.layers) {
    if (cl.repr_mode == ReprMode::bypass) {
      os << cl.name << ",bypass,,,\n";
      continue;
    }
    int order = 0;
    while ((1 << order) < cl.basis_len) ++order;
    OvsfBasis basis = build_basis(order);
    FilterBank rec = reconstruct_layer(cl, basis);
    FilterBank orig = layer_filters(weights, scheduled.layers[static_cast<std::size_t>(cl.layer_id)]);
    double err = 0.0;
    for (std::size_t j = 0; j < rec.data.size(); ++j)
      err = std::max(err, std::abs(static_cast<double>(rec.data[j]) - orig.data[j]));
    os << cl.name << "," << to_string(cl.repr_mode) << "," << cl.ratio << ","
       << cl.retained_count << "," << err << "\n";
  }
  std::cout << os.str();
  if (!o.out.empty()) {
    write_compressed(o.out, cm);
    std::cout << "written: " << o.out << "\n";
  }
  return 0;
}

int cmd_simulate(const Opts& o) {
  ModelSpec model = resolve_model(o.model);
  RatioSchedule sched = resolve_schedule(o.schedule);
  ModelSpec scheduled = apply_schedule(model, sched);
  DesignPoint sigma = parse_sigma(o.sigma);
  NumericMode mode = parse_mode(o.mode);

  CompressedModel cm;
  if (!o.compressed.empty()) {
    cm = read_compressed(o.compressed);
  } else {
    TensorContainer weights =
        o.weights.empty() ? random_weights(model, o.seed) : read_weights(o.weights);
    cm = build_compressed(o, scheduled, weights);
  }

  std::ofstream trace_out;
  if (!o.trace.empty()) {
    trace_out.open(o.trace);
    if (!trace_out) throw config_error("cannot open for writing: " + o.trace);
    trace_out << "layer,tile_p,tile_c,subtiles,cycles\n";
  }

  std::cout << "# seed=" << o.seed << " sigma=" << sigma.m << "," << sigma.t_r << ","
            << sigma.t_p << "," << sigma.t_c << " mode=" << o.mode << "\n";
  bool all_ok = true;
  for (const CompressedLayer& cl : cm.layers) {
    if (cl.repr_mode == ReprMode::bypass) continue;

    WgenResult sim = simulate_wgen(cl, sigma, mode);
    WeightMatrix ref = tiwgen_reference(cl, sigma, mode);
    WeightMatrix dense = dense_weight_matrix(cl, mode);

    bool equiv;
    if (mode == NumericMode::fixed16) {
      equiv = sim.weights.ival == ref.ival && ref.ival == dense.ival;
    } else {
      double err = 0.0;
      for (std::size_t i = 0; i < dense.fval.size(); ++i) {
        err = std::max(err, std::abs(sim.weights.fval[i] - dense.fval[i]));
        err = std::max(err, std::abs(ref.fval[i] - dense.fval[i]));
      }
      equiv = err < 1e-6;
    }

    // Per-tile cycle law and its closed-form total.
    std::int64_t per_tile = ceil_div(sigma.t_p * sigma.t_c, sigma.m) *
                            static_cast<std::int64_t>(cl.retained_count);
    bool law = true;
    for (const TileTrace& t : sim.trace.tiles) law = law && t.cycles == per_tile;
    law = law && sim.trace.total_cycles ==
                     per_tile * ceil_div(sim.weights.rows, sigma.t_p) *
                         ceil_div(sim.weights.cols, sigma.t_c);

    // Engine equivalence on a random activation block.
    std::int64_t r_rows = std::min<std::int64_t>(sigma.t_r, 64);
    bool engine_ok = true;
    {
      std::mt19937_64 rng(o.seed ^ static_cast<std::uint64_t>(cl.layer_id));
      if (mode == NumericMode::fixed16) {
        MatI16 x(r_rows, sim.weights.rows);
        std::uniform_int_distribution<int> dist(-128, 127);
        for (auto& v : x.a) v = static_cast<std::int16_t>(dist(rng));
        MatI32 y1 = tiled_gemm(x, weights_as_fixed(sim.weights), sigma, nullptr);
        MatI32 y2 = tiled_gemm(x, weights_as_fixed(dense), sigma, nullptr);
        engine_ok = y1.a == y2.a;
      } else {
        MatF x(r_rows, sim.weights.rows);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (auto& v : x.a) v = dist(rng);
        MatF y1 = tiled_gemm(x, weights_as_float(sim.weights), sigma);
        MatF y2 = tiled_gemm(x, weights_as_float(dense), sigma);
        double err = 0.0;
        for (std::size_t i = 0; i < y1.a.size(); ++i)
          err = std::max(err, std::abs(y1.a[i] - y2.a[i]));
        engine_ok = err < 1e-6;
      }
    }

    all_ok = all_ok && equiv && law && engine_ok;
    std::cout << cl.name << ": equivalence " << (equiv ? "PASS" : "FAIL") << ", cycle law "
              << (law ? "PASS" : "FAIL") << ", engine " << (engine_ok ? "PASS" : "FAIL")
              << " (cycles=" << sim.trace.total_cycles
              << ", alpha_ports=" << sim.trace.max_alpha_ports << "/"
              << sim.trace.provisioned_ports << ", realign=" << sim.trace.realignments << ")\n";

    if (trace_out.is_open())
      for (const TileTrace& t : sim.trace.tiles)
        trace_out << cl.name << "," << t.tile_p << "," << t.tile_c << "," << t.subtiles << ","
                  << t.cycles << "\n";
  }
  if (!all_ok) {
    std::cerr << "simulation invariants failed\n";
    return 1;
  }
  return 0;
}

int cmd_estimate(const Opts& o) {
  ModelSpec model = resolve_model(o.model);
  RatioSchedule sched = resolve_schedule(o.schedule);
  ModelSpec scheduled = apply_schedule(model, sched);
  PlatformSpec plat = resolve_platform(o.platform);
  apply_bandwidth(plat, o.bw);
  DesignPoint sigma = parse_sigma(o.sigma);
  Variant variant = variant_from_string(o.variant);
  bool selective = parse_on_off(o.selective, "--selective");

  Feasibility f = feasible(sigma, scheduled, plat, variant, selective);
  std::ostringstream os;
  os << "# seed=" << o.seed << " platform=" << plat.name << " bw=" << plat.bw_in_gbs
     << "GB/s variant=" << o.variant << " selective=" << o.selective << "\n";
  os << "# resources: dsp=" << f.use.vec.dsp << "/" << plat.dsp
     << " bram_bits=" << f.use.vec.bram_bits << "/" << plat.cfpga_bits
     << " luts=" << f.use.vec.luts << "/" << plat.lut_capacity
     << (f.ok ? "" : " INFEASIBLE") << "\n";
  if (!f.ok) {
    os << "# violated:";
    for (const std::string& v : f.violated) os << " " << v;
    os << "\n";
  }
  PerformanceEstimate pe = estimate(scheduled, sigma, plat, variant, selective);
  os << (o.format == "csv" ? report_csv(pe) : report_markdown(pe));
  write_or_print(o.out, os.str());
  return 0;
}

int cmd_dse(const Opts& o) {
  ModelSpec model = resolve_model(o.model);
  RatioSchedule sched = resolve_schedule(o.schedule);
  ModelSpec scheduled = apply_schedule(model, sched);
  PlatformSpec plat = resolve_platform(o.platform);
  apply_bandwidth(plat, o.bw);
  Variant variant = variant_from_string(o.variant);
  bool selective = parse_on_off(o.selective, "--selective");

  SearchResult res = search(scheduled, plat, SearchSpace::default_grid(), variant, selective,
                            o.threads, o.topk);

  std::ostringstream os;
  os << "# seed=" << o.seed << " platform=" << plat.name << " bw=" << plat.bw_in_gbs
     << "GB/s variant=" << o.variant << " selective=" << o.selective << "\n";
  os << "best_sigma," << res.best.m << "," << res.best.t_r << "," << res.best.t_p << ","
     << res.best.t_c << "\n";
  os << "throughput_inf_s," << res.perf.throughput << "\n";
  os << "space_total," << res.stats.total << "\n";
  os << "space_pruned," << res.stats.pruned << "\n";
  os << "space_evaluated," << res.stats.evaluated << "\n";
  os << "dsp," << res.resources.vec.dsp << "\n";
  os << "bram_bits," << res.resources.vec.bram_bits << "\n";
  os << "luts," << res.resources.vec.luts << "\n";
  if (!res.topk.empty()) {
    os << "rank,m,t_r,t_p,t_c,throughput_inf_s\n";
    for (std::size_t i = 0; i < res.topk.size(); ++i)
      os << i + 1 << "," << res.topk[i].sigma.m << "," << res.topk[i].sigma.t_r << ","
         << res.topk[i].sigma.t_p << "," << res.topk[i].sigma.t_c << ","
         << res.topk[i].throughput << "\n";
  }
  write_or_print(o.out, os.str());
  return 0;
}

int cmd_report(const Opts& o) {
  ModelSpec model = resolve_model(o.model);
  RatioSchedule sched = resolve_schedule(o.schedule);
  PlatformSpec plat_base = resolve_platform(o.platform);
  bool selective = parse_on_off(o.selective, "--selective");

  ModelSpec scheduled = apply_schedule(model, sched);
  ModelSpec plain = apply_schedule(model, builtin_schedule("none"));
  ParamCounts pc = count_params(scheduled);

  std::vector<BandwidthTier> tiers;
  if (o.bw.empty())
    tiers = bandwidth_tiers();
  else {
    PlatformSpec probe = plat_base;
    apply_bandwidth(probe, o.bw);
    tiers.push_back({o.bw, probe.bw_in_gbs});
  }

  std::ostringstream os;
  os << "# seed=" << o.seed << " model=" << model.name << " schedule=" << sched.name
     << " platform=" << plat_base.name << "\n";
  os << "# params original=" << pc.original << " compressed=" << pc.compressed << "\n";
  const bool csv = o.format == "csv";
  if (csv)
    os << "bw_label,bw_gbs,baseline_inf_s,baseline_sigma,gen_inf_s,gen_sigma,speedup\n";
  else {
    os << "| bw | baseline inf/s | baseline sigma | generated inf/s | generated sigma | "
          "speedup |\n";
    os << "|---|---|---|---|---|---|\n";
  }
  for (const BandwidthTier& tier : tiers) {
    PlatformSpec plat = plat_base;
    plat.bw_in_gbs = plat.bw_out_gbs = tier.gbs;
    SearchResult base =
        search(plain, plat, SearchSpace::default_grid(), Variant::baseline, false, o.threads, 0);
    SearchResult gen = search(scheduled, plat, SearchSpace::default_grid(), Variant::unzip,
                              selective, o.threads, 0);
    double speedup = gen.perf.throughput / base.perf.throughput;
    auto sig = [](const DesignPoint& d) {
      std::ostringstream s;
      s << d.m << "/" << d.t_r << "/" << d.t_p << "/" << d.t_c;
      return s.str();
    };
    if (csv)
      os << tier.label << "," << tier.gbs << "," << base.perf.throughput << ","
         << sig(base.best) << "," << gen.perf.throughput << "," << sig(gen.best) << ","
         << speedup << "\n";
    else
      os << "| " << tier.label << " (" << tier.gbs << " GB/s) | " << base.perf.throughput
         << " | " << sig(base.best) << " | " << gen.perf.throughput << " | " << sig(gen.best)
         << " | " << speedup << " |\n";
  }
  write_or_print(o.out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Opts o;
  load_env_defaults(o);

  CLI::App app{"CNN weight compression, on-chip weights-generator simulation, and design-space "
               "exploration"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* c) {
    c->add_option("--model", o.model, "builtin model name or model JSON file");
    c->add_option("--schedule", o.schedule, "builtin schedule name or schedule JSON file");
    c->add_option("--seed", o.seed, "seed for generated random weights");
  };

  CLI::App* c_compress = app.add_subcommand("compress", "compress weights into coefficient form");
  add_common(c_compress);
  c_compress->add_option("--weights", o.weights, "input weights container (.ovwt)");
  c_compress->add_option("--out", o.out, "output compressed container path");
  c_compress->add_option("--quant-frac", o.quant_frac, "fractional bits for quantization");

  CLI::App* c_sim = app.add_subcommand("simulate", "run the weights-generator simulator");
  add_common(c_sim);
  c_sim->add_option("--weights", o.weights, "input weights container (.ovwt)");
  c_sim->add_option("--compressed", o.compressed, "compressed container to load");
  c_sim->add_option("--sigma", o.sigma, "design point M,TR,TP,TC")->required();
  c_sim->add_option("--mode", o.mode, "float|fixed16");
  c_sim->add_option("--trace", o.trace, "write per-tile cycle trace CSV");

  CLI::App* c_est = app.add_subcommand("estimate", "analytical performance estimate");
  add_common(c_est);
  c_est->add_option("--platform", o.platform, "builtin platform name or platform JSON file");
  c_est->add_option("--sigma", o.sigma, "design point M,TR,TP,TC")->required();
  c_est->add_option("--bw", o.bw, "bandwidth tier label (1x/2x/4x/12x) or GB/s");
  c_est->add_option("--variant", o.variant, "unzip|baseline");
  c_est->add_option("--selective", o.selective, "input-selective PEs on|off");
  c_est->add_option("--out", o.out, "output file (default stdout)");
  c_est->add_option("--format", o.format, "md|csv");

  CLI::App* c_dse = app.add_subcommand("dse", "exhaustive design-space search");
  add_common(c_dse);
  c_dse->add_option("--platform", o.platform, "builtin platform name or platform JSON file");
  c_dse->add_option("--bw", o.bw, "bandwidth tier label or GB/s");
  c_dse->add_option("--variant", o.variant, "unzip|baseline");
  c_dse->add_option("--selective", o.selective, "input-selective PEs on|off");
  c_dse->add_option("--topk", o.topk, "also list the top-K points");
  c_dse->add_option("--threads", o.threads, "worker threads (0 = auto)");
  c_dse->add_option("--out", o.out, "output file (default stdout)");
  c_dse->add_option("--format", o.format, "md|csv");

  CLI::App* c_rep = app.add_subcommand("report", "bandwidth sweep vs the streaming baseline");
  add_common(c_rep);
  c_rep->add_option("--platform", o.platform, "builtin platform name or platform JSON file");
  c_rep->add_option("--bw", o.bw, "single bandwidth instead of the full sweep");
  c_rep->add_option("--selective", o.selective, "input-selective PEs on|off");
  c_rep->add_option("--threads", o.threads, "worker threads (0 = auto)");
  c_rep->add_option("--out", o.out, "output file (default stdout)");
  c_rep->add_option("--format", o.format, "md|csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c_compress)) return cmd_compress(o);
    if (app.got_subcommand(c_sim)) return cmd_simulate(o);
    if (app.got_subcommand(c_est)) return cmd_estimate(o);
    if (app.got_subcommand(c_dse)) return cmd_dse(o);
    if (app.got_subcommand(c_rep)) return cmd_report(o);
  } catch (const numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
