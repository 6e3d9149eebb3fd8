#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "ovgen/compress.hpp"
#include "ovgen/model.hpp"

#ifndef OVGEN_CLI_PATH
#error "OVGEN_CLI_PATH must point at the built command-line binary"
#endif

using namespace ovgen;

namespace {

std::string temp_file(const char* stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

int run(const std::string& args) {
  std::string cmd = std::string("\"") + OVGEN_CLI_PATH + "\" " + args;
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

int run_quiet(const std::string& args) { return run(args + " > /dev/null 2>&1"); }

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// A one-layer model written to disk so CLI runs stay fast.
std::string write_toy_model() {
  ModelSpec m;
  m.name = "toy";
  LayerSpec l;
  l.name = "body";
  l.n_in = 2;
  l.n_out = 6;
  l.k = 3;
  l.h = 8;
  l.w = 8;
  l.s = 1;
  l.p = 1;
  l.group = 0;
  m.layers.push_back(l);
  std::string path = temp_file("ovgen_cli_toy_model.json");
  std::ofstream f(path);
  f << serialize_model(m);
  return path;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run_quiet("--help") == 0);
  CHECK(run_quiet("") == 2);
  CHECK(run_quiet("frobnicate") == 2);
  CHECK(run_quiet("simulate --model resnet18") == 2);  // missing required --sigma
}

TEST_CASE("bad inputs exit with the usage code") {
  CHECK(run_quiet("simulate --model nadda --sigma 4,4,4,4") == 2);
  CHECK(run_quiet("compress --model resnet18 --weights /nonexistent.ovwt") == 2);
  std::string toy = write_toy_model();
  CHECK(run_quiet("estimate --model \"" + toy + "\" --sigma 1,2,3") == 2);
  CHECK(run_quiet("estimate --model \"" + toy + "\" --sigma 4,4,4,4 --variant magic") == 2);
  std::remove(toy.c_str());
}

TEST_CASE("simulate validates a small model end to end") {
  std::string toy = write_toy_model();
  std::string log = temp_file("ovgen_cli_sim.log");
  int rc = run("simulate --model \"" + toy + "\" --schedule ovsf50 --sigma 8,8,8,4 > \"" +
               log + "\" 2>&1");
  CHECK(rc == 0);
  std::string text = slurp(log);
  CHECK(text.find("equivalence PASS") != std::string::npos);
  CHECK(text.find("cycle law PASS") != std::string::npos);
  CHECK(text.find("engine PASS") != std::string::npos);
  std::remove(toy.c_str());
  std::remove(log.c_str());
}

TEST_CASE("estimate writes a report file") {
  std::string toy = write_toy_model();
  std::string out = temp_file("ovgen_cli_est.csv");
  int rc = run_quiet("estimate --model \"" + toy + "\" --schedule ovsf50 --sigma 16,8,8,8" +
                     " --format csv --out \"" + out + "\"");
  CHECK(rc == 0);
  std::string text = slurp(out);
  CHECK(text.find("# seed=") == 0);
  CHECK(text.find("layer,r,p,c,") != std::string::npos);
  CHECK(text.find("throughput_inf_s,") != std::string::npos);
  std::remove(toy.c_str());
  std::remove(out.c_str());
}

TEST_CASE("compressed containers round trip through the CLI") {
  std::string toy = write_toy_model();
  std::string ovcm = temp_file("ovgen_cli_round.ovcm");
  CHECK(run_quiet("compress --model \"" + toy + "\" --schedule ovsf50 --out \"" + ovcm +
                  "\"") == 0);
  CHECK(run_quiet("simulate --model \"" + toy + "\" --schedule ovsf50 --compressed \"" + ovcm +
                  "\" --sigma 8,8,8,4") == 0);
  std::remove(toy.c_str());
  std::remove(ovcm.c_str());
}

TEST_CASE("simulating an unmappable container fails with the invariant code") {
  // Per-filter selection loads fine but cannot be generated in hardware.
  FilterBank fb = FilterBank::zeros(4, 2, 3);
  for (std::size_t i = 0; i < fb.data.size(); ++i)
    fb.data[i] = static_cast<float>(i % 7) * 0.1f - 0.3f;
  CompressedModel cm;
  cm.model_name = "toy";
  CompressedLayer cl = compress_layer(fb, 0.5, ReprMode::crop4, SelectionMode::per_filter);
  cl.name = "body";
  cm.layers.push_back(cl);
  std::string ovcm = temp_file("ovgen_cli_perfilter.ovcm");
  write_compressed(ovcm, cm);
  std::string toy = write_toy_model();
  CHECK(run_quiet("simulate --model \"" + toy + "\" --compressed \"" + ovcm +
                  "\" --sigma 4,4,4,4 --mode float") == 2);
  std::remove(toy.c_str());
  std::remove(ovcm.c_str());
}

TEST_CASE("environment config supplies defaults") {
  std::string toy = write_toy_model();
  std::string cfg = temp_file("ovgen_cli_cfg.json");
  {
    std::ofstream f(cfg);
    f << "{\"model\": \"" << toy << "\", \"schedule\": \"ovsf50\"}";
  }
  std::string cmd = std::string("OVGEN_CONFIG=\"") + cfg + "\" \"" + OVGEN_CLI_PATH +
                    "\" simulate --sigma 8,8,8,4 > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  CHECK((WIFEXITED(rc) ? WEXITSTATUS(rc) : -1) == 0);
  std::remove(toy.c_str());
  std::remove(cfg.c_str());
}
