#include <cstring>
#include <string>

#include <doctest.h>

#include "ovgen/dse.hpp"
#include "ovgen/networks.hpp"

using namespace ovgen;

namespace {

ModelSpec toy_model() {
  ModelSpec m;
  m.name = "toy";
  LayerSpec l;
  l.name = "body";
  l.n_in = 8;
  l.n_out = 12;
  l.k = 3;
  l.h = 10;
  l.w = 10;
  l.p = 1;
  l.rho = 0.5;
  l.repr_mode = ReprMode::crop4;
  m.layers.push_back(l);
  LayerSpec stem;
  stem.name = "stem";
  stem.n_in = 3;
  stem.n_out = 8;
  stem.k = 3;
  stem.h = 10;
  stem.w = 10;
  stem.p = 1;
  stem.repr_mode = ReprMode::bypass;
  m.layers.push_back(stem);
  return m;
}

SearchSpace small_space() {
  SearchSpace s;
  s.m = {1, 4, 16, 64};
  s.t_r = {4, 8, 16, 32};
  s.t_p = {4, 8, 16, 32};
  s.t_c = {4, 8, 16, 32};
  return s;
}

// Unthreaded re-run of the same enumeration and comparator.
struct BruteResult {
  bool has = false;
  DesignPoint best;
  double tput = 0.0;
  std::int64_t pruned = 0;
};

BruteResult brute_force(const ModelSpec& m, const PlatformSpec& p, const SearchSpace& s,
                        Variant variant, bool selective) {
  BruteResult res;
  for (std::int64_t mi : s.m)
    for (std::int64_t tr : s.t_r)
      for (std::int64_t tp : s.t_p)
        for (std::int64_t tc : s.t_c) {
          DesignPoint sigma{mi, tr, tp, tc};
          if (!feasible(sigma, m, p, variant, selective).ok) {
            ++res.pruned;
            continue;
          }
          double tput = estimate(m, sigma, p, variant, selective).throughput;
          if (!res.has || better_design(tput, sigma, res.tput, res.best)) {
            res.has = true;
            res.tput = tput;
            res.best = sigma;
          }
        }
  return res;
}

}  // namespace

TEST_CASE("the default grid spans the documented candidates") {
  SearchSpace s = SearchSpace::default_grid();
  CHECK(s.m.size() == 11);
  CHECK(s.m.front() == 1);
  CHECK(s.m.back() == 1024);
  CHECK(s.t_r.size() == 8);
  CHECK(s.t_r.front() == 4);
  CHECK(s.t_r.back() == 512);
  CHECK(s.size() == 5632);
  SearchSpace bad;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = s;
  bad.t_p = {0};
  CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("design comparison prefers throughput then small dimensions") {
  DesignPoint a{1, 4, 4, 4};
  DesignPoint b{2, 4, 4, 4};
  CHECK(better_design(2.0, b, 1.0, a));
  CHECK_FALSE(better_design(1.0, b, 2.0, a));
  CHECK(better_design(1.0, a, 1.0, b));
  CHECK_FALSE(better_design(1.0, b, 1.0, a));
  DesignPoint c{1, 4, 4, 8};
  CHECK(better_design(1.0, a, 1.0, c));
}

TEST_CASE("search equals an unthreaded brute force") {
  ModelSpec m = toy_model();
  PlatformSpec p = builtin_platform("z7045");
  SearchSpace s = small_space();
  BruteResult ref = brute_force(m, p, s, Variant::unzip, true);
  REQUIRE(ref.has);
  SearchResult res = search(m, p, s, Variant::unzip, true, 4);
  CHECK(res.best == ref.best);
  CHECK(res.perf.throughput == ref.tput);
  CHECK(res.stats.total == s.size());
  CHECK(res.stats.pruned == ref.pruned);
  CHECK(res.stats.evaluated == s.size() - ref.pruned);
}

TEST_CASE("search results do not depend on the thread count") {
  ModelSpec m = toy_model();
  PlatformSpec p = builtin_platform("z7045");
  SearchSpace s = small_space();
  SearchResult one = search(m, p, s, Variant::unzip, true, 1, 5);
  SearchResult many = search(m, p, s, Variant::unzip, true, 7, 5);
  CHECK(one.best == many.best);
  CHECK(one.perf.throughput == many.perf.throughput);
  CHECK(one.stats.pruned == many.stats.pruned);
  REQUIRE(one.topk.size() == many.topk.size());
  for (std::size_t i = 0; i < one.topk.size(); ++i) {
    CHECK(one.topk[i].sigma == many.topk[i].sigma);
    CHECK(one.topk[i].throughput == many.topk[i].throughput);
  }
}

TEST_CASE("a single feasible point wins by default") {
  ModelSpec m = toy_model();
  PlatformSpec p = builtin_platform("z7045");
  SearchSpace s;
  s.m = {16};
  s.t_r = {8};
  s.t_p = {8};
  s.t_c = {8};
  SearchResult res = search(m, p, s, Variant::unzip, true);
  CHECK(res.best == DesignPoint{16, 8, 8, 8});
  CHECK(res.stats.evaluated == 1);
}

TEST_CASE("an infeasible space reports the tightest constraint") {
  ModelSpec m = toy_model();
  PlatformSpec p = builtin_platform("z7045");
  p.dsp = 1;  // every candidate needs at least M + 16 MACs
  try {
    search(m, p, small_space(), Variant::unzip, true);
    FAIL("search should have thrown");
  } catch (const validation_error& e) {
    CHECK(std::string(e.what()).find("dsp") != std::string::npos);
  }
}

TEST_CASE("raising resource ceilings never lowers the best throughput") {
  ModelSpec m = toy_model();
  SearchSpace s = small_space();
  PlatformSpec p = builtin_platform("z7045");
  SearchResult before = search(m, p, s, Variant::unzip, true, 2);
  PlatformSpec roomy = p;
  roomy.dsp *= 2;
  roomy.lut_capacity *= 2;
  SearchResult after = search(m, roomy, s, Variant::unzip, true, 2);
  CHECK(after.perf.throughput >= before.perf.throughput);
}

TEST_CASE("the baseline array ignores M, so ties resolve to the smallest") {
  ModelSpec m = apply_schedule(toy_model(), builtin_schedule("none"));
  PlatformSpec p = builtin_platform("z7045");
  SearchResult res = search(m, p, small_space(), Variant::baseline, false, 3);
  CHECK(res.best.m == 1);
}

TEST_CASE("top-k rankings are sorted and truncated") {
  ModelSpec m = toy_model();
  PlatformSpec p = builtin_platform("z7045");
  SearchResult res = search(m, p, small_space(), Variant::unzip, true, 4, 10);
  REQUIRE(res.topk.size() == 10);
  CHECK(res.topk[0].sigma == res.best);
  for (std::size_t i = 1; i < res.topk.size(); ++i)
    CHECK(better_design(res.topk[i - 1].throughput, res.topk[i - 1].sigma,
                        res.topk[i].throughput, res.topk[i].sigma));
}
