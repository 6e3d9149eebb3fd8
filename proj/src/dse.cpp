#include "ovgen/dse.hpp"

#include <algorithm>
#include <thread>

namespace ovgen {

SearchSpace SearchSpace::default_grid() {
  SearchSpace s;
  for (std::int64_t v = 1; v <= 1024; v *= 2) s.m.push_back(v);
  for (std::int64_t v = 4; v <= 512; v *= 2) {
    s.t_r.push_back(v);
    s.t_p.push_back(v);
    s.t_c.push_back(v);
  }
  return s;
}

std::int64_t SearchSpace::size() const {
  return static_cast<std::int64_t>(m.size()) * static_cast<std::int64_t>(t_r.size()) *
         static_cast<std::int64_t>(t_p.size()) * static_cast<std::int64_t>(t_c.size());
}

void SearchSpace::validate() const {
  if (m.empty() || t_r.empty() || t_p.empty() || t_c.empty())
    throw config_error("search space has an empty candidate list");
  for (std::int64_t v : m)
    if (v < 1) throw config_error("search space M candidates must be >= 1");
  for (const auto* dim : {&t_r, &t_p, &t_c})
    for (std::int64_t v : *dim)
      if (v < 1) throw config_error("search space tile candidates must be >= 1");
}

namespace {

bool lex_less(const DesignPoint& a, const DesignPoint& b) {
  if (a.m != b.m) return a.m < b.m;
  if (a.t_r != b.t_r) return a.t_r < b.t_r;
  if (a.t_p != b.t_p) return a.t_p < b.t_p;
  return a.t_c < b.t_c;
}

}  // namespace

bool better_design(double tput_a, const DesignPoint& a, double tput_b, const DesignPoint& b) {
  if (tput_a != tput_b) return tput_a > tput_b;
  return lex_less(a, b);
}

SearchResult search(const ModelSpec& scheduled, const PlatformSpec& platform,
                    const SearchSpace& space, Variant variant, bool selective, int threads,
                    int top_k) {
  space.validate();
  scheduled.validate();
  platform.validate();

  const std::int64_t total = space.size();
  int nthreads = threads;
  if (nthreads <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    nthreads = hw == 0 ? 4 : static_cast<int>(std::min<unsigned>(hw, 8));
  }
  nthreads = static_cast<int>(std::min<std::int64_t>(nthreads, total));

  struct Local {
    bool has = false;
    double tput = 0.0;
    DesignPoint best;
    std::int64_t pruned = 0;
    std::int64_t viol_dsp = 0, viol_bram = 0, viol_lut = 0;
    std::vector<RankedPoint> ranked;
  };
  std::vector<Local> locals(static_cast<std::size_t>(nthreads));

  const std::int64_t nr = static_cast<std::int64_t>(space.t_r.size());
  const std::int64_t np = static_cast<std::int64_t>(space.t_p.size());
  const std::int64_t nc = static_cast<std::int64_t>(space.t_c.size());

  auto worker = [&](int tid) {
    Local& loc = locals[static_cast<std::size_t>(tid)];
    for (std::int64_t idx = tid; idx < total; idx += nthreads) {
      DesignPoint sigma;
      sigma.m = space.m[static_cast<std::size_t>(idx / (nr * np * nc))];
      sigma.t_r = space.t_r[static_cast<std::size_t>((idx / (np * nc)) % nr)];
      sigma.t_p = space.t_p[static_cast<std::size_t>((idx / nc) % np)];
      sigma.t_c = space.t_c[static_cast<std::size_t>(idx % nc)];

      Feasibility f = feasible(sigma, scheduled, platform, variant, selective);
      if (!f.ok) {
        ++loc.pruned;
        for (const std::string& v : f.violated) {
          if (v == "dsp") ++loc.viol_dsp;
          else if (v == "bram") ++loc.viol_bram;
          else ++loc.viol_lut;
        }
        continue;
      }
      PerformanceEstimate pe = estimate(scheduled, sigma, platform, variant, selective);
      if (top_k > 0) loc.ranked.push_back({sigma, pe.throughput});
      if (!loc.has || better_design(pe.throughput, sigma, loc.tput, loc.best)) {
        loc.has = true;
        loc.tput = pe.throughput;
        loc.best = sigma;
      }
    }
  };

  if (nthreads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (std::thread& t : pool) t.join();
  }

  // Sequential reduction: the comparator is a strict total order over
  // (throughput, sigma), so the result is independent of thread layout.
  SearchResult res;
  res.stats.total = total;
  bool has = false;
  double best_tput = 0.0;
  std::int64_t viol_dsp = 0, viol_bram = 0, viol_lut = 0;
  for (const Local& loc : locals) {
    res.stats.pruned += loc.pruned;
    viol_dsp += loc.viol_dsp;
    viol_bram += loc.viol_bram;
    viol_lut += loc.viol_lut;
    if (loc.has && (!has || better_design(loc.tput, loc.best, best_tput, res.best))) {
      has = true;
      best_tput = loc.tput;
      res.best = loc.best;
    }
  }
  res.stats.evaluated = total - res.stats.pruned;

  if (!has) {
    const char* tightest = "dsp";
    std::int64_t worst = viol_dsp;
    if (viol_bram > worst) {
      tightest = "bram";
      worst = viol_bram;
    }
    if (viol_lut > worst) tightest = "lut";
    throw validation_error(std::string("no feasible design in the search space ") +
                           "(tightest constraint: " + tightest + ")");
  }

  res.perf = estimate(scheduled, res.best, platform, variant, selective);
  res.resources = usage(res.best, scheduled, platform, variant, selective);

  if (top_k > 0) {
    for (Local& loc : locals)
      res.topk.insert(res.topk.end(), loc.ranked.begin(), loc.ranked.end());
    std::sort(res.topk.begin(), res.topk.end(), [](const RankedPoint& a, const RankedPoint& b) {
      return better_design(a.throughput, a.sigma, b.throughput, b.sigma);
    });
    if (static_cast<int>(res.topk.size()) > top_k)
      res.topk.resize(static_cast<std::size_t>(top_k));
  }
  return res;
}

}  // namespace ovgen
