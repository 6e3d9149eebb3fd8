// Exhaustive design-space exploration: enumerate tile/generator sizes, prune
// infeasible points, pick the highest-throughput design deterministically.
#pragma once

#include <cstdint>
#include <vector>

#include "ovgen/perf.hpp"
#include "ovgen/resources.hpp"

namespace ovgen {

struct SearchSpace {
  std::vector<std::int64_t> m;
  std::vector<std::int64_t> t_r;
  std::vector<std::int64_t> t_p;
  std::vector<std::int64_t> t_c;

  // Powers of two: M in [1, 1024], tile dims in [4, 512].
  static SearchSpace default_grid();
  std::int64_t size() const;
  void validate() const;
};

struct SearchStats {
  std::int64_t total = 0;
  std::int64_t pruned = 0;
  std::int64_t evaluated = 0;
};

struct RankedPoint {
  DesignPoint sigma;
  double throughput = 0.0;
};

struct SearchResult {
  DesignPoint best;
  PerformanceEstimate perf;
  ResourceUsage resources;
  SearchStats stats;
  std::vector<RankedPoint> topk;  // filled when top_k > 0, best first
};

// True when (tput_a, sigma_a) beats (tput_b, sigma_b): higher throughput, or
// equal throughput and lexicographically smaller <M, T_R, T_P, T_C>.
bool better_design(double tput_a, const DesignPoint& a, double tput_b, const DesignPoint& b);

// Evaluates every point in the space. Infeasible points are pruned before the
// performance model runs. Throws when nothing is feasible, naming the
// constraint that pruned the most points. `threads` <= 0 picks a default.
SearchResult search(const ModelSpec& scheduled, const PlatformSpec& platform,
                    const SearchSpace& space, Variant variant, bool selective,
                    int threads = 0, int top_k = 0);

}  // namespace ovgen
