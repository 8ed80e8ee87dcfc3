#pragma once

// Encounter-by-encounter Bernoulli simulation used as an independent check on
// the closed-form cumulative probability. Deliberately uses the standard
// library generator rather than the project's own.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace heartcast::testing {

struct UrnGroup {
  std::vector<long> encounters_per_step;  // integer encounters in (t_{k-1}, t_k], index 0 unused
  std::vector<double> p;                  // match probability per encounter at t_k
};

/// Fraction of trials with a first match at or before each grid index.
inline std::vector<double> simulate_urn(const std::vector<UrnGroup>& groups, std::size_t steps,
                                        std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> first(steps + 1, 0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::size_t matched_at = steps;  // steps means never
    for (std::size_t k = 1; k < steps && matched_at == steps; ++k) {
      for (const auto& g : groups) {
        for (long e = 0; e < g.encounters_per_step[k]; ++e) {
          if (unit(gen) < g.p[k]) {
            matched_at = k;
            break;
          }
        }
        if (matched_at != steps) break;
      }
    }
    ++first[matched_at];
  }
  std::vector<double> c(steps, 0.0);
  std::size_t running = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    running += first[k];
    c[k] = static_cast<double>(running) / static_cast<double>(trials);
  }
  return c;
}

}  // namespace heartcast::testing
