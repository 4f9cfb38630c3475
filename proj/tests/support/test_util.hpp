#pragma once

#include <cstdint>

#include "gep/instance.hpp"
#include "gep/model.hpp"
#include "gep/rng.hpp"

namespace gep::test {

// Small randomized instance for property suites: dimensions drawn from the
// given ranges, series from the synthetic generator.
inline GepInstance random_instance(std::uint64_t seed, int g_max = 5, int n_max = 5,
                                   int t_min = 6, int t_max = 48) {
  Rng rng(seed);
  GenConfig cfg;
  cfg.G = 1 + static_cast<int>(rng.next_below(g_max));
  cfg.N = 1 + static_cast<int>(rng.next_below(n_max));
  cfg.T = t_min + static_cast<int>(rng.next_below(t_max - t_min + 1));
  cfg.seed = rng.next_u64();
  return generate_instance(cfg);
}

// Uniformly random binary investment vector.
inline Vec random_binaries(const GepInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  Vec b(inst.num_units());
  for (int j = 0; j < b.size(); ++j) b[j] = rng.next_below(2) ? 1.0 : 0.0;
  return b;
}

}  // namespace gep::test
