#pragma once

#include <cstdint>
#include <map>

#include "atvkit/metric.hpp"
#include "atvkit/ot_core.hpp"
#include "atvkit/process_law.hpp"

namespace atvkit {

// splitmix64 output finalizer (Steele, Lea, Flood 2014).
uint64_t splitmix64_mix(uint64_t z);

// Seed of suite instance `index` under `master`: output index of the
// canonical splitmix64 stream seeded with master, i.e.
// splitmix64_mix(master + (index + 1) * 0x9E3779B97F4A7C15). Keeps
// parallel workers deterministic and instances independent of each other.
uint64_t instance_seed(uint64_t master, uint64_t index);

// Small deterministic generator over splitmix64; identical output on every
// platform (no standard-library distributions involved).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t next_u64();
  double next_unit();            // [0, 1)
  int next_int(int n);           // uniform in [0, n)

 private:
  uint64_t state_;
};

enum class PairMode {
  kTilt,         // nu is a per-prefix exponential tilt of mu; nu << mu
  kIndependent,  // independent draw with random support thinning
  kSingular,     // nu charges a branch removed from mu; H(nu|mu) infinite
};

struct FixturePair {
  ProcessLaw mu;
  ProcessLaw nu;
  int horizon;
  int branching;
};

// Kernel probabilities are drawn on the grid k/4096 with every child at
// least 12% likely, so rows sum to exactly 1.0 in double arithmetic and
// prefix masses stay well above the bicausality tolerance floor. Atoms
// carry values on the unit grid 0, 1, ..., branching-1.
ProcessLaw random_law(Rng& rng, SpacesPtr spaces, bool thin_support);

// Draws T in [t_min, t_max] and branching in [b_min, b_max], then a law
// pair per the mode. Atom values make the value-derived metrics available.
FixturePair make_fixture_pair(uint64_t seed, int t_min, int t_max, PairMode mode,
                              int b_min = 2, int b_max = 3);

// Random dense transport instance with grid costs (k/64, k < 256) and grid
// marginals; sizes in [2, max_size] per side.
TransportProblem random_transport_problem(Rng& rng, int max_size);

// Weight table over every full path of the space list, values on the grid
// k/8 with k <= 16.
std::map<Path, double> random_weight_table(Rng& rng, const SpacesPtr& spaces);

}  // namespace atvkit
