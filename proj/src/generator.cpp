#include "atvkit/generator.hpp"

#include <algorithm>
#include <cmath>

namespace atvkit {

uint64_t splitmix64_mix(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t instance_seed(uint64_t master, uint64_t index) {
  return splitmix64_mix(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return splitmix64_mix(state_);
}

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Rng::next_int(int n) {
  if (n <= 0) throw InvalidParameter("next_int needs a positive bound");
  // Rejection sampling keeps the draw exactly uniform.
  uint64_t bound = static_cast<uint64_t>(n);
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return static_cast<int>(v % bound);
}

namespace {

constexpr int kGrid = 4096;
// Per-child floor of 12% keeps every kernel probability, and with it every
// prefix mass at the horizons we generate, comfortably above 1e-3.
constexpr int kChildFloor = 491;

// Integer weights summing to kGrid over the given children; probabilities
// w/kGrid are exact doubles and sum to exactly 1.0.
std::vector<int> grid_simplex_draw(Rng& rng, int children) {
  const int base = kChildFloor;
  int rest = kGrid - children * base;
  std::vector<int> cuts;
  cuts.reserve(static_cast<size_t>(children) + 1);
  cuts.push_back(0);
  for (int i = 0; i + 1 < children; ++i) cuts.push_back(rng.next_int(rest + 1));
  cuts.push_back(rest);
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> weights(static_cast<size_t>(children));
  for (int i = 0; i < children; ++i) {
    weights[static_cast<size_t>(i)] = base + cuts[static_cast<size_t>(i) + 1] -
                                      cuts[static_cast<size_t>(i)];
  }
  return weights;
}

SpacesPtr make_spaces(int horizon, int branching) {
  SpaceList spaces;
  for (int t = 0; t < horizon; ++t) {
    std::vector<Atom> atoms;
    for (int a = 0; a < branching; ++a) {
      atoms.push_back(Atom{"a" + std::to_string(a), static_cast<double>(a)});
    }
    spaces.emplace_back(std::move(atoms));
  }
  return std::make_shared<const SpaceList>(std::move(spaces));
}

std::vector<double> random_row(Rng& rng, int width, bool thin_support) {
  std::vector<int> support(static_cast<size_t>(width));
  for (int a = 0; a < width; ++a) support[static_cast<size_t>(a)] = a;
  if (thin_support && width >= 2 && rng.next_int(4) == 0) {
    support.erase(support.begin() + rng.next_int(width));
  }
  std::vector<int> weights = grid_simplex_draw(rng, static_cast<int>(support.size()));
  std::vector<double> row(static_cast<size_t>(width), 0.0);
  for (size_t k = 0; k < support.size(); ++k) {
    row[static_cast<size_t>(support[k])] =
        static_cast<double>(weights[k]) / static_cast<double>(kGrid);
  }
  return row;
}

using KernelMap = std::map<Path, std::vector<double>>;

KernelMap random_kernels(Rng& rng, const SpacesPtr& spaces, bool thin_support) {
  KernelMap kernels;
  const int T = static_cast<int>(spaces->size());
  Path prefix;
  auto walk = [&](auto&& self) -> void {
    const int t = static_cast<int>(prefix.size());
    if (t == T) return;
    std::vector<double> row =
        random_row(rng, (*spaces)[static_cast<size_t>(t)].size(), thin_support);
    for (int a = 0; a < static_cast<int>(row.size()); ++a) {
      if (row[static_cast<size_t>(a)] <= 0.0) continue;
      prefix.push_back(a);
      self(self);
      prefix.pop_back();
    }
    kernels.emplace(prefix, std::move(row));
  };
  walk(walk);
  return kernels;
}

// nu_row[a] proportional to mu_row[a] * exp(theta * value_a); support and
// reachable tree shape match mu exactly, so nu << mu by construction.
KernelMap tilted_kernels(Rng& rng, const ProcessLaw& mu) {
  KernelMap kernels;
  for (const auto& [prefix, row] : mu.kernels()) {
    const Space& sp = (*mu.spaces())[prefix.size()];
    double magnitude = 0.1 + 0.5 * rng.next_unit();
    double theta = rng.next_int(2) == 0 ? magnitude : -magnitude;
    std::vector<double> tilted(row.size(), 0.0);
    double z = 0.0;
    for (int a = 0; a < static_cast<int>(row.size()); ++a) {
      if (row[static_cast<size_t>(a)] <= 0.0) continue;
      double v = sp.atom(a).value.value_or(static_cast<double>(a));
      tilted[static_cast<size_t>(a)] = row[static_cast<size_t>(a)] * std::exp(theta * v);
      z += tilted[static_cast<size_t>(a)];
    }
    for (double& p : tilted) p /= z;
    kernels.emplace(prefix, std::move(tilted));
  }
  return kernels;
}

}  // namespace

ProcessLaw random_law(Rng& rng, SpacesPtr spaces, bool thin_support) {
  KernelMap kernels = random_kernels(rng, spaces, thin_support);
  return ProcessLaw(std::move(spaces), std::move(kernels));
}

FixturePair make_fixture_pair(uint64_t seed, int t_min, int t_max, PairMode mode,
                              int b_min, int b_max) {
  if (t_min < 1 || t_max < t_min) {
    throw InvalidParameter("fixture horizons must satisfy 1 <= t_min <= t_max");
  }
  if (b_min < 2 || b_max < b_min) {
    throw InvalidParameter("fixture branching must satisfy 2 <= b_min <= b_max");
  }
  Rng rng(seed);
  const int T = t_min + rng.next_int(t_max - t_min + 1);
  const int branching = b_min + rng.next_int(b_max - b_min + 1);
  SpacesPtr spaces = make_spaces(T, branching);
  switch (mode) {
    case PairMode::kTilt: {
      ProcessLaw mu = random_law(rng, spaces, /*thin_support=*/false);
      ProcessLaw nu(spaces, tilted_kernels(rng, mu));
      return FixturePair{std::move(mu), std::move(nu), T, branching};
    }
    case PairMode::kIndependent: {
      ProcessLaw mu = random_law(rng, spaces, /*thin_support=*/true);
      ProcessLaw nu = random_law(rng, spaces, /*thin_support=*/true);
      return FixturePair{std::move(mu), std::move(nu), T, branching};
    }
    case PairMode::kSingular: {
      // mu loses one branch of the root kernel; nu keeps full support, so
      // nu charges a mu-null cylinder.
      KernelMap mu_kernels = random_kernels(rng, spaces, /*thin_support=*/false);
      int dropped = rng.next_int(branching);
      {
        std::vector<int> support;
        for (int a = 0; a < branching; ++a) {
          if (a != dropped) support.push_back(a);
        }
        std::vector<int> weights =
            grid_simplex_draw(rng, static_cast<int>(support.size()));
        std::vector<double> row(static_cast<size_t>(branching), 0.0);
        for (size_t k = 0; k < support.size(); ++k) {
          row[static_cast<size_t>(support[k])] =
              static_cast<double>(weights[k]) / static_cast<double>(kGrid);
        }
        mu_kernels[Path{}] = std::move(row);
      }
      ProcessLaw mu(spaces, std::move(mu_kernels));
      ProcessLaw nu = random_law(rng, spaces, /*thin_support=*/false);
      return FixturePair{std::move(mu), std::move(nu), T, branching};
    }
  }
  throw InvalidParameter("unknown fixture mode");
}

TransportProblem random_transport_problem(Rng& rng, int max_size) {
  if (max_size < 2) throw InvalidParameter("transport instances need size >= 2");
  TransportProblem out;
  out.rows = 2 + rng.next_int(max_size - 1);
  out.cols = 2 + rng.next_int(max_size - 1);
  out.cost.resize(static_cast<size_t>(out.rows) * out.cols);
  for (double& c : out.cost) c = static_cast<double>(rng.next_int(256)) / 64.0;
  auto marginal = [&](int size) {
    // Strictly positive grid draw, exact total 1.0.
    std::vector<int> weights = grid_simplex_draw(rng, size);
    std::vector<double> m(static_cast<size_t>(size));
    for (int i = 0; i < size; ++i) {
      m[static_cast<size_t>(i)] =
          static_cast<double>(weights[static_cast<size_t>(i)]) / static_cast<double>(kGrid);
    }
    return m;
  };
  out.source = marginal(out.rows);
  out.target = marginal(out.cols);
  return out;
}

std::map<Path, double> random_weight_table(Rng& rng, const SpacesPtr& spaces) {
  std::map<Path, double> table;
  Path path;
  auto walk = [&](auto&& self) -> void {
    if (path.size() == spaces->size()) {
      table.emplace(path, static_cast<double>(rng.next_int(17)) / 8.0);
      return;
    }
    const Space& sp = (*spaces)[path.size()];
    for (int a = 0; a < sp.size(); ++a) {
      path.push_back(a);
      self(self);
      path.pop_back();
    }
  };
  walk(walk);
  return table;
}

}  // namespace atvkit
