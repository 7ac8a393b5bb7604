#include <doctest.h>

#include <cmath>
#include <set>

#include "atvkit/adapted_ot.hpp"
#include "atvkit/generator.hpp"
#include "atvkit/oracle.hpp"
#include "test_support.hpp"

using namespace atvkit;

namespace {

PathMetric values_metric(const ProcessLaw& law) {
  return PathMetric::from_values(law.spaces());
}

Path zero_path(const ProcessLaw& law) {
  return Path(static_cast<size_t>(law.horizon()), 0);
}

// Independent product coupling mu (x) nu.
Coupling product_coupling(const ProcessLaw& mu, const ProcessLaw& nu) {
  Coupling out(mu.spaces(), mu.horizon());
  PathMeasure pm = mu.path_measure();
  PathMeasure pn = nu.path_measure();
  for (const auto& [x, mx] : pm.atoms()) {
    for (const auto& [y, my] : pn.atoms()) {
      out.add(x, y, mx * my);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("check_bicausal accepts independent couplings and the T=1 case") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    FixturePair pair =
        make_fixture_pair(instance_seed(301, seed), 2, 4, PairMode::kIndependent);
    BicausalityReport report =
        check_bicausal(product_coupling(pair.mu, pair.nu), pair.mu, pair.nu);
    CHECK(report.ok);
    CHECK(report.worst_violation <= 1e-12);
  }
  // No conditioning steps at T = 1: every coupling is bicausal.
  FixturePair pair = make_fixture_pair(instance_seed(302, 0), 1, 1, PairMode::kIndependent);
  Coupling any = product_coupling(pair.mu, pair.nu);
  CHECK(check_bicausal(any, pair.mu, pair.nu).ok);
}

TEST_CASE("check_bicausal flags an anticipating coupling, against brute force") {
  // mu is the fair two-step coin; nu is the law of (B, B) with B fair.
  ProcessLaw mu = testkit::iid_coin(2);
  auto spaces = mu.spaces();
  std::map<Path, std::vector<double>> kernels;
  kernels[{}] = {0.5, 0.5};
  kernels[{0}] = {1.0, 0.0};
  kernels[{1}] = {0.0, 1.0};
  ProcessLaw nu(spaces, std::move(kernels));

  // Y = (X2, X2): the first coordinate of Y reveals the future of X.
  Coupling pi(spaces, 2);
  pi.add({0, 0}, {0, 0}, 0.25);
  pi.add({0, 1}, {1, 1}, 0.25);
  pi.add({1, 0}, {0, 0}, 0.25);
  pi.add({1, 1}, {1, 1}, 0.25);

  BicausalityReport report = check_bicausal(pi, mu, nu);
  CHECK(!report.ok);

  // Brute-force the worst conditional-table discrepancy directly from the
  // atom list, over both sides of the factorization.
  double worst = 0.0;
  for (int side = 0; side < 2; ++side) {
    std::map<std::pair<Path, Path>, std::map<Path, double>> table;
    std::map<std::pair<Path, Path>, double> mass;
    std::map<Path, std::map<Path, double>> own_table;
    std::map<Path, double> own_mass;
    for (const auto& [atom, m] : pi.atoms()) {
      Path self = side == 0 ? atom.first : atom.second;
      Path other = side == 0 ? atom.second : atom.first;
      Path sp(self.begin(), self.begin() + 1), op(other.begin(), other.begin() + 1);
      Path suffix(self.begin() + 1, self.end());
      table[{sp, op}][suffix] += m;
      mass[{sp, op}] += m;
      own_table[sp][suffix] += m;
      own_mass[sp] += m;
    }
    for (const auto& [key, m] : mass) {
      std::set<Path> suffixes;
      for (const auto& [s, v] : table[key]) suffixes.insert(s);
      for (const auto& [s, v] : own_table[key.first]) suffixes.insert(s);
      for (const Path& s : suffixes) {
        double got = table[key].count(s) ? table[key][s] / m : 0.0;
        double want = own_table[key.first].count(s)
                          ? own_table[key.first][s] / own_mass[key.first]
                          : 0.0;
        worst = std::max(worst, std::abs(got - want));
      }
    }
  }
  CHECK(report.worst_violation == doctest::Approx(worst).epsilon(1e-14));
  CHECK(report.worst_violation == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.witness.has_value());
}

TEST_CASE("check_bicausal rejects non-couplings") {
  ProcessLaw mu = testkit::iid_coin(2);
  Coupling bad(mu.spaces(), 2);
  bad.add({0, 0}, {0, 0}, 1.0);  // misses most of mu's mass
  CHECK_THROWS_AS(check_bicausal(bad, mu, mu), NotACoupling);
}

TEST_CASE("nested_distance: T=1 equals wasserstein; identical laws give zero") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    FixturePair pair =
        make_fixture_pair(instance_seed(303, seed), 1, 1, PairMode::kIndependent);
    PathMetric metric = values_metric(pair.mu);
    NestedResult nested = nested_distance(pair.mu, pair.nu, metric, 1.0);
    double w = wasserstein(pair.mu, pair.nu, metric, 1.0);
    CHECK(std::abs(nested.value - w) <= 1e-10);
  }
  FixturePair pair = make_fixture_pair(instance_seed(304, 0), 3, 3, PairMode::kTilt);
  PathMetric metric = values_metric(pair.mu);
  NestedResult self = nested_distance(pair.mu, pair.mu, metric, 1.0);
  CHECK(self.value == doctest::Approx(0.0).epsilon(1e-14));
  for (const auto& [pair_xy, mass] : self.coupling.atoms()) {
    CHECK(pair_xy.first == pair_xy.second);
  }
}

TEST_CASE("nested_distance matches the bicausal oracle on 2-step pairs") {
  for (uint64_t seed = 0; seed < 12; ++seed) {
    FixturePair pair =
        make_fixture_pair(instance_seed(305, seed), 2, 2, PairMode::kIndependent, 2, 2);
    PathMetric metric = values_metric(pair.mu);
    NestedResult nested = nested_distance(pair.mu, pair.nu, metric, 1.0);
    double exact = oracle::rat_to_double(oracle::bicausal_lp(
        pair.mu, pair.nu,
        [&](const Path& x, const Path& y) { return metric.distance(x, y); }));
    CHECK(std::abs(nested.value - exact) <= 1e-8);
  }
}

TEST_CASE("nested_distance coupling is bicausal and attains the value") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    FixturePair pair =
        make_fixture_pair(instance_seed(306, seed), 1, 4, PairMode::kIndependent);
    PathMetric metric = values_metric(pair.mu);
    NestedResult nested = nested_distance(pair.mu, pair.nu, metric, 1.0);
    BicausalityReport report = check_bicausal(nested.coupling, pair.mu, pair.nu);
    CHECK(report.ok);
    CHECK(nested.coupling.marginal_defect(pair.mu, pair.nu) <= 1e-10);
    double integral = 0.0;
    for (const auto& [atoms, mass] : nested.coupling.atoms()) {
      integral += metric.distance(atoms.first, atoms.second) * mass;
    }
    CHECK(std::abs(integral - nested.value) <= 1e-9);
  }
}

TEST_CASE("the full-cost DP agrees with the stagewise DP for l1, p=1") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    FixturePair pair =
        make_fixture_pair(instance_seed(307, seed), 1, 4, PairMode::kIndependent);
    PathMetric metric = values_metric(pair.mu);
    double stagewise = nested_distance(pair.mu, pair.nu, metric, 1.0).value;
    double full = nested_distance_full_cost(pair.mu, pair.nu, metric, 1.0).value;
    CHECK(stagewise == doctest::Approx(full).epsilon(1e-11));
  }
}

TEST_CASE("nested_distance guards the non-separable configuration") {
  auto spaces = testkit::simple_spaces(7, {"a", "b"});
  Rng rng(instance_seed(308, 0));
  ProcessLaw mu = random_law(rng, spaces, false);
  ProcessLaw nu = random_law(rng, spaces, false);
  PathMetric metric = PathMetric::from_values(spaces);
  CHECK_NOTHROW(nested_distance(mu, nu, metric, 1.0));
  CHECK_THROWS_AS(nested_distance(mu, nu, metric, 2.0), InvalidParameter);
  PathMetric max_metric = PathMetric::from_values(spaces, PathMetric::Combine::Max);
  CHECK_THROWS_AS(nested_distance(mu, nu, max_metric, 1.0), InvalidParameter);
  // Within the cap the general program is admitted.
  auto small = testkit::simple_spaces(2, {"a", "b"});
  Rng rng2(instance_seed(308, 1));
  ProcessLaw mu2 = random_law(rng2, small, false);
  ProcessLaw nu2 = random_law(rng2, small, false);
  PathMetric max2 = PathMetric::from_values(small, PathMetric::Combine::Max);
  CHECK_NOTHROW(nested_distance(mu2, nu2, max2, 1.0));
}

TEST_CASE("build_gamma: diagonal at equality, diagonal first step at equal roots") {
  FixturePair pair = make_fixture_pair(instance_seed(309, 0), 3, 3, PairMode::kTilt);
  Coupling self = build_gamma(pair.mu, pair.mu);
  for (const auto& [atoms, mass] : self.atoms()) {
    CHECK(atoms.first == atoms.second);
  }
  CHECK(self.total() == doctest::Approx(1.0).epsilon(1e-12));

  // Equal first marginals, different kernels: the residual term of the
  // first coordinate is the zero measure, so x1 == y1 on every atom.
  auto spaces = testkit::simple_spaces(2, {"a", "b"});
  std::map<Path, std::vector<double>> mk, nk;
  mk[{}] = {0.5, 0.5};
  mk[{0}] = {0.25, 0.75};
  mk[{1}] = {0.75, 0.25};
  nk[{}] = {0.5, 0.5};
  nk[{0}] = {0.625, 0.375};
  nk[{1}] = {0.125, 0.875};
  ProcessLaw mu(spaces, mk), nu(spaces, nk);
  Coupling gamma = build_gamma(mu, nu);
  for (const auto& [atoms, mass] : gamma.atoms()) {
    CHECK(atoms.first[0] == atoms.second[0]);
  }
  CHECK(check_bicausal(gamma, mu, nu).ok);
}

TEST_CASE("build_gamma couples the laws and is bicausal on fixtures") {
  for (uint64_t seed = 0; seed < 12; ++seed) {
    FixturePair pair = make_fixture_pair(
        instance_seed(310, seed), 1, 4,
        seed % 2 ? PairMode::kIndependent : PairMode::kTilt);
    Coupling gamma = build_gamma(pair.mu, pair.nu);
    CHECK(gamma.marginal_defect(pair.mu, pair.nu) <= 1e-10);
    CHECK(check_bicausal(gamma, pair.mu, pair.nu).ok);
  }
}

TEST_CASE("atv_weighted: trivia, oracle agreement, scaling") {
  auto spaces = testkit::simple_spaces(2, {"H", "T"});
  ProcessLaw dx = testkit::dirac_law(spaces, {0, 0});
  ProcessLaw dy = testkit::dirac_law(spaces, {1, 1});
  PathMetric metric = PathMetric::from_values(spaces);
  WeightFunction phi = WeightFunction::rule(1.0, {0, 0}, 1.0, metric);
  CHECK(atv_weighted(dx, dx, phi) == 0.0);
  CHECK(atv_weighted(dx, dy, phi) ==
        doctest::Approx(phi({0, 0}) + phi({1, 1})).epsilon(1e-14));

  for (uint64_t seed = 0; seed < 10; ++seed) {
    FixturePair pair =
        make_fixture_pair(instance_seed(311, seed), 2, 2, PairMode::kIndependent, 2, 2);
    PathMetric m = values_metric(pair.mu);
    WeightFunction w = WeightFunction::rule(1.0, zero_path(pair.mu), 1.0, m);
    double atv = atv_weighted(pair.mu, pair.nu, w);
    double exact = oracle::rat_to_double(oracle::bicausal_lp(
        pair.mu, pair.nu, [&](const Path& x, const Path& y) {
          return x == y ? 0.0 : w(x) + w(y);
        }));
    CHECK(std::abs(atv - exact) <= 1e-8);
  }

  // Linearity in the weight: atv(c phi) = c atv(phi).
  FixturePair pair = make_fixture_pair(instance_seed(312, 0), 3, 3, PairMode::kTilt);
  double one = atv_weighted(pair.mu, pair.nu, WeightFunction::constant(1.0));
  double scaled = atv_weighted(pair.mu, pair.nu, WeightFunction::constant(3.5));
  CHECK(scaled == doctest::Approx(3.5 * one).epsilon(1e-12));
}

TEST_CASE("gamma_j: zero at equality, product form at j=1, mass cross-check") {
  FixturePair same = make_fixture_pair(instance_seed(313, 0), 3, 3, PairMode::kTilt);
  for (int j = 1; j <= same.horizon; ++j) {
    CHECK(gamma_j(same.mu, same.mu, j).total() == 0.0);
  }
  CHECK_THROWS_AS(gamma_j(same.mu, same.nu, 0), InvalidIndex);
  CHECK_THROWS_AS(gamma_j(same.mu, same.nu, same.horizon + 1), InvalidIndex);

  // Product laws: gamma_1 = |mu_1 - nu_1| (x) mu_2 (x) mu_3.
  auto spaces = testkit::simple_spaces(3, {"a", "b"});
  auto product_law = [&](double p1, double p2, double p3) {
    std::map<Path, std::vector<double>> kernels;
    kernels[{}] = {p1, 1.0 - p1};
    for (int a = 0; a < 2; ++a) {
      kernels[{a}] = {p2, 1.0 - p2};
      for (int b = 0; b < 2; ++b) kernels[{a, b}] = {p3, 1.0 - p3};
    }
    return ProcessLaw(spaces, std::move(kernels));
  };
  ProcessLaw mu = product_law(0.5, 0.25, 0.75);
  ProcessLaw nu = product_law(0.125, 0.5, 0.5);
  PathMeasure g1 = gamma_j(mu, nu, 1);
  double diff1 = std::abs(0.5 - 0.125) * 2.0;  // |mu_1 - nu_1| total
  CHECK(g1.total() == doctest::Approx(diff1).epsilon(1e-12));
  for (const auto& [path, mass] : g1.atoms()) {
    double expected = std::abs(0.5 - 0.125) *
                      (path[1] == 0 ? 0.25 : 0.75) * (path[2] == 0 ? 0.75 : 0.25);
    CHECK(mass == doctest::Approx(expected).epsilon(1e-12));
  }

  // Total masses recomputed by direct summation over (prefix, atom) pairs.
  for (uint64_t seed = 0; seed < 10; ++seed) {
    FixturePair pair = make_fixture_pair(
        instance_seed(314, seed), 1, 4,
        seed % 2 ? PairMode::kIndependent : PairMode::kTilt);
    const int T = pair.horizon;
    for (int j = 1; j <= T; ++j) {
      double expected = 0.0;
      PathMeasure meet_part = j == 1 ? PathMeasure(pair.mu.spaces(), 0, 0)
                                     : meet(pair.mu.projection(j - 1),
                                            pair.nu.projection(j - 1));
      if (j == 1) meet_part.add({}, 1.0);
      for (const auto& [prefix, mm] : meet_part.atoms()) {
        const std::vector<double>& mrow = pair.mu.kernel(prefix);
        const std::vector<double>& nrow = pair.nu.kernel(prefix);
        for (size_t a = 0; a < mrow.size(); ++a) {
          double diff = std::abs(mrow[a] - nrow[a]);
          if (j < T && mrow[a] <= 0.0) continue;  // pruned tail
          expected += mm * diff;  // tail laws carry total mass 1
        }
      }
      CHECK(gamma_j(pair.mu, pair.nu, j).total() ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("off-diagonal gamma mass split by first disagreement stage") {
  // Partitioning {x != y} by the first stage j with x_j != y_j, the
  // phi(x)-integral of gamma over each piece is dominated by the integral
  // of phi against gamma_j.
  for (uint64_t seed = 0; seed < 15; ++seed) {
    FixturePair pair = make_fixture_pair(
        instance_seed(324, seed), 1, 4,
        seed % 2 ? PairMode::kIndependent : PairMode::kTilt);
    PathMetric metric = values_metric(pair.mu);
    WeightFunction phi =
        WeightFunction::rule(1.0, zero_path(pair.mu), 1.0, metric);
    Coupling gamma = build_gamma(pair.mu, pair.nu);
    const int T = pair.horizon;
    std::vector<double> bucket(static_cast<size_t>(T), 0.0);
    for (const auto& [atoms, mass] : gamma.atoms()) {
      const auto& [x, y] = atoms;
      for (int t = 0; t < T; ++t) {
        if (x[static_cast<size_t>(t)] != y[static_cast<size_t>(t)]) {
          bucket[static_cast<size_t>(t)] += phi(x) * mass;
          break;
        }
      }
    }
    for (int j = 1; j <= T; ++j) {
      PathMeasure gj = gamma_j(pair.mu, pair.nu, j);
      double integral = 0.0;
      for (const auto& [path, mass] : gj.atoms()) integral += phi(path) * mass;
      CHECK(bucket[static_cast<size_t>(j - 1)] <= integral * (1.0 + 1e-9) + 1e-14);
    }
  }
}

TEST_CASE("lemma_rhs_terms and the tv-plus-sum bound") {
  FixturePair same = make_fixture_pair(instance_seed(315, 0), 2, 2, PairMode::kTilt);
  WeightFunction one = WeightFunction::constant(1.0);
  LemmaRhsTerms zero = lemma_rhs_terms(same.mu, same.mu, one);
  CHECK(zero.tv_term == 0.0);
  for (double g : zero.gamma_integrals) CHECK(g == 0.0);

  auto spaces = testkit::simple_spaces(2, {"H", "T"});
  ProcessLaw dx = testkit::dirac_law(spaces, {0, 0});
  ProcessLaw dy = testkit::dirac_law(spaces, {1, 1});
  PathMetric metric = PathMetric::from_values(spaces);
  WeightFunction phi = WeightFunction::rule(1.0, {0, 0}, 1.0, metric);
  LemmaRhsTerms dirac_terms = lemma_rhs_terms(dx, dy, phi);
  CHECK(dirac_terms.tv_term ==
        doctest::Approx(phi({0, 0}) + phi({1, 1})).epsilon(1e-14));
  double dirac_sum = 0.0;
  for (double g : dirac_terms.gamma_integrals) dirac_sum += g;
  CHECK(atv_weighted(dx, dy, phi) <=
        (dirac_terms.tv_term + 2.0 * dirac_sum) * (1.0 + 1e-9));

  for (uint64_t seed = 0; seed < 50; ++seed) {
    FixturePair pair = make_fixture_pair(
        instance_seed(316, seed), 1, 4,
        seed % 2 ? PairMode::kIndependent : PairMode::kTilt);
    PathMetric m = values_metric(pair.mu);
    for (const WeightFunction& w :
         {WeightFunction::constant(1.0),
          WeightFunction::rule(1.0, zero_path(pair.mu), 1.0, m)}) {
      LemmaRhsTerms terms = lemma_rhs_terms(pair.mu, pair.nu, w);
      double sum = 0.0;
      for (double g : terms.gamma_integrals) sum += g;
      double atv = atv_weighted(pair.mu, pair.nu, w);
      CHECK(atv <= (terms.tv_term + 2.0 * sum) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("psi_j: boundary cases and the Jensen bound at every node") {
  FixturePair pair = make_fixture_pair(instance_seed(317, 0), 3, 3, PairMode::kTilt);
  const int T = pair.horizon;
  PathMetric metric = values_metric(pair.mu);
  WeightFunction phi = WeightFunction::rule(1.0, zero_path(pair.mu), 1.0, metric);
  WeightFunction constant = WeightFunction::constant(2.25);

  for (const Path& full : pair.mu.supported_prefixes(T)) {
    CHECK(psi_j(pair.mu, phi, T, full) == doctest::Approx(phi(full)).epsilon(1e-14));
  }
  for (int j = 1; j <= T; ++j) {
    for (const Path& prefix : pair.mu.supported_prefixes(j)) {
      CHECK(psi_j(pair.mu, constant, j, prefix) == doctest::Approx(2.25).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(psi_j(pair.mu, phi, 1, Path{}), InvalidIndex);

  // Jensen: int e^{psi_j^2} dmu^{x_{1:j-1}} <= int e^{phi^2} dtail_{j-1}.
  for (int j = 1; j <= T; ++j) {
    for (const Path& prefix : pair.mu.supported_prefixes(j - 1)) {
      const std::vector<double>& row = pair.mu.kernel(prefix);
      double lhs = 0.0;
      for (int a = 0; a < static_cast<int>(row.size()); ++a) {
        if (row[static_cast<size_t>(a)] <= 0.0) continue;
        Path child = prefix;
        child.push_back(a);
        double psi = psi_j(pair.mu, phi, j, child);
        lhs += row[static_cast<size_t>(a)] * std::exp(psi * psi);
      }
      double rhs = 0.0;
      if (j == 1 && prefix.empty()) {
        PathMeasure pm = pair.mu.path_measure();
        for (const auto& [path, mass] : pm.atoms()) {
          double w = phi(path);
          rhs += mass * std::exp(w * w);
        }
      } else {
        PathMeasure tail = pair.mu.tail_law(prefix);
        for (const auto& [suffix, mass] : tail.atoms()) {
          Path full = prefix;
          full.insert(full.end(), suffix.begin(), suffix.end());
          double w = phi(full);
          rhs += mass * std::exp(w * w);
        }
      }
      CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("gamma_j entropy bound, including the infinite regime") {
  FixturePair same = make_fixture_pair(instance_seed(318, 0), 2, 2, PairMode::kTilt);
  WeightFunction one = WeightFunction::constant(1.0);
  GammaJBound trivially = gamma_j_entropy_bound(same.mu, same.mu, one, 1);
  CHECK(trivially.lhs == 0.0);
  CHECK(trivially.rhs.value == 0.0);

  FixturePair singular =
      make_fixture_pair(instance_seed(319, 0), 2, 3, PairMode::kSingular);
  bool saw_infinite = false;
  for (int j = 1; j <= singular.horizon; ++j) {
    GammaJBound bound = gamma_j_entropy_bound(singular.mu, singular.nu, one, j);
    saw_infinite = saw_infinite || bound.rhs.infinite;
  }
  CHECK(saw_infinite);

  for (uint64_t seed = 0; seed < 50; ++seed) {
    FixturePair pair = make_fixture_pair(instance_seed(320, seed), 1, 4, PairMode::kTilt);
    PathMetric m = values_metric(pair.mu);
    for (const WeightFunction& w :
         {WeightFunction::constant(1.0),
          WeightFunction::rule(1.0, zero_path(pair.mu), 1.0, m)}) {
      for (int j = 1; j <= pair.horizon; ++j) {
        GammaJBound bound = gamma_j_entropy_bound(pair.mu, pair.nu, w, j);
        REQUIRE(bound.rhs.is_finite());
        CHECK(bound.lhs <= bound.rhs.value * (1.0 + 1e-9));
      }
    }
  }
}

TEST_CASE("adapted bounds on random fixtures") {
  for (uint64_t seed = 0; seed < 40; ++seed) {
    FixturePair pair = make_fixture_pair(instance_seed(321, seed), 1, 4, PairMode::kTilt);
    PathMetric metric = values_metric(pair.mu);
    const int T = pair.horizon;
    WeightFunction one = WeightFunction::constant(1.0);

    double w1 = wasserstein(pair.mu, pair.nu, metric, 1.0);
    NestedResult nested = nested_distance(pair.mu, pair.nu, metric, 1.0);
    CHECK(w1 <= nested.value * (1.0 + 1e-9) + 1e-13);

    EntropyValue h = relative_entropy(pair.nu, pair.mu);
    REQUIRE(h.is_finite());
    double atv = atv_weighted(pair.mu, pair.nu, one);
    double tv = weighted_tv(pair.mu, pair.nu, one);
    CHECK(atv <= std::sqrt(static_cast<double>(T)) * std::sqrt(2.0 * h.value) *
                     (1.0 + 1e-9));
    CHECK(atv <= (2.0 * T - 1.0) * tv * (1.0 + 1e-9));

    ExtReal rhs = adapted_rhs(pair.mu, pair.nu, one);
    REQUIRE(rhs.is_finite());
    CHECK(atv <= rhs.value * (1.0 + 1e-9));
  }
}

TEST_CASE("corollary general p on small fixtures") {
  for (uint64_t seed = 0; seed < 12; ++seed) {
    FixturePair pair = make_fixture_pair(instance_seed(322, seed), 1, 3, PairMode::kTilt);
    PathMetric metric = values_metric(pair.mu);
    NestedResult nested = nested_distance(pair.mu, pair.nu, metric, 2.0);
    ExtReal rhs =
        corollary_rhs_p(pair.mu, pair.nu, 1.0, zero_path(pair.mu), 2.0, metric);
    REQUIRE(rhs.is_finite());
    CHECK(nested.value * nested.value <= rhs.value * (1.0 + 1e-9));
  }
}

TEST_CASE("T=1 degeneracy: adapted quantities collapse to classical ones") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    FixturePair pair =
        make_fixture_pair(instance_seed(323, seed), 1, 1, PairMode::kIndependent);
    PathMetric metric = values_metric(pair.mu);
    WeightFunction one = WeightFunction::constant(1.0);
    double atv = atv_weighted(pair.mu, pair.nu, one);
    double tv = weighted_tv(pair.mu, pair.nu, one);
    CHECK(std::abs(atv - tv) <= 1e-10);
    NestedResult nested = nested_distance(pair.mu, pair.nu, metric, 1.0);
    double w = wasserstein(pair.mu, pair.nu, metric, 1.0);
    CHECK(std::abs(nested.value - w) <= 1e-10);
  }
}
