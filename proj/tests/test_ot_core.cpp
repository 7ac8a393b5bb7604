#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "atvkit/generator.hpp"
#include "atvkit/oracle.hpp"
#include "atvkit/ot_core.hpp"
#include "test_support.hpp"

using namespace atvkit;

TEST_CASE("solve_transport trivia") {
  // Point-to-point: the plan concentrates on the single cell.
  TransportProblem dirac{1, 1, {3.75}, {1.0}, {1.0}};
  TransportPlan plan = solve_transport(dirac);
  CHECK(plan.value == doctest::Approx(3.75));
  CHECK(plan.plan_at(0, 0) == doctest::Approx(1.0));

  // Identical marginals with a zero diagonal: the identity plan is optimal.
  TransportProblem identity{3,
                            3,
                            {0, 1, 1, 1, 0, 1, 1, 1, 0},
                            {0.2, 0.3, 0.5},
                            {0.2, 0.3, 0.5}};
  TransportPlan id_plan = solve_transport(identity);
  CHECK(id_plan.value == doctest::Approx(0.0).epsilon(1e-15));
  for (int i = 0; i < 3; ++i) {
    CHECK(id_plan.plan_at(i, i) == doctest::Approx(identity.source[static_cast<size_t>(i)]));
  }
}

TEST_CASE("solve_transport rejects malformed instances") {
  TransportProblem mismatch{2, 2, {0, 1, 1, 0}, {0.5, 0.5}, {0.4, 0.5}};
  CHECK_THROWS_AS(solve_transport(mismatch), MarginalMismatch);
  TransportProblem negative{2, 2, {0, -1, 1, 0}, {0.5, 0.5}, {0.5, 0.5}};
  CHECK_THROWS_AS(solve_transport(negative), InvalidParameter);
  TransportProblem subnormalized{2, 2, {0, 1, 1, 0}, {0.25, 0.25}, {0.25, 0.25}};
  CHECK_THROWS_AS(solve_transport(subnormalized), MarginalMismatch);
}

TEST_CASE("solve_transport agrees with the rational oracle") {
  for (uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(instance_seed(101, seed));
    TransportProblem problem = random_transport_problem(rng, 5);
    TransportPlan plan = solve_transport(problem);
    double exact = oracle::rat_to_double(oracle::classical_ot_lp(problem));
    CHECK(std::abs(plan.value - exact) <= 1e-9);
  }
}

TEST_CASE("returned plans are feasible and certified by their duals") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(instance_seed(102, seed));
    TransportProblem problem = random_transport_problem(rng, 5);
    TransportPlan plan = solve_transport(problem);
    double value = 0.0;
    for (int i = 0; i < plan.rows; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < plan.cols; ++j) {
        CHECK(plan.plan_at(i, j) >= 0.0);
        row_sum += plan.plan_at(i, j);
        value += plan.plan_at(i, j) * problem.cost_at(i, j);
        double rc = problem.cost_at(i, j) - plan.row_duals[static_cast<size_t>(i)] -
                    plan.col_duals[static_cast<size_t>(j)];
        CHECK(rc >= -1e-9);
        if (plan.plan_at(i, j) > 0.0) CHECK(std::abs(rc) <= 1e-9);
      }
      CHECK(row_sum == doctest::Approx(problem.source[static_cast<size_t>(i)]).epsilon(1e-10));
    }
    CHECK(value == doctest::Approx(plan.value).epsilon(1e-12));
  }
}

TEST_CASE("solve_transport matches the oracle on denser degenerate instances") {
  // 15x15 with many repeated costs and marginals: plenty of ties for the
  // perturbation and Bland's rule to cope with.
  for (uint64_t seed = 0; seed < 4; ++seed) {
    Rng rng(instance_seed(105, seed));
    const int n = 15;
    auto marginal = [&]() {
      const int grid = 65536, base = 3000;
      int rest = grid - n * base;
      std::vector<int> cuts{0, rest};
      for (int i = 0; i + 1 < n; ++i) cuts.push_back(rng.next_int(rest + 1));
      std::sort(cuts.begin(), cuts.end());
      std::vector<double> m;
      for (int i = 0; i < n; ++i) {
        m.push_back(static_cast<double>(base + cuts[static_cast<size_t>(i) + 1] -
                                        cuts[static_cast<size_t>(i)]) /
                    grid);
      }
      return m;
    };
    TransportProblem problem;
    problem.rows = problem.cols = n;
    problem.source = marginal();
    problem.target = marginal();
    for (int k = 0; k < n * n; ++k) {
      problem.cost.push_back(static_cast<double>(rng.next_int(8)) / 4.0);
    }
    TransportPlan plan = solve_transport(problem);
    double exact = oracle::rat_to_double(oracle::classical_ot_lp(problem));
    CHECK(std::abs(plan.value - exact) <= 1e-9);
  }
}

TEST_CASE("wasserstein trivia") {
  ProcessLaw coin = testkit::iid_coin(2);
  PathMetric metric = PathMetric::from_values(coin.spaces());
  CHECK(wasserstein(coin, coin, metric, 1.0) == doctest::Approx(0.0).epsilon(1e-14));

  auto spaces = testkit::simple_spaces(2, {"H", "T"});
  ProcessLaw dx = testkit::dirac_law(spaces, {0, 1});
  ProcessLaw dy = testkit::dirac_law(spaces, {1, 1});
  PathMetric m2 = PathMetric::from_values(spaces);
  CHECK(wasserstein(dx, dy, m2, 1.0) ==
        doctest::Approx(m2.distance({0, 1}, {1, 1})).epsilon(1e-14));
  CHECK_THROWS_AS(wasserstein(dx, dy, m2, 0.5), InvalidParameter);
}

TEST_CASE("wasserstein agrees with the rational LP on fixtures") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    FixturePair pair =
        make_fixture_pair(instance_seed(103, seed), 1, 3, PairMode::kIndependent);
    PathMetric metric = PathMetric::from_values(pair.mu.spaces());
    double got = wasserstein(pair.mu, pair.nu, metric, 1.0);

    PathMeasure pm = pair.mu.path_measure();
    PathMeasure pn = pair.nu.path_measure();
    TransportProblem problem;
    problem.rows = static_cast<int>(pm.atoms().size());
    problem.cols = static_cast<int>(pn.atoms().size());
    std::vector<Path> xs, ys;
    for (const auto& [p, m] : pm.atoms()) {
      xs.push_back(p);
      problem.source.push_back(m);
    }
    for (const auto& [p, m] : pn.atoms()) {
      ys.push_back(p);
      problem.target.push_back(m);
    }
    for (const Path& x : xs) {
      for (const Path& y : ys) problem.cost.push_back(metric.distance(x, y));
    }
    if (problem.rows * problem.cols <= oracle::kMaxVariables) {
      double exact = oracle::rat_to_double(oracle::classical_ot_lp(problem));
      CHECK(std::abs(got - exact) <= 1e-9);
    }
  }
}

TEST_CASE("wasserstein metric axioms and monotonicity in p") {
  auto spaces = testkit::simple_spaces(3, {"a", "b"});
  PathMetric metric = PathMetric::from_values(spaces);
  for (uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(instance_seed(104, seed));
    ProcessLaw a = random_law(rng, spaces, false);
    ProcessLaw b = random_law(rng, spaces, false);
    ProcessLaw c = random_law(rng, spaces, false);

    double ab = wasserstein(a, b, metric, 1.0);
    double ba = wasserstein(b, a, metric, 1.0);
    double bc = wasserstein(b, c, metric, 1.0);
    double ac = wasserstein(a, c, metric, 1.0);
    CHECK(std::abs(ab - ba) <= 1e-10);
    CHECK(ac <= ab + bc + 1e-9);

    // Jensen: W_p is nondecreasing in p.
    double w1 = wasserstein(a, b, metric, 1.0);
    double w15 = wasserstein(a, b, metric, 1.5);
    double w2 = wasserstein(a, b, metric, 2.0);
    double w3 = wasserstein(a, b, metric, 3.0);
    CHECK(w1 <= w15 * (1.0 + 1e-9) + 1e-12);
    CHECK(w15 <= w2 * (1.0 + 1e-9) + 1e-12);
    CHECK(w2 <= w3 * (1.0 + 1e-9) + 1e-12);
  }
}
