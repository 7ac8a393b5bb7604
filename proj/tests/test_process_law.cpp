#include <doctest.h>

#include <cmath>

#include "atvkit/generator.hpp"
#include "atvkit/law_io.hpp"
#include "atvkit/process_law.hpp"
#include "test_support.hpp"

using namespace atvkit;

TEST_CASE("kernel: single child and iid coin") {
  ProcessLaw single = testkit::law_t1({{"a", 1.0}});
  CHECK(single.kernel({})[0] == doctest::Approx(1.0));

  ProcessLaw coin = testkit::iid_coin(2);
  const std::vector<double>& row = coin.kernel({0});
  CHECK(row[0] == doctest::Approx(0.5));
  CHECK(row[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(coin.kernel({0, 1}), PrefixNotSupported);
}

TEST_CASE("kernel of the fixture law matches hand disintegration of the joint") {
  ProcessLaw law = testkit::load_fixture("two_step.json");
  PathMeasure joint = law.path_measure();
  // Disintegrate the joint table independently: P(x2 | x1) = m(x1,x2)/m(x1).
  for (const Path& prefix : law.supported_prefixes(1)) {
    double prefix_mass = 0.0;
    std::map<int, double> children;
    for (const auto& [path, mass] : joint.atoms()) {
      if (path[0] == prefix[0]) {
        prefix_mass += mass;
        children[path[1]] += mass;
      }
    }
    const std::vector<double>& row = law.kernel(prefix);
    for (int a = 0; a < static_cast<int>(row.size()); ++a) {
      double expected = children.count(a) ? children[a] / prefix_mass : 0.0;
      CHECK(row[static_cast<size_t>(a)] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("tail_law trivia") {
  ProcessLaw single = testkit::law_t1({{"a", 0.25}, {"b", 0.75}});
  PathMeasure tail = single.tail_law({});
  CHECK(tail.mass({0}) == doctest::Approx(0.25));
  CHECK(tail.mass({1}) == doctest::Approx(0.75));

  // Product law: tail after any prefix equals the product of later marginals.
  ProcessLaw coin = testkit::iid_coin(3);
  PathMeasure tail_h = coin.tail_law({0});
  PathMeasure tail_t = coin.tail_law({1});
  for (const auto& [suffix, mass] : tail_h.atoms()) {
    CHECK(mass == doctest::Approx(0.25));
    CHECK(tail_t.mass(suffix) == doctest::Approx(mass));
  }
  CHECK(tail_h.atoms().size() == 4);
}

TEST_CASE("tail_law equals chain-multiplied kernel rows on the fixture") {
  ProcessLaw law = testkit::load_fixture("two_step.json");
  for (const Path& prefix : law.supported_prefixes(1)) {
    PathMeasure tail = law.tail_law(prefix);
    const std::vector<double>& row = law.kernel(prefix);
    double total = 0.0;
    for (const auto& [suffix, mass] : tail.atoms()) {
      CHECK(mass == doctest::Approx(row[static_cast<size_t>(suffix[0])]).epsilon(1e-14));
      total += mass;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("projection trivia and marginalization chain") {
  ProcessLaw coin = testkit::iid_coin(3);
  PathMeasure p2 = coin.projection(2);
  CHECK(p2.atoms().size() == 4);
  for (const auto& [prefix, mass] : p2.atoms()) CHECK(mass == doctest::Approx(0.25));
  CHECK_THROWS_AS(coin.projection(0), InvalidHorizon);
  CHECK_THROWS_AS(coin.projection(4), InvalidHorizon);

  // projection(t) marginalizes projection(t+1); full projection is the law.
  for (uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    FixturePair pair = make_fixture_pair(seed, 1, 4, PairMode::kIndependent);
    const ProcessLaw& law = pair.mu;
    PathMeasure full = law.projection(law.horizon());
    double total = 0.0;
    for (const auto& [path, mass] : full.atoms()) total += mass;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (int t = 1; t < law.horizon(); ++t) {
      PathMeasure coarse = law.projection(t);
      PathMeasure fine = law.projection(t + 1);
      std::map<Path, double> folded;
      for (const auto& [path, mass] : fine.atoms()) {
        folded[Path(path.begin(), path.end() - 1)] += mass;
      }
      for (const auto& [prefix, mass] : coarse.atoms()) {
        CHECK(mass == doctest::Approx(folded[prefix]).epsilon(1e-12));
      }
      CHECK(folded.size() == coarse.atoms().size());
    }
  }
}

TEST_CASE("projection t=1 equals first-coordinate histogram on the fixture") {
  ProcessLaw law = testkit::load_fixture("two_step.json");
  PathMeasure joint = law.path_measure();
  std::map<int, double> histogram;
  for (const auto& [path, mass] : joint.atoms()) histogram[path[0]] += mass;
  PathMeasure p1 = law.projection(1);
  for (const auto& [prefix, mass] : p1.atoms()) {
    CHECK(mass == doctest::Approx(histogram[prefix[0]]).epsilon(1e-14));
  }
}

TEST_CASE("meet basics") {
  auto spaces = testkit::simple_spaces(1, {"a", "b"});
  PathMeasure a(spaces, 0, 1), b(spaces, 0, 1);
  a.add({0}, 0.7);
  a.add({1}, 0.3);
  b.add({0}, 0.4);
  b.add({1}, 0.6);
  PathMeasure m = meet(a, b);
  CHECK(m.mass({0}) == doctest::Approx(0.4));
  CHECK(m.mass({1}) == doctest::Approx(0.3));

  PathMeasure idem = meet(a, a);
  CHECK(idem.mass({0}) == doctest::Approx(0.7));

  PathMeasure c(spaces, 0, 1);
  c.add({0}, 1.0);
  PathMeasure d(spaces, 0, 1);
  d.add({1}, 1.0);
  CHECK(meet(c, d).empty());

  auto other = testkit::simple_spaces(1, {"a", "b", "c"});
  PathMeasure e(other, 0, 1);
  CHECK_THROWS_AS(meet(a, e), SpaceMismatch);
}

TEST_CASE("residual_parts identities") {
  auto spaces = testkit::simple_spaces(1, {"a", "b"});
  PathMeasure a(spaces, 0, 1), b(spaces, 0, 1);
  a.add({0}, 0.7);
  a.add({1}, 0.3);
  b.add({0}, 0.4);
  b.add({1}, 0.6);
  ResidualParts parts = residual_parts(a, b);
  CHECK(parts.positive.mass({0}) == doctest::Approx(0.3));
  CHECK(parts.positive.mass({1}) == 0.0);
  CHECK(parts.negative.mass({1}) == doctest::Approx(0.3));
  CHECK(parts.abs_diff.total() == doctest::Approx(0.6));

  ResidualParts same = residual_parts(a, a);
  CHECK(same.positive.empty());
  CHECK(same.negative.empty());
  CHECK(same.abs_diff.empty());

  // a = meet + positive, b = meet + negative, |a-b| = positive + negative,
  // cross-checked by elementwise subtraction on random fixture pairs.
  for (uint64_t seed : {11u, 12u, 13u, 14u}) {
    FixturePair pair = make_fixture_pair(seed, 1, 4, PairMode::kIndependent);
    PathMeasure pm = pair.mu.path_measure();
    PathMeasure pn = pair.nu.path_measure();
    PathMeasure mt = meet(pm, pn);
    ResidualParts rp = residual_parts(pm, pn);
    std::set<Path> keys;
    for (const auto& [p, m] : pm.atoms()) keys.insert(p);
    for (const auto& [p, m] : pn.atoms()) keys.insert(p);
    for (const Path& p : keys) {
      CHECK(pm.mass(p) ==
            doctest::Approx(mt.mass(p) + rp.positive.mass(p)).epsilon(1e-12));
      CHECK(pn.mass(p) ==
            doctest::Approx(mt.mass(p) + rp.negative.mass(p)).epsilon(1e-12));
      CHECK(rp.abs_diff.mass(p) ==
            doctest::Approx(std::abs(pm.mass(p) - pn.mass(p))).epsilon(1e-12));
      CHECK(!(rp.positive.mass(p) > 0.0 && rp.negative.mass(p) > 0.0));
    }
  }
}

TEST_CASE("law_from_path_measure round trips") {
  // Dirac: every kernel is a point mass.
  auto spaces = testkit::simple_spaces(3, {"a", "b"});
  PathMeasure dirac(spaces, 0, 3);
  dirac.add({1, 0, 1}, 1.0);
  ProcessLaw dirac_law = law_from_path_measure(dirac);
  CHECK(dirac_law.kernel({})[1] == doctest::Approx(1.0));
  CHECK(dirac_law.kernel({1})[0] == doctest::Approx(1.0));
  CHECK(dirac_law.kernel({1, 0})[1] == doctest::Approx(1.0));

  // Product measure: kernels ignore the prefix.
  ProcessLaw coin = testkit::iid_coin(2);
  ProcessLaw rebuilt = law_from_path_measure(coin.path_measure());
  CHECK(rebuilt.kernel({0})[0] == doctest::Approx(0.5));
  CHECK(rebuilt.kernel({1})[0] == doctest::Approx(0.5));

  // Random fixtures: the induced path measure of the rebuilt law matches.
  for (uint64_t seed : {21u, 22u, 23u}) {
    FixturePair pair = make_fixture_pair(seed, 1, 5, PairMode::kIndependent);
    PathMeasure original = pair.mu.path_measure();
    ProcessLaw round = law_from_path_measure(original);
    PathMeasure again = round.path_measure();
    CHECK(again.atoms().size() == original.atoms().size());
    for (const auto& [path, mass] : original.atoms()) {
      CHECK(again.mass(path) == doctest::Approx(mass).epsilon(1e-12));
    }
  }

  PathMeasure half(spaces, 0, 3);
  half.add({0, 0, 0}, 0.5);
  CHECK_THROWS_AS(law_from_path_measure(half), NotProbability);
}

TEST_CASE("disintegration consistency: path mass is the product of kernels") {
  for (uint64_t seed : {31u, 32u}) {
    FixturePair pair = make_fixture_pair(seed, 2, 5, PairMode::kTilt);
    PathMeasure pm = pair.mu.path_measure();
    for (const auto& [path, mass] : pm.atoms()) {
      double product = 1.0;
      for (size_t t = 0; t < path.size(); ++t) {
        Path prefix(path.begin(), path.begin() + t);
        product *= pair.mu.kernel(prefix)[static_cast<size_t>(path[t])];
      }
      CHECK(mass == doctest::Approx(product).epsilon(1e-12));
      CHECK(pair.mu.prefix_mass(path) == doctest::Approx(product).epsilon(1e-12));
    }
  }
}

TEST_CASE("construction rejects bad rows and missing kernels") {
  auto spaces = testkit::simple_spaces(2, {"a", "b"});
  std::map<Path, std::vector<double>> kernels;
  kernels[{}] = {0.5, 0.5};
  kernels[{0}] = {1.0, 0.0};
  // {1} reachable but missing
  CHECK_THROWS_AS(ProcessLaw(spaces, kernels), InvalidLaw);
  kernels[{1}] = {0.6, 0.5};  // sums to 1.1
  CHECK_THROWS_AS(ProcessLaw(spaces, kernels), InvalidLaw);
  kernels[{1}] = {0.5, 0.5};
  ProcessLaw ok(spaces, kernels);
  CHECK(ok.horizon() == 2);

  // Unreachable kernels are pruned silently.
  kernels[{0}] = {1.0, 0.0};
  kernels[{0, 1}] = {1.0, 0.0};  // length-2 prefix is a full path: invalid anyway
  CHECK_THROWS_AS(ProcessLaw(spaces, kernels), InvalidLaw);
}

TEST_CASE("unify merges atom sets and keeps kernels") {
  auto mu = load_law(R"({"horizon":1,"spaces":[["x","y"]],
                         "kernels":{"":{"x":0.5,"y":0.5}}})");
  auto nu = load_law(R"({"horizon":1,"spaces":[["y","z"]],
                         "kernels":{"":{"y":0.25,"z":0.75}}})");
  auto [a, b] = unify(mu, nu);
  CHECK((*a.spaces())[0].size() == 3);
  PathMeasure pa = a.path_measure();
  PathMeasure pb = b.path_measure();
  int x = (*a.spaces())[0].index_of("x");
  int y = (*a.spaces())[0].index_of("y");
  int z = (*a.spaces())[0].index_of("z");
  CHECK(pa.mass({x}) == doctest::Approx(0.5));
  CHECK(pa.mass({z}) == 0.0);
  CHECK(pb.mass({y}) == doctest::Approx(0.25));
  CHECK(pb.mass({x}) == 0.0);

  auto deep = load_law(R"({"horizon":2,"spaces":[["x"],["x"]],
                           "kernels":{"":{"x":1.0},"x":{"x":1.0}}})");
  CHECK_THROWS_AS(unify(mu, deep), SpaceMismatch);
}
