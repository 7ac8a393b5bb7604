#include "atvkit/adapted_ot.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "atvkit/tolerances.hpp"

namespace atvkit {

namespace {

// Residual masses below this are treated as zero and the kernel coupling
// degenerates to the pure diagonal.
constexpr double kResidualFloor = 1e-14;

}  // namespace

Coupling::Coupling(SpacesPtr spaces, int horizon)
    : spaces_(std::move(spaces)), horizon_(horizon) {
  if (!spaces_ || static_cast<int>(spaces_->size()) != horizon_) {
    throw InvalidLaw("coupling spaces must match its horizon");
  }
}

void Coupling::add(const Path& x, const Path& y, double mass) {
  if (static_cast<int>(x.size()) != horizon_ ||
      static_cast<int>(y.size()) != horizon_) {
    throw InvalidLaw("coupling atoms must be full path pairs");
  }
  if (mass < 0.0) throw InvalidLaw("negative mass in coupling");
  if (mass == 0.0) return;
  atoms_[{x, y}] += mass;
}

double Coupling::mass(const Path& x, const Path& y) const {
  auto it = atoms_.find({x, y});
  return it == atoms_.end() ? 0.0 : it->second;
}

double Coupling::total() const {
  double s = 0.0;
  for (const auto& [pair, m] : atoms_) s += m;
  return s;
}

PathMeasure Coupling::first_marginal() const {
  PathMeasure out(spaces_, 0, horizon_);
  for (const auto& [pair, m] : atoms_) out.add(pair.first, m);
  return out;
}

PathMeasure Coupling::second_marginal() const {
  PathMeasure out(spaces_, 0, horizon_);
  for (const auto& [pair, m] : atoms_) out.add(pair.second, m);
  return out;
}

double Coupling::marginal_defect(const ProcessLaw& mu, const ProcessLaw& nu) const {
  PathMeasure mx = first_marginal();
  PathMeasure my = second_marginal();
  PathMeasure pm = mu.path_measure();
  PathMeasure pn = nu.path_measure();
  double defect = 0.0;
  auto scan = [&defect](const PathMeasure& got, const PathMeasure& want) {
    std::set<Path> keys;
    for (const auto& [p, m] : got.atoms()) keys.insert(p);
    for (const auto& [p, m] : want.atoms()) keys.insert(p);
    for (const Path& p : keys) {
      defect = std::max(defect, std::abs(got.mass(p) - want.mass(p)));
    }
  };
  scan(mx, pm);
  scan(my, pn);
  return defect;
}

BicausalityReport check_bicausal(const Coupling& pi, const ProcessLaw& mu,
                                 const ProcessLaw& nu) {
  require_same_spaces(mu, nu);
  if (!same_spaces(*pi.spaces(), *mu.spaces())) {
    throw SpaceMismatch("coupling and laws live on different path spaces");
  }
  double defect = pi.marginal_defect(mu, nu);
  if (defect > tol::kMarginal) {
    throw NotACoupling("claimed coupling misses its marginals by " +
                       std::to_string(defect));
  }

  BicausalityReport report;
  const int T = pi.horizon();
  using Key = std::pair<Path, Path>;
  for (int t = 1; t < T; ++t) {
    for (int side = 0; side < 2; ++side) {
      // Conditional tables of the side's suffix given the prefix pair, and
      // given the side's own prefix alone.
      std::map<Key, double> pair_mass;
      std::map<Key, std::map<Path, double>> pair_table;
      std::map<Path, double> own_mass;
      std::map<Path, std::map<Path, double>> own_table;
      for (const auto& [atom, m] : pi.atoms()) {
        const Path& xs = side == 0 ? atom.first : atom.second;
        const Path& ys = side == 0 ? atom.second : atom.first;
        Path xp(xs.begin(), xs.begin() + t);
        Path yp(ys.begin(), ys.begin() + t);
        Path suffix(xs.begin() + t, xs.end());
        Key key{xp, yp};
        pair_mass[key] += m;
        pair_table[key][suffix] += m;
        own_mass[xp] += m;
        own_table[xp][suffix] += m;
      }
      for (const auto& [key, m] : pair_mass) {
        if (m <= 0.0) continue;
        const auto& table = pair_table[key];
        const auto& reference = own_table[key.first];
        double ref_mass = own_mass[key.first];
        std::set<Path> suffixes;
        for (const auto& [s, v] : table) suffixes.insert(s);
        for (const auto& [s, v] : reference) suffixes.insert(s);
        for (const Path& s : suffixes) {
          auto it = table.find(s);
          double got = it == table.end() ? 0.0 : it->second / m;
          auto rit = reference.find(s);
          double want = rit == reference.end() ? 0.0 : rit->second / ref_mass;
          double violation = std::abs(got - want);
          if (violation > report.worst_violation) {
            report.worst_violation = violation;
            report.witness = BicausalityReport::Witness{
                t, side == 0 ? key.first : key.second,
                side == 0 ? key.second : key.first};
          }
        }
      }
    }
  }
  report.ok = report.worst_violation <= tol::kBicausal;
  return report;
}

namespace {

// Sparse view of a kernel row: (atom, probability) with positive entries.
std::vector<std::pair<int, double>> positive_entries(const std::vector<double>& row) {
  std::vector<std::pair<int, double>> out;
  for (int a = 0; a < static_cast<int>(row.size()); ++a) {
    if (row[static_cast<size_t>(a)] > 0.0) out.emplace_back(a, row[static_cast<size_t>(a)]);
  }
  return out;
}

struct NestedSolver {
  const ProcessLaw& mu;
  const ProcessLaw& nu;
  const PathMetric& metric;
  double p;
  bool stagewise;  // cost decomposes as sum of per-stage distances
  std::map<std::pair<Path, Path>, TransportPlan> plans;
  std::map<std::pair<Path, Path>, double> values;

  double value_at(const Path& xp, const Path& yp) {
    auto key = std::make_pair(xp, yp);
    auto it = values.find(key);
    if (it != values.end()) return it->second;
    const int t = static_cast<int>(xp.size());
    const int T = mu.horizon();
    auto mu_children = positive_entries(mu.kernel(xp));
    auto nu_children = positive_entries(nu.kernel(yp));
    TransportProblem problem;
    problem.rows = static_cast<int>(mu_children.size());
    problem.cols = static_cast<int>(nu_children.size());
    for (const auto& [a, prob] : mu_children) problem.source.push_back(prob);
    for (const auto& [b, prob] : nu_children) problem.target.push_back(prob);
    problem.cost.resize(static_cast<size_t>(problem.rows) * problem.cols);
    Path xc = xp, yc = yp;
    for (int i = 0; i < problem.rows; ++i) {
      xc.push_back(mu_children[static_cast<size_t>(i)].first);
      for (int j = 0; j < problem.cols; ++j) {
        yc.push_back(nu_children[static_cast<size_t>(j)].first);
        double c;
        if (stagewise) {
          c = metric.coord_distance(t, xc.back(), yc.back());
          if (t + 1 < T) c += value_at(xc, yc);
        } else {
          c = t + 1 < T ? value_at(xc, yc)
                        : std::pow(metric.distance(xc, yc), p);
        }
        problem.cost[static_cast<size_t>(i) * problem.cols + j] = c;
        yc.pop_back();
      }
      xc.pop_back();
    }
    TransportPlan plan = solve_transport(problem);
    values.emplace(key, plan.value);
    plans.emplace(key, std::move(plan));
    return values.at(key);
  }

  void assemble(Coupling& out, const Path& xp, const Path& yp, double mass) {
    if (static_cast<int>(xp.size()) == mu.horizon()) {
      out.add(xp, yp, mass);
      return;
    }
    const TransportPlan& plan = plans.at({xp, yp});
    auto mu_children = positive_entries(mu.kernel(xp));
    auto nu_children = positive_entries(nu.kernel(yp));
    Path xc = xp, yc = yp;
    for (int i = 0; i < plan.rows; ++i) {
      xc.push_back(mu_children[static_cast<size_t>(i)].first);
      for (int j = 0; j < plan.cols; ++j) {
        double cell = plan.plan_at(i, j);
        if (cell > 0.0) {
          yc.push_back(nu_children[static_cast<size_t>(j)].first);
          assemble(out, xc, yc, mass * cell);
          yc.pop_back();
        }
      }
      xc.pop_back();
    }
  }
};

NestedResult run_nested(const ProcessLaw& mu, const ProcessLaw& nu,
                        const PathMetric& metric, double p, bool stagewise) {
  NestedSolver solver{mu, nu, metric, p, stagewise, {}, {}};
  double root = solver.value_at({}, {});
  Coupling coupling(mu.spaces(), mu.horizon());
  solver.assemble(coupling, {}, {}, 1.0);
  double value = p == 1.0 ? root : std::pow(root, 1.0 / p);
  return NestedResult{value, std::move(coupling)};
}

}  // namespace

NestedResult nested_distance(const ProcessLaw& mu, const ProcessLaw& nu,
                             const PathMetric& metric, double p,
                             int full_cost_horizon_cap) {
  require_same_spaces(mu, nu);
  if (!same_spaces(*metric.spaces(), *mu.spaces())) {
    throw SpaceMismatch("metric and laws live on different path spaces");
  }
  if (p < 1.0) throw InvalidParameter("nested distance order must satisfy p >= 1");
  const bool stagewise = metric.separable_l1() && p == 1.0;
  if (!stagewise && mu.horizon() > full_cost_horizon_cap) {
    throw InvalidParameter(
        "the cost d(x,y)^p does not decompose stagewise (requires the l1 "
        "metric with p = 1); the general dynamic program is limited to T <= " +
        std::to_string(full_cost_horizon_cap));
  }
  return run_nested(mu, nu, metric, p, stagewise);
}

NestedResult nested_distance_full_cost(const ProcessLaw& mu, const ProcessLaw& nu,
                                       const PathMetric& metric, double p) {
  require_same_spaces(mu, nu);
  if (p < 1.0) throw InvalidParameter("nested distance order must satisfy p >= 1");
  return run_nested(mu, nu, metric, p, /*stagewise=*/false);
}

Coupling build_gamma(const ProcessLaw& mu, const ProcessLaw& nu) {
  require_same_spaces(mu, nu);
  Coupling out(mu.spaces(), mu.horizon());
  const int T = mu.horizon();

  // Composes kernel couplings down the pair tree. While the prefixes agree
  // the kernel coupling is the diagonal meet plus the normalized product of
  // residuals; after they split, the independent product of the kernels.
  auto descend = [&](auto&& self, const Path& xp, const Path& yp,
                     double mass) -> void {
    const int t = static_cast<int>(xp.size());
    if (t == T) {
      out.add(xp, yp, mass);
      return;
    }
    Path xc = xp, yc = yp;
    if (xp == yp) {
      const std::vector<double>& mu_row = mu.kernel(xp);
      const std::vector<double>& nu_row = nu.kernel(yp);
      const int width = static_cast<int>(mu_row.size());
      std::vector<double> pos(mu_row.size(), 0.0), neg(mu_row.size(), 0.0);
      double residual_mass = 0.0;
      for (int a = 0; a < width; ++a) {
        double diff = mu_row[static_cast<size_t>(a)] - nu_row[static_cast<size_t>(a)];
        if (diff > 0.0) {
          pos[static_cast<size_t>(a)] = diff;
          residual_mass += diff;
        } else if (diff < 0.0) {
          neg[static_cast<size_t>(a)] = -diff;
        }
      }
      for (int a = 0; a < width; ++a) {
        double eta = std::min(mu_row[static_cast<size_t>(a)], nu_row[static_cast<size_t>(a)]);
        if (eta <= 0.0) continue;
        xc.push_back(a);
        yc.push_back(a);
        self(self, xc, yc, mass * eta);
        yc.pop_back();
        xc.pop_back();
      }
      if (residual_mass > kResidualFloor) {
        for (int a = 0; a < width; ++a) {
          if (pos[static_cast<size_t>(a)] <= 0.0) continue;
          for (int b = 0; b < width; ++b) {
            if (neg[static_cast<size_t>(b)] <= 0.0) continue;
            xc.push_back(a);
            yc.push_back(b);
            self(self, xc, yc,
                 mass * pos[static_cast<size_t>(a)] * neg[static_cast<size_t>(b)] /
                     residual_mass);
            yc.pop_back();
            xc.pop_back();
          }
        }
      }
    } else {
      for (const auto& [a, pa] : positive_entries(mu.kernel(xp))) {
        for (const auto& [b, pb] : positive_entries(nu.kernel(yp))) {
          xc.push_back(a);
          yc.push_back(b);
          self(self, xc, yc, mass * pa * pb);
          yc.pop_back();
          xc.pop_back();
        }
      }
    }
  };
  descend(descend, {}, {}, 1.0);
  return out;
}

double atv_weighted(const ProcessLaw& mu, const ProcessLaw& nu,
                    const WeightFunction& phi) {
  Coupling gamma = build_gamma(mu, nu);
  double out = 0.0;
  for (const auto& [pair, mass] : gamma.atoms()) {
    if (pair.first != pair.second) {
      out += (phi(pair.first) + phi(pair.second)) * mass;
    }
  }
  return out;
}

PathMeasure gamma_j(const ProcessLaw& mu, const ProcessLaw& nu, int j) {
  require_same_spaces(mu, nu);
  const int T = mu.horizon();
  if (j < 1 || j > T) {
    throw InvalidIndex("gamma_j index must satisfy 1 <= j <= T");
  }
  PathMeasure out(mu.spaces(), 0, T);

  // Meet of the first j-1 coordinates; the trivial unit mass when j = 1.
  PathMeasure meet_part =
      j == 1 ? PathMeasure(mu.spaces(), 0, 0)
             : meet(mu.projection(j - 1), nu.projection(j - 1));
  if (j == 1) meet_part.add({}, 1.0);

  for (const auto& [prefix, meet_mass] : meet_part.atoms()) {
    const std::vector<double>& mu_row = mu.kernel(prefix);
    const std::vector<double>& nu_row = nu.kernel(prefix);
    for (int a = 0; a < static_cast<int>(mu_row.size()); ++a) {
      double diff = std::abs(mu_row[static_cast<size_t>(a)] - nu_row[static_cast<size_t>(a)]);
      if (diff <= 0.0) continue;
      Path stage = prefix;
      stage.push_back(a);
      double base = meet_mass * diff;
      if (j == T) {
        out.add(stage, base);
        continue;
      }
      if (mu_row[static_cast<size_t>(a)] <= 0.0) continue;  // tail undefined, pruned
      PathMeasure tail = mu.tail_law(stage);
      for (const auto& [suffix, tail_mass] : tail.atoms()) {
        Path full = stage;
        full.insert(full.end(), suffix.begin(), suffix.end());
        out.add(full, base * tail_mass);
      }
    }
  }
  return out;
}

LemmaRhsTerms lemma_rhs_terms(const ProcessLaw& mu, const ProcessLaw& nu,
                              const WeightFunction& phi) {
  LemmaRhsTerms out;
  out.tv_term = weighted_tv(mu, nu, phi);
  for (int j = 1; j <= mu.horizon(); ++j) {
    PathMeasure gj = gamma_j(mu, nu, j);
    double integral = 0.0;
    for (const auto& [path, mass] : gj.atoms()) integral += phi(path) * mass;
    out.gamma_integrals.push_back(integral);
  }
  return out;
}

double psi_j(const ProcessLaw& mu, const WeightFunction& phi, int j,
             const Path& prefix) {
  const int T = mu.horizon();
  if (j < 1 || j > T) throw InvalidIndex("psi_j index must satisfy 1 <= j <= T");
  if (static_cast<int>(prefix.size()) != j) {
    throw InvalidIndex("psi_j needs a prefix of length j");
  }
  if (!mu.supports_prefix(prefix)) {
    throw PrefixNotSupported("psi_j needs a mu-supported prefix");
  }
  if (j == T) return phi(prefix);
  PathMeasure tail = mu.tail_law(prefix);
  double out = 0.0;
  for (const auto& [suffix, mass] : tail.atoms()) {
    Path full = prefix;
    full.insert(full.end(), suffix.begin(), suffix.end());
    out += mass * phi(full);
  }
  return out;
}

GammaJBound gamma_j_entropy_bound(const ProcessLaw& mu, const ProcessLaw& nu,
                                  const WeightFunction& phi, int j) {
  PathMeasure gj = gamma_j(mu, nu, j);
  GammaJBound out;
  for (const auto& [path, mass] : gj.atoms()) out.lhs += phi(path) * mass;
  ChainTerms terms = entropy_chain_terms(nu, mu);
  const ExtReal& hj = terms.terms.at(static_cast<size_t>(j - 1));
  if (hj.infinite) {
    out.rhs = ExtReal::inf();
  } else {
    double moment = log_exp_moment(mu, phi);
    out.rhs = ExtReal::finite(std::sqrt(1.0 + moment) * std::sqrt(hj.value));
  }
  return out;
}

}  // namespace atvkit
