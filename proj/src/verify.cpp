#include "atvkit/verify.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "atvkit/law_io.hpp"
#include "atvkit/oracle.hpp"
#include "atvkit/tolerances.hpp"

namespace atvkit {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_ext(const ExtReal& v) {
  return v.infinite ? "inf" : format_double(v.value);
}

namespace {

constexpr const char* kHolds = "holds";
constexpr const char* kTrivial = "holds-trivially-infinite-rhs";
constexpr const char* kViolated = "VIOLATED";

std::string status_inequality(const ExtReal& lhs, const ExtReal& rhs) {
  if (rhs.infinite) return kTrivial;
  if (lhs.infinite) return kViolated;
  return lhs.value <= rhs.value * (1.0 + tol::inequality_slack()) ? kHolds
                                                                  : kViolated;
}

std::string status_equality(const ExtReal& lhs, const ExtReal& rhs, double tolerance) {
  if (lhs.infinite && rhs.infinite) return kTrivial;
  if (lhs.infinite != rhs.infinite) return kViolated;
  return std::abs(lhs.value - rhs.value) <= tolerance ? kHolds : kViolated;
}

std::string status_cap(double lhs, double cap) {
  return lhs <= cap ? kHolds : kViolated;
}

std::string ratio_field(const ExtReal& lhs, const ExtReal& rhs) {
  if (rhs.infinite || lhs.infinite) return "";
  if (rhs.value > 0.0) return format_double(lhs.value / rhs.value);
  return lhs.value == 0.0 ? "1" : "inf";
}

Path base_point(const ProcessLaw& mu) {
  return Path(static_cast<size_t>(mu.horizon()), 0);
}

}  // namespace

bool VerificationRecord::violated() const {
  for (const InequalityRow& row : rows) {
    if (row.status == kViolated) return true;
  }
  return false;
}

VerificationRecord evaluate_pair(const ProcessLaw& mu, const ProcessLaw& nu,
                                 const PathMetric& metric, double p, double alpha,
                                 const std::vector<WeightFunction>& extra_phis) {
  VerificationRecord rec;
  rec.horizon = mu.horizon();
  rec.metric = metric.descriptor();
  const int T = mu.horizon();
  const Path x0 = base_point(mu);

  EntropyValue h = relative_entropy(nu, mu);
  ChainTerms chain = entropy_chain_terms(nu, mu);
  ExtReal two_h = h.infinite ? ExtReal::inf() : ExtReal::finite(2.0 * h.value);
  ExtReal sqrt_2h =
      h.infinite ? ExtReal::inf() : ExtReal::finite(std::sqrt(2.0 * h.value));

  double w_value = wasserstein(mu, nu, metric, p);
  NestedResult nested = nested_distance(mu, nu, metric, p);

  rec.quantities.emplace_back("T", std::to_string(T));
  rec.quantities.emplace_back("p", format_double(p));
  rec.quantities.emplace_back("W_p", format_double(w_value));
  rec.quantities.emplace_back("AW_p", format_double(nested.value));
  rec.quantities.emplace_back("H(nu|mu)", format_ext(h));
  {
    std::string terms;
    for (size_t j = 0; j < chain.terms.size(); ++j) {
      if (j > 0) terms += ' ';
      terms += format_ext(chain.terms[j]);
    }
    rec.quantities.emplace_back("chain_terms_hj", terms);
  }

  std::vector<WeightFunction> phis = {
      WeightFunction::constant(1.0),
      WeightFunction::rule(alpha, x0, 1.0, metric)};
  for (const WeightFunction& phi : extra_phis) phis.push_back(phi);

  double atv_const_one = 0.0;
  double tv_const_one = 0.0;
  for (size_t k = 0; k < phis.size(); ++k) {
    const WeightFunction& phi = phis[k];
    const std::string desc = phi.descriptor();
    double atv = atv_weighted(mu, nu, phi);
    double tv = weighted_tv(mu, nu, phi);
    if (k == 0) {
      atv_const_one = atv;
      tv_const_one = tv;
    }
    double moment = log_exp_moment(mu, phi);
    ExtReal rhs_adapted = adapted_rhs(mu, nu, phi);
    ExtReal rhs_classical = bv_rhs(mu, nu, phi);
    LemmaRhsTerms lemma = lemma_rhs_terms(mu, nu, phi);
    double gamma_sum = 0.0;
    for (double g : lemma.gamma_integrals) gamma_sum += g;

    rec.quantities.emplace_back("phi=" + desc + " TV_phi", format_double(tv));
    rec.quantities.emplace_back("phi=" + desc + " ATV_phi", format_double(atv));
    rec.quantities.emplace_back("phi=" + desc + " log_exp_moment",
                                format_double(moment));
    rec.quantities.emplace_back("phi=" + desc + " bv_rhs",
                                format_ext(rhs_classical));
    rec.quantities.emplace_back("phi=" + desc + " adapted_rhs",
                                format_ext(rhs_adapted));

    rec.rows.push_back({desc, "adapted_bolley_villani", ExtReal::finite(atv),
                        rhs_adapted, status_inequality(ExtReal::finite(atv), rhs_adapted)});
    rec.rows.push_back({desc, "classical_bolley_villani", ExtReal::finite(tv),
                        rhs_classical,
                        status_inequality(ExtReal::finite(tv), rhs_classical)});
    ExtReal tv_sum_rhs = ExtReal::finite(lemma.tv_term + 2.0 * gamma_sum);
    rec.rows.push_back({desc, "tv_plus_sum", ExtReal::finite(atv), tv_sum_rhs,
                        status_inequality(ExtReal::finite(atv), tv_sum_rhs)});
    for (int j = 1; j <= T; ++j) {
      const ExtReal& hj = chain.terms[static_cast<size_t>(j - 1)];
      ExtReal rhs = hj.infinite
                        ? ExtReal::inf()
                        : ExtReal::finite(std::sqrt(1.0 + moment) *
                                          std::sqrt(hj.value));
      ExtReal lhs = ExtReal::finite(lemma.gamma_integrals[static_cast<size_t>(j - 1)]);
      rec.rows.push_back({desc, "gammaj_entropy_j" + std::to_string(j), lhs,
                          rhs, status_inequality(lhs, rhs)});
    }
  }

  // Order-p bound via the rule weight with exponent p.
  {
    ExtReal rhs = corollary_rhs_p(mu, nu, alpha, x0, p, metric);
    double aw_pow = p == 1.0 ? nested.value : std::pow(nested.value, p);
    char name[48];
    std::snprintf(name, sizeof(name), "corollary_p%g", p);
    rec.quantities.emplace_back("corollary_rhs_p", format_ext(rhs));
    rec.rows.push_back({"rule:alpha=" + format_double(alpha) + ";p=" + format_double(p),
                        name, ExtReal::finite(aw_pow), rhs,
                        status_inequality(ExtReal::finite(aw_pow), rhs)});
  }

  // Weight-independent rows.
  rec.rows.push_back({"-", "chain_rule_sum", chain.sum(), two_h,
                      status_equality(chain.sum(), two_h, tol::kEquality)});
  rec.rows.push_back({"-", "w_le_aw", ExtReal::finite(w_value),
                      ExtReal::finite(nested.value),
                      status_inequality(ExtReal::finite(w_value),
                                        ExtReal::finite(nested.value))});
  {
    ExtReal rhs = sqrt_2h.infinite
                      ? ExtReal::inf()
                      : ExtReal::finite(std::sqrt(static_cast<double>(T)) *
                                        sqrt_2h.value);
    rec.rows.push_back({"-", "adapted_pinsker", ExtReal::finite(atv_const_one), rhs,
                        status_inequality(ExtReal::finite(atv_const_one), rhs)});
  }
  {
    ExtReal rhs = ExtReal::finite((2.0 * T - 1.0) * tv_const_one);
    rec.rows.push_back({"-", "atv_le_2T1_tv", ExtReal::finite(atv_const_one), rhs,
                        status_inequality(ExtReal::finite(atv_const_one), rhs)});
  }

  // Structural checks on both couplings.
  Coupling gamma = build_gamma(mu, nu);
  BicausalityReport gamma_report = check_bicausal(gamma, mu, nu);
  BicausalityReport nested_report = check_bicausal(nested.coupling, mu, nu);
  double gamma_defect = gamma.marginal_defect(mu, nu);
  double nested_defect = nested.coupling.marginal_defect(mu, nu);
  rec.rows.push_back({"-", "gamma_bicausal",
                      ExtReal::finite(gamma_report.worst_violation),
                      ExtReal::finite(tol::kBicausal),
                      status_cap(gamma_report.worst_violation, tol::kBicausal)});
  rec.rows.push_back({"-", "nested_bicausal",
                      ExtReal::finite(nested_report.worst_violation),
                      ExtReal::finite(tol::kBicausal),
                      status_cap(nested_report.worst_violation, tol::kBicausal)});
  rec.rows.push_back({"-", "gamma_marginals", ExtReal::finite(gamma_defect),
                      ExtReal::finite(tol::kMarginal),
                      status_cap(gamma_defect, tol::kMarginal)});
  rec.rows.push_back({"-", "nested_marginals", ExtReal::finite(nested_defect),
                      ExtReal::finite(tol::kMarginal),
                      status_cap(nested_defect, tol::kMarginal)});

  if (T == 1) {
    rec.rows.push_back({"-", "t1_aw_equals_w", ExtReal::finite(nested.value),
                        ExtReal::finite(w_value),
                        status_equality(ExtReal::finite(nested.value),
                                        ExtReal::finite(w_value), tol::kEquality)});
    rec.rows.push_back({"-", "t1_atv_equals_tv", ExtReal::finite(atv_const_one),
                        ExtReal::finite(tv_const_one),
                        status_equality(ExtReal::finite(atv_const_one),
                                        ExtReal::finite(tv_const_one),
                                        tol::kEquality)});
  }
  return rec;
}

VerifyResult run_verify(const VerifyConfig& config) {
  VerifyResult result;
  result.records.resize(static_cast<size_t>(std::max(0, config.count)));
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      long i = next.fetch_add(1);
      if (i >= config.count) return;
      try {
        FixturePair pair = make_fixture_pair(instance_seed(config.seed,
                                                           static_cast<uint64_t>(i)),
                                             config.t_min, config.t_max, config.mode);
        PathMetric metric = PathMetric::from_values(pair.mu.spaces(), config.combine);
        VerificationRecord rec =
            evaluate_pair(pair.mu, pair.nu, metric, config.p, config.alpha);
        rec.index = static_cast<uint64_t>(i);
        rec.seed = instance_seed(config.seed, static_cast<uint64_t>(i));
        rec.branching = pair.branching;
        result.records[static_cast<size_t>(i)] = std::move(rec);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(config.count);
        return;
      }
    }
  };
  int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  for (const VerificationRecord& rec : result.records) {
    for (const InequalityRow& row : rec.rows) {
      if (row.status == kViolated) ++result.violations;
    }
  }
  return result;
}

std::string verify_csv(const VerifyResult& result) {
  std::ostringstream out;
  out << "# atvkit-verify-csv v1\n";
  out << "index,seed,T,branching,metric,phi,inequality,lhs,rhs,ratio,status\n";
  for (const VerificationRecord& rec : result.records) {
    for (const InequalityRow& row : rec.rows) {
      out << rec.index << ',' << rec.seed << ',' << rec.horizon << ','
          << rec.branching << ',' << rec.metric << ',' << row.phi << ','
          << row.name << ',' << format_ext(row.lhs) << ',' << format_ext(row.rhs)
          << ',' << ratio_field(row.lhs, row.rhs) << ',' << row.status << '\n';
    }
  }
  return out.str();
}

namespace {

std::string transport_problem_detail(const TransportProblem& problem) {
  std::ostringstream out;
  out << "source:";
  for (double v : problem.source) out << ' ' << format_double(v);
  out << " target:";
  for (double v : problem.target) out << ' ' << format_double(v);
  out << " cost:";
  for (double v : problem.cost) out << ' ' << format_double(v);
  return out.str();
}

}  // namespace

OracleCheckResult run_oracle_check(const OracleCheckConfig& config) {
  OracleCheckResult result;
  for (int i = 0; i < config.classical_count; ++i) {
    Rng rng(instance_seed(config.seed, static_cast<uint64_t>(i)));
    TransportProblem problem = random_transport_problem(rng, config.max_size);
    double got = solve_transport(problem).value;
    double want = oracle::rat_to_double(oracle::classical_ot_lp(problem));
    ++result.classical_done;
    if (std::abs(got - want) > tol::kOracleClassical) {
      result.failures.push_back(
          {"classical instance " + std::to_string(i) + ": simplex " +
               format_double(got) + " vs oracle " + format_double(want),
           transport_problem_detail(problem)});
    }
  }
  for (int i = 0; i < config.adapted_count; ++i) {
    uint64_t seed = instance_seed(config.seed, 1000000ULL + static_cast<uint64_t>(i));
    FixturePair pair =
        make_fixture_pair(seed, 2, 2, PairMode::kIndependent, 2, 2);
    PathMetric metric = PathMetric::from_values(pair.mu.spaces());
    std::string laws = "mu: " + save_law(pair.mu) + "nu: " + save_law(pair.nu);
    ++result.adapted_done;

    double nested = nested_distance(pair.mu, pair.nu, metric, 1.0).value;
    double nested_oracle = oracle::rat_to_double(oracle::bicausal_lp(
        pair.mu, pair.nu,
        [&](const Path& x, const Path& y) { return metric.distance(x, y); }));
    if (std::abs(nested - nested_oracle) > tol::kOracleAdapted) {
      result.failures.push_back(
          {"adapted instance " + std::to_string(i) + ": nested_distance " +
               format_double(nested) + " vs oracle " + format_double(nested_oracle),
           laws});
    }

    Rng table_rng(splitmix64_mix(seed));
    std::vector<WeightFunction> phis = {
        WeightFunction::rule(1.0, Path(static_cast<size_t>(pair.horizon), 0), 1.0,
                             metric),
        WeightFunction::from_table(pair.mu.spaces(),
                                   random_weight_table(table_rng, pair.mu.spaces()))};
    for (const WeightFunction& phi : phis) {
      double atv = atv_weighted(pair.mu, pair.nu, phi);
      double atv_oracle = oracle::rat_to_double(oracle::bicausal_lp(
          pair.mu, pair.nu, [&](const Path& x, const Path& y) {
            return x == y ? 0.0 : phi(x) + phi(y);
          }));
      if (std::abs(atv - atv_oracle) > tol::kOracleAdapted) {
        result.failures.push_back(
            {"adapted instance " + std::to_string(i) + " (phi " + phi.descriptor() +
                 "): atv_weighted " + format_double(atv) + " vs oracle " +
                 format_double(atv_oracle),
             laws});
      }
    }
  }
  return result;
}

std::string run_ratio_scan_csv(const RatioScanConfig& config) {
  std::ostringstream out;
  out << "# atvkit-ratio-scan-csv v1\n";
  out << "T,count,alpha,max_atv_ratio,sqrt_T,two_sqrt_T_plus_1\n";
  for (int T : config.horizons) {
    std::vector<double> max_ratio(config.alphas.size(), 0.0);
    int counted = 0;
    for (int i = 0; i < config.per_horizon; ++i) {
      uint64_t seed = instance_seed(config.seed ^ (static_cast<uint64_t>(T) << 32),
                                    static_cast<uint64_t>(i));
      FixturePair pair = make_fixture_pair(seed, T, T, config.mode);
      EntropyValue h = relative_entropy(pair.nu, pair.mu);
      if (h.infinite || h.value <= 0.0) continue;
      ++counted;
      double denom = std::sqrt(2.0 * h.value);
      for (size_t k = 0; k < config.alphas.size(); ++k) {
        double alpha = config.alphas[k];
        WeightFunction phi = WeightFunction::constant(std::sqrt(alpha));
        double atv = atv_weighted(pair.mu, pair.nu, phi);
        double ratio = atv / (std::sqrt(alpha) * denom);
        max_ratio[k] = std::max(max_ratio[k], ratio);
      }
    }
    for (size_t k = 0; k < config.alphas.size(); ++k) {
      out << T << ',' << counted << ',' << format_double(config.alphas[k]) << ','
          << format_double(max_ratio[k]) << ','
          << format_double(std::sqrt(static_cast<double>(T))) << ','
          << format_double(2.0 * std::sqrt(static_cast<double>(T)) + 1.0) << '\n';
    }
  }
  return out.str();
}

}  // namespace atvkit
