#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "atvkit/adapted_ot.hpp"
#include "atvkit/law_io.hpp"
#include "atvkit/verify.hpp"

namespace {

using namespace atvkit;

struct HorizonRange {
  int t_min = 1;
  int t_max = 4;
};

// Accepts "3", "1..4" or "1-4".
HorizonRange parse_horizon(const std::string& spec) {
  HorizonRange out;
  size_t sep = spec.find("..");
  size_t skip = 2;
  if (sep == std::string::npos) {
    sep = spec.find('-');
    skip = 1;
  }
  try {
    if (sep == std::string::npos) {
      out.t_min = out.t_max = std::stoi(spec);
    } else {
      out.t_min = std::stoi(spec.substr(0, sep));
      out.t_max = std::stoi(spec.substr(sep + skip));
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError("--T", "expected N or A..B, got '" + spec + "'");
  }
  if (out.t_min < 1 || out.t_max < out.t_min) {
    throw CLI::ValidationError("--T", "need 1 <= min <= max");
  }
  return out;
}

std::vector<int> parse_horizon_list(const std::string& spec) {
  std::vector<int> out;
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) {
    HorizonRange range = parse_horizon(item);
    for (int t = range.t_min; t <= range.t_max; ++t) out.push_back(t);
  }
  if (out.empty()) throw CLI::ValidationError("--T", "empty horizon list");
  return out;
}

PairMode parse_mode(const std::string& mode) {
  if (mode == "tilt") return PairMode::kTilt;
  if (mode == "independent") return PairMode::kIndependent;
  if (mode == "singular") return PairMode::kSingular;
  throw CLI::ValidationError("--mode", "expected tilt|independent|singular");
}

PathMetric::Combine parse_metric(const std::string& metric) {
  if (metric == "l1") return PathMetric::Combine::L1;
  if (metric == "max") return PathMetric::Combine::Max;
  throw CLI::ValidationError("--metric", "expected l1|max");
}

// "const:C" or "rule:alpha,p".
WeightFunction parse_phi(const std::string& spec, const ProcessLaw& mu,
                         const PathMetric& metric) {
  if (spec.rfind("const:", 0) == 0) {
    return WeightFunction::constant(std::stod(spec.substr(6)));
  }
  if (spec.rfind("rule:", 0) == 0) {
    std::string body = spec.substr(5);
    size_t comma = body.find(',');
    if (comma == std::string::npos) {
      throw CLI::ValidationError("--phi", "rule form is rule:alpha,p");
    }
    double alpha = std::stod(body.substr(0, comma));
    double p = std::stod(body.substr(comma + 1));
    Path x0(static_cast<size_t>(mu.horizon()), 0);
    return WeightFunction::rule(alpha, x0, p, metric);
  }
  throw CLI::ValidationError("--phi", "expected const:C or rule:alpha,p");
}

void write_output(const std::string& text, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_file);
  if (!out) throw Error("cannot write output file '" + out_file + "'");
  out << text;
}

int cmd_compute(const std::string& mu_file, const std::string& nu_file,
                uint64_t seed, const std::string& horizon, const std::string& mode,
                double p, double alpha, const std::string& phi_spec,
                const std::string& metric_name, const std::string& out_file) {
  std::optional<ProcessLaw> mu, nu;
  int branching = 0;
  if (!mu_file.empty() || !nu_file.empty()) {
    if (mu_file.empty() || nu_file.empty()) {
      throw Error("compute needs both --mu and --nu, or neither");
    }
    auto [a, b] = unify(load_law_file(mu_file), load_law_file(nu_file));
    mu = std::move(a);
    nu = std::move(b);
  } else {
    HorizonRange range = parse_horizon(horizon);
    FixturePair pair = make_fixture_pair(instance_seed(seed, 0), range.t_min,
                                         range.t_max, parse_mode(mode));
    branching = pair.branching;
    mu = std::move(pair.mu);
    nu = std::move(pair.nu);
  }
  PathMetric metric = PathMetric::from_values(mu->spaces(), parse_metric(metric_name));
  std::vector<WeightFunction> extra;
  if (!phi_spec.empty()) extra.push_back(parse_phi(phi_spec, *mu, metric));

  VerificationRecord rec = evaluate_pair(*mu, *nu, metric, p, alpha, extra);
  rec.seed = seed;
  rec.branching = branching;

  std::ostringstream text;
  for (const auto& [name, value] : rec.quantities) {
    text << name << " = " << value << "\n";
  }
  text << "\n";
  for (const InequalityRow& row : rec.rows) {
    text << row.name << " [phi=" << row.phi << "]: lhs=" << format_ext(row.lhs)
         << " rhs=" << format_ext(row.rhs) << " -> " << row.status << "\n";
  }

  if (!out_file.empty()) {
    nlohmann::json doc;
    doc["seed"] = rec.seed;
    doc["T"] = mu->horizon();
    doc["metric"] = rec.metric;
    for (const auto& [name, value] : rec.quantities) doc["quantities"][name] = value;
    nlohmann::json rows = nlohmann::json::array();
    for (const InequalityRow& row : rec.rows) {
      rows.push_back({{"phi", row.phi},
                      {"inequality", row.name},
                      {"lhs", format_ext(row.lhs)},
                      {"rhs", format_ext(row.rhs)},
                      {"status", row.status}});
    }
    doc["inequalities"] = std::move(rows);
    write_output(doc.dump(2) + "\n", out_file);
  }
  std::cout << text.str();
  return rec.violated() ? 1 : 0;
}

int cmd_verify(const VerifyConfig& config, const std::string& out_file) {
  VerifyResult result = run_verify(config);
  write_output(verify_csv(result), out_file);
  if (result.violations > 0) {
    std::cerr << result.violations << " VIOLATED row(s)\n";
    return 1;
  }
  return 0;
}

int cmd_oracle_check(const OracleCheckConfig& config) {
  OracleCheckResult result = run_oracle_check(config);
  std::cout << "classical instances checked: " << result.classical_done << "\n"
            << "adapted instances checked:   " << result.adapted_done << "\n";
  for (const auto& failure : result.failures) {
    std::cerr << "DISAGREEMENT " << failure.what << "\n" << failure.detail << "\n";
  }
  if (!result.failures.empty()) {
    std::cerr << result.failures.size() << " disagreement(s)\n";
    return 1;
  }
  std::cout << "all solver values match the exact oracle\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adapted optimal transport toolkit"};
  app.require_subcommand(1);

  std::string mu_file, nu_file, horizon = "1..4", mode = "tilt", metric = "l1";
  std::string phi_spec, out_file;
  uint64_t seed = 42;
  int count = 100, jobs = 1;
  double p = 1.0, alpha = 1.0;

  CLI::App* compute = app.add_subcommand(
      "compute", "compute every distance, divergence and bound for one pair");
  compute->add_option("--mu", mu_file, "law file for mu");
  compute->add_option("--nu", nu_file, "law file for nu");
  compute->add_option("--seed", seed, "seed when generating the pair");
  compute->add_option("--T", horizon, "horizon N or range A..B (generated pairs)");
  compute->add_option("--mode", mode, "generator mode: tilt|independent|singular");
  compute->add_option("--p", p, "order of the adapted distance");
  compute->add_option("--alpha", alpha, "alpha of the rule weight");
  compute->add_option("--phi", phi_spec, "extra weight: const:C or rule:alpha,p");
  compute->add_option("--metric", metric, "path metric: l1|max");
  compute->add_option("--out", out_file, "write a JSON report here");

  CLI::App* verify = app.add_subcommand(
      "verify", "run the seeded inequality suite; exit 0 iff nothing is VIOLATED");
  verify->add_option("--seed", seed, "master seed");
  verify->add_option("--count", count, "number of instances");
  verify->add_option("--T", horizon, "horizon N or range A..B");
  verify->add_option("--mode", mode, "generator mode: tilt|independent|singular");
  verify->add_option("--p", p, "order of the adapted distance");
  verify->add_option("--alpha", alpha, "alpha of the rule weight");
  verify->add_option("--metric", metric, "path metric: l1|max");
  verify->add_option("--jobs", jobs, "worker threads");
  verify->add_option("--out", out_file, "CSV file (default stdout)");

  CLI::App* oracle_check = app.add_subcommand(
      "oracle-check", "compare the double solvers against the exact rational oracle");
  int adapted_count = 50, max_size = 5;
  oracle_check->add_option("--seed", seed, "master seed");
  oracle_check->add_option("--count", count, "classical transport instances");
  oracle_check->add_option("--adapted", adapted_count, "adapted (T=2 binary) instances");
  oracle_check->add_option("--max-size", max_size, "per-side size cap, classical");

  CLI::App* ratio_scan = app.add_subcommand(
      "ratio-scan", "emit empirical max ratios per horizon for external plotting");
  std::string horizon_list = "1,2,3,4";
  ratio_scan->add_option("--T", horizon_list, "horizons, e.g. 1,2,3 or 1..4");
  ratio_scan->add_option("--count", count, "instances per horizon");
  ratio_scan->add_option("--seed", seed, "master seed");
  ratio_scan->add_option("--mode", mode, "generator mode");
  ratio_scan->add_option("--out", out_file, "CSV file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compute->parsed()) {
      return cmd_compute(mu_file, nu_file, seed, horizon, mode, p, alpha, phi_spec,
                         metric, out_file);
    }
    if (verify->parsed()) {
      VerifyConfig config;
      config.seed = seed;
      config.count = count;
      HorizonRange range = parse_horizon(horizon);
      config.t_min = range.t_min;
      config.t_max = range.t_max;
      config.mode = parse_mode(mode);
      config.p = p;
      config.alpha = alpha;
      config.combine = parse_metric(metric);
      config.jobs = jobs;
      return cmd_verify(config, out_file);
    }
    if (oracle_check->parsed()) {
      OracleCheckConfig config;
      config.seed = seed;
      config.classical_count = count;
      config.adapted_count = adapted_count;
      config.max_size = max_size;
      return cmd_oracle_check(config);
    }
    if (ratio_scan->parsed()) {
      RatioScanConfig config;
      config.horizons = parse_horizon_list(horizon_list);
      config.per_horizon = count;
      config.seed = seed;
      config.mode = parse_mode(mode);
      write_output(run_ratio_scan_csv(config), out_file);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
