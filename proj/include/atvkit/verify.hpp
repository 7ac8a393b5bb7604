#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atvkit/adapted_ot.hpp"
#include "atvkit/divergences.hpp"
#include "atvkit/generator.hpp"

namespace atvkit {

// One checked inequality: named, with both sides, a ratio and a status.
// status is VIOLATED exactly when lhs > rhs * (1 + slack) with finite rhs.
struct InequalityRow {
  std::string phi;   // weight descriptor, "-" when not applicable
  std::string name;
  ExtReal lhs;
  ExtReal rhs;
  std::string status;
};

struct VerificationRecord {
  uint64_t index = 0;
  uint64_t seed = 0;
  int horizon = 0;
  int branching = 0;
  std::string metric;
  std::vector<InequalityRow> rows;
  // Raw quantities in report order (formatted), for the compute command.
  std::vector<std::pair<std::string, std::string>> quantities;

  bool violated() const;
};

// Evaluates every inequality of the harness on one law pair:
// the adapted and classical weighted bounds, the tv-plus-sum bound, the
// per-step entropy bounds, the chain rule, W_p <= AW_p, the adapted Pinsker
// bound, the (2T-1) total-variation comparison, the order-p bound, and the structural coupling checks.
VerificationRecord evaluate_pair(const ProcessLaw& mu, const ProcessLaw& nu,
                                 const PathMetric& metric, double p, double alpha,
                                 const std::vector<WeightFunction>& extra_phis = {});

struct VerifyConfig {
  uint64_t seed = 42;
  int count = 100;
  int t_min = 1;
  int t_max = 4;
  PairMode mode = PairMode::kTilt;
  double p = 1.0;
  double alpha = 1.0;
  PathMetric::Combine combine = PathMetric::Combine::L1;
  int jobs = 1;
};

struct VerifyResult {
  std::vector<VerificationRecord> records;
  int violations = 0;
};

// Runs the seeded suite; instances are evaluated by a worker pool and
// merged in index order, so the emitted CSV is byte-identical for any job
// count.
VerifyResult run_verify(const VerifyConfig& config);

std::string verify_csv(const VerifyResult& result);

struct OracleCheckConfig {
  uint64_t seed = 42;
  int classical_count = 100;
  int adapted_count = 50;
  int max_size = 5;  // per-side cap for classical instances
};

struct OracleCheckResult {
  int classical_done = 0;
  int adapted_done = 0;
  struct Failure {
    std::string what;
    std::string detail;  // offending values plus serialized laws
  };
  std::vector<Failure> failures;
};

// Compares solve_transport, nested_distance and atv_weighted against the
// exact rational oracle on tiny instances.
OracleCheckResult run_oracle_check(const OracleCheckConfig& config);

struct RatioScanConfig {
  std::vector<int> horizons;
  int per_horizon = 50;
  uint64_t seed = 42;
  PairMode mode = PairMode::kTilt;
  std::vector<double> alphas = {1.0, 1e2, 1e4};
};

// Empirical maxima of atv_{sqrt(alpha)} / (sqrt(alpha) sqrt(2H)) per
// horizon, next to the sqrt(T) and 2 sqrt(T) + 1 reference constants.
std::string run_ratio_scan_csv(const RatioScanConfig& config);

// Shared formatting helpers (deterministic, locale-independent).
std::string format_double(double v);
std::string format_ext(const ExtReal& v);

}  // namespace atvkit
