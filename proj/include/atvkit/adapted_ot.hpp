#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "atvkit/divergences.hpp"
#include "atvkit/metric.hpp"
#include "atvkit/ot_core.hpp"
#include "atvkit/process_law.hpp"
#include "atvkit/weight.hpp"

namespace atvkit {

// A joint distribution on pairs of full paths over one shared space list.
class Coupling {
 public:
  Coupling(SpacesPtr spaces, int horizon);

  void add(const Path& x, const Path& y, double mass);
  double mass(const Path& x, const Path& y) const;
  double total() const;
  const std::map<std::pair<Path, Path>, double>& atoms() const { return atoms_; }
  int horizon() const { return horizon_; }
  const SpacesPtr& spaces() const { return spaces_; }

  PathMeasure first_marginal() const;
  PathMeasure second_marginal() const;
  // Largest atomwise defect against the two laws' path measures.
  double marginal_defect(const ProcessLaw& mu, const ProcessLaw& nu) const;

 private:
  SpacesPtr spaces_;
  int horizon_;
  std::map<std::pair<Path, Path>, double> atoms_;
};

struct BicausalityReport {
  bool ok = true;
  double worst_violation = 0.0;
  struct Witness {
    int stage = 0;  // t of the violated factorization
    Path x_prefix;
    Path y_prefix;
  };
  std::optional<Witness> witness;
};

// Verifies both conditional-independence factorizations of a bicausal
// coupling: for every stage t and supported prefix pair, the conditional
// law of the x-suffix given (x_{1:t}, y_{1:t}) must agree with the
// conditional law given x_{1:t} alone, and symmetrically. worst_violation
// is the largest absolute discrepancy between conditional tables.
BicausalityReport check_bicausal(const Coupling& pi, const ProcessLaw& mu,
                                 const ProcessLaw& nu);

struct NestedResult {
  double value = 0.0;
  Coupling coupling;
};

// Horizon cap for the general-cost dynamic program (non-separable costs
// carry the whole prefix pair as state).
inline constexpr int kNestedFullCostHorizonCap = 6;

// AW_p by the backward dynamic program on the pair tree. For the l1 metric
// with p = 1 the cost decomposes stagewise; otherwise the DP runs on the
// full path cost, which is exact but only admitted for T within the cap.
// The returned coupling is bicausal and attains the value.
NestedResult nested_distance(const ProcessLaw& mu, const ProcessLaw& nu,
                             const PathMetric& metric, double p,
                             int full_cost_horizon_cap = kNestedFullCostHorizonCap);

// Test hook: force the full-path-cost dynamic program even when the
// stagewise decomposition applies.
NestedResult nested_distance_full_cost(const ProcessLaw& mu, const ProcessLaw& nu,
                                       const PathMetric& metric, double p);

// The explicit bicausal coupling of the adapted weighted-total-variation
// bound: kernels couple the corresponding kernels of mu and nu with the
// diagonal meet plus the normalized product of residuals while the paths
// agree, and independently after they split. When a residual has zero
// mass the kernel coupling is purely diagonal.
Coupling build_gamma(const ProcessLaw& mu, const ProcessLaw& nu);

// ATV_phi evaluated through build_gamma:
// integral of (phi(x) + phi(y)) 1{x != y} d gamma.
double atv_weighted(const ProcessLaw& mu, const ProcessLaw& nu,
                    const WeightFunction& phi);

// The j-th decomposition measure, 1 <= j <= T:
//   gamma_j(dx) = tail_mu^{x_{1:j}}(dx_{j+1:T})
//                 |mu^{x_{1:j-1}} - nu^{x_{1:j-1}}|(dx_j)
//                 (mu_{1:j-1} /\ nu_{1:j-1})(dx_{1:j-1}),
// with the obvious boundary forms at j = 1 and j = T. Stage-j atoms outside
// mu's support contribute nothing (their tail kernel is undefined; any
// convention leaves the verified bounds intact because the matching entropy
// term is infinite there).
PathMeasure gamma_j(const ProcessLaw& mu, const ProcessLaw& nu, int j);

struct LemmaRhsTerms {
  double tv_term = 0.0;
  std::vector<double> gamma_integrals;  // integral of phi d gamma_j, j = 1..T
};

// Terms of the bound ATV_phi <= TV_phi + 2 sum_j integral phi d gamma_j.
LemmaRhsTerms lemma_rhs_terms(const ProcessLaw& mu, const ProcessLaw& nu,
                              const WeightFunction& phi);

// psi_j(x_{1:j}) = integral of phi d tail_mu^{x_{1:j}}; psi_T = phi.
double psi_j(const ProcessLaw& mu, const WeightFunction& phi, int j,
             const Path& prefix);

struct GammaJBound {
  double lhs = 0.0;   // integral of phi d gamma_j
  ExtReal rhs;        // (1 + log int e^{phi^2} dmu)^{1/2} sqrt(h_j)
};

GammaJBound gamma_j_entropy_bound(const ProcessLaw& mu, const ProcessLaw& nu,
                                  const WeightFunction& phi, int j);

}  // namespace atvkit
