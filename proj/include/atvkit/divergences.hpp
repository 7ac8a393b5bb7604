#pragma once

#include <vector>

#include "atvkit/process_law.hpp"
#include "atvkit/weight.hpp"

namespace atvkit {

// A nonnegative extended real. Infinity is an explicit flag, never a float
// sentinel, so callers can classify trivially-true inequality checks.
struct ExtReal {
  double value = 0.0;
  bool infinite = false;

  static ExtReal inf() { return ExtReal{0.0, true}; }
  static ExtReal finite(double v) { return ExtReal{v, false}; }
  bool is_finite() const { return !infinite; }
};

using EntropyValue = ExtReal;

// Per-step entropy terms h_1..h_T of the chain rule; each h_j carries its
// own factor 2, so the finite terms sum to 2 H(nu | mu).
struct ChainTerms {
  std::vector<ExtReal> terms;
  ExtReal sum() const;
};

// H(nu | mu) over full paths, with 0 log 0 = 0 and +infinity whenever nu
// charges a mu-null path.
EntropyValue relative_entropy(const ProcessLaw& nu, const ProcessLaw& mu);

// h_1 = 2 H(nu_1 | mu_1);
// h_j = integral of 2 H(nu^{x_{1:j-1}} | mu^{x_{1:j-1}}) d nu_{1:j-1}.
ChainTerms entropy_chain_terms(const ProcessLaw& nu, const ProcessLaw& mu);

// Weighted total variation: integral of phi d|mu - nu| over full paths.
double weighted_tv(const ProcessLaw& mu, const ProcessLaw& nu,
                   const WeightFunction& phi);

// log integral of e^{phi(x)^2} d mu, computed with a max shift so that rule
// weights of large magnitude cannot overflow.
double log_exp_moment(const ProcessLaw& mu, const WeightFunction& phi);

// Right-hand sides of the weighted transport-entropy bounds:
//   bv_rhs      = (1 + log int e^{phi^2} dmu)^{1/2} * sqrt(2 H(nu|mu))
//   adapted_rhs = (2 sqrt(T) + 1) * bv_rhs
ExtReal bv_rhs(const ProcessLaw& mu, const ProcessLaw& nu,
               const WeightFunction& phi);
ExtReal adapted_rhs(const ProcessLaw& mu, const ProcessLaw& nu,
                    const WeightFunction& phi);

// Bound for the p-adapted distance raised to the p:
//   (2^{p-1} (2 sqrt(T) + 1) / sqrt(alpha))
//     * (1 + log int e^{alpha d(x,x0)^{2p}} dmu)^{1/2} * sqrt(2 H(nu|mu)).
ExtReal corollary_rhs_p(const ProcessLaw& mu, const ProcessLaw& nu, double alpha,
                        const Path& x0, double p, const PathMetric& metric);

}  // namespace atvkit
