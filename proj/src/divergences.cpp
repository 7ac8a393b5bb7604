#include "atvkit/divergences.hpp"

#include <algorithm>
#include <cmath>

namespace atvkit {

ExtReal ChainTerms::sum() const {
  double s = 0.0;
  for (const ExtReal& t : terms) {
    if (t.infinite) return ExtReal::inf();
    s += t.value;
  }
  return ExtReal::finite(s);
}

EntropyValue relative_entropy(const ProcessLaw& nu, const ProcessLaw& mu) {
  require_same_spaces(nu, mu);
  PathMeasure pn = nu.path_measure();
  PathMeasure pm = mu.path_measure();
  double h = 0.0;
  for (const auto& [path, n_mass] : pn.atoms()) {
    double m_mass = pm.mass(path);
    if (m_mass <= 0.0) return EntropyValue::inf();
    h += n_mass * std::log(n_mass / m_mass);
  }
  return EntropyValue::finite(std::max(0.0, h));
}

namespace {

// 2 H(q | p) for two kernel rows; infinite when q charges a p-null atom.
ExtReal row_entropy_2h(const std::vector<double>& q, const std::vector<double>& p) {
  double h = 0.0;
  for (size_t a = 0; a < q.size(); ++a) {
    if (q[a] <= 0.0) continue;
    if (p[a] <= 0.0) return ExtReal::inf();
    h += q[a] * std::log(q[a] / p[a]);
  }
  return ExtReal::finite(2.0 * std::max(0.0, h));
}

}  // namespace

ChainTerms entropy_chain_terms(const ProcessLaw& nu, const ProcessLaw& mu) {
  require_same_spaces(nu, mu);
  const int T = nu.horizon();
  ChainTerms out;
  for (int j = 1; j <= T; ++j) {
    ExtReal hj = ExtReal::finite(0.0);
    PathMeasure nu_prefix =
        j == 1 ? PathMeasure(nu.spaces(), 0, 0) : nu.projection(j - 1);
    if (j == 1) nu_prefix.add({}, 1.0);
    for (const auto& [prefix, mass] : nu_prefix.atoms()) {
      const std::vector<double>& nu_row = nu.kernel(prefix);
      if (!mu.supports_prefix(prefix)) {
        hj = ExtReal::inf();
        break;
      }
      ExtReal term = row_entropy_2h(nu_row, mu.kernel(prefix));
      if (term.infinite) {
        hj = ExtReal::inf();
        break;
      }
      hj.value += mass * term.value;
    }
    out.terms.push_back(hj);
  }
  return out;
}

double weighted_tv(const ProcessLaw& mu, const ProcessLaw& nu,
                   const WeightFunction& phi) {
  require_same_spaces(mu, nu);
  ResidualParts parts = residual_parts(mu.path_measure(), nu.path_measure());
  double out = 0.0;
  for (const auto& [path, mass] : parts.abs_diff.atoms()) {
    out += phi(path) * mass;
  }
  return out;
}

double log_exp_moment(const ProcessLaw& mu, const WeightFunction& phi) {
  PathMeasure pm = mu.path_measure();
  double shift = 0.0;
  for (const auto& [path, mass] : pm.atoms()) {
    double w = phi(path);
    shift = std::max(shift, w * w);
  }
  double s = 0.0;
  for (const auto& [path, mass] : pm.atoms()) {
    double w = phi(path);
    s += mass * std::exp(w * w - shift);
  }
  return std::max(0.0, shift + std::log(s));
}

ExtReal bv_rhs(const ProcessLaw& mu, const ProcessLaw& nu,
               const WeightFunction& phi) {
  EntropyValue h = relative_entropy(nu, mu);
  if (h.infinite) return ExtReal::inf();
  double moment = log_exp_moment(mu, phi);
  return ExtReal::finite(std::sqrt(1.0 + moment) * std::sqrt(2.0 * h.value));
}

ExtReal adapted_rhs(const ProcessLaw& mu, const ProcessLaw& nu,
                    const WeightFunction& phi) {
  ExtReal base = bv_rhs(mu, nu, phi);
  if (base.infinite) return base;
  double prefactor = 2.0 * std::sqrt(static_cast<double>(mu.horizon())) + 1.0;
  return ExtReal::finite(prefactor * base.value);
}

ExtReal corollary_rhs_p(const ProcessLaw& mu, const ProcessLaw& nu, double alpha,
                        const Path& x0, double p, const PathMetric& metric) {
  if (alpha <= 0.0) throw InvalidParameter("corollary bound needs alpha > 0");
  if (p < 1.0) throw InvalidParameter("corollary bound needs p >= 1");
  WeightFunction phi = WeightFunction::rule(alpha, x0, p, metric);
  ExtReal base = adapted_rhs(mu, nu, phi);
  if (base.infinite) return base;
  double factor = std::pow(2.0, p - 1.0) / std::sqrt(alpha);
  return ExtReal::finite(factor * base.value);
}

}  // namespace atvkit
