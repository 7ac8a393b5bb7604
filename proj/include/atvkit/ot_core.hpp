#pragma once

#include <vector>

#include "atvkit/metric.hpp"
#include "atvkit/process_law.hpp"

namespace atvkit {

// A dense finite transport problem between two probability vectors.
struct TransportProblem {
  int rows = 0;
  int cols = 0;
  std::vector<double> cost;    // row-major rows x cols, nonnegative
  std::vector<double> source;  // length rows
  std::vector<double> target;  // length cols

  double cost_at(int i, int j) const {
    return cost[static_cast<size_t>(i) * cols + j];
  }
  // Throws MarginalMismatch / InvalidParameter on malformed instances.
  void validate() const;
};

struct TransportPlan {
  int rows = 0;
  int cols = 0;
  std::vector<double> plan;  // row-major, feasible for the marginals
  double value = 0.0;
  // Dual certificate: u_i + v_j <= cost_ij everywhere, with equality on the
  // support of the plan.
  std::vector<double> row_duals;
  std::vector<double> col_duals;

  double plan_at(int i, int j) const {
    return plan[static_cast<size_t>(i) * cols + j];
  }
};

// Exact (up to float) solver: transportation simplex with a north-west
// corner start and Bland's anti-cycling pivot rule. Degeneracy is handled
// by an epsilon perturbation of the marginals which is removed from the
// reported plan. Every returned plan is certified against its duals.
TransportPlan solve_transport(const TransportProblem& problem);

// W_p between two laws: p-th root of the optimal transport cost d(x,y)^p
// between the induced path measures.
double wasserstein(const ProcessLaw& mu, const ProcessLaw& nu,
                   const PathMetric& metric, double p);

}  // namespace atvkit
