#pragma once

#include <functional>
#include <vector>

#include <gmpxx.h>

#include "atvkit/ot_core.hpp"
#include "atvkit/process_law.hpp"

namespace atvkit::oracle {

// Exact rational arithmetic throughout; no floating point enters the
// adjudication path. Doubles are converted bit-exactly.
using Rat = mpq_class;

Rat rat_from_double(double v);
double rat_to_double(const Rat& r);

// min c.x subject to A x = b, x >= 0, solved by a dense rational simplex
// (two phases, Bland's pivot rule). Dependent rows are removed by rational
// Gaussian elimination before solving.
struct LinearProgram {
  int num_vars = 0;
  std::vector<Rat> objective;
  std::vector<std::vector<Rat>> rows;
  std::vector<Rat> rhs;
};

Rat solve_min(const LinearProgram& lp);

// Hard cap on oracle variables; rational simplex is for desk-scale
// adjudication only.
inline constexpr int kMaxVariables = 400;

// Exact optimum of the classical transport LP. The marginals are
// normalized to exact probability vectors after bit-exact conversion.
Rat classical_ot_lp(const TransportProblem& problem);

// Exact optimum over the bicausal coupling polytope of mu and nu for the
// given path-pair cost. Causality is encoded as linear proportionality
// constraints between prefix-pair blocks and the laws' own kernels.
Rat bicausal_lp(const ProcessLaw& mu, const ProcessLaw& nu,
                const std::function<double(const Path&, const Path&)>& cost);

}  // namespace atvkit::oracle
