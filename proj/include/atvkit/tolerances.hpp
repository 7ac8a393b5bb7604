#pragma once

namespace atvkit::tol {

// Single place for every numeric threshold used by the library and the
// verification harness. Commands never hard-code their own values.

// Kernel rows and full path measures must sum to 1 within this bound.
inline constexpr double kProbSum = 1e-12;
// File parser accepts rows within this bound of 1, then renormalizes.
inline constexpr double kParserProbSum = 1e-9;
// Float equality checks (chain rule, T=1 degeneracy, round trips).
inline constexpr double kEquality = 1e-10;
// Agreement between the double solvers and the exact rational oracle.
inline constexpr double kOracleClassical = 1e-9;
inline constexpr double kOracleAdapted = 1e-8;
// Relative slack for inequality verification: lhs <= rhs * (1 + slack).
inline constexpr double kInequalitySlack = 1e-9;
// Absolute tolerance on conditional tables in the bicausality check.
inline constexpr double kBicausal = 1e-9;
// Couplings must reproduce both marginals within this bound.
inline constexpr double kMarginal = 1e-10;

// Inequality slack, honoring the ATVKIT_TOL_OVERRIDE environment variable
// (a replacement value for kInequalitySlack; experiments only).
double inequality_slack();

}  // namespace atvkit::tol
