#pragma once

#include <string>

#include "atvkit/process_law.hpp"

namespace atvkit {

// Law document format (JSON, UTF-8):
//   { "horizon": T,
//     "spaces":  [["a0","a1",...], ...],          one atom list per coordinate
//     "values":  [{"a0": 0.0, ...}, ...],         optional, per coordinate
//     "kernels": { "": {"a0": 0.5, ...},          prefix -> child probabilities
//                  "a0": {...}, "a0/a1": {...} } }
// Prefix keys are '/'-joined atom ids; the root prefix is the empty string.
// Rows deviating from sum 1 by more than tol::kParserProbSum are rejected;
// accepted rows are renormalized before construction.
ProcessLaw load_law(const std::string& text);
std::string save_law(const ProcessLaw& law);

ProcessLaw load_law_file(const std::string& path);
void save_law_file(const ProcessLaw& law, const std::string& path);

}  // namespace atvkit
