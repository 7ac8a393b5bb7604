#pragma once

#include <stdexcept>
#include <string>

namespace atvkit {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A law or measure violates a construction invariant.
struct InvalidLaw : Error { using Error::Error; };
// Prefix has zero probability or is unknown to the law.
struct PrefixNotSupported : Error { using Error::Error; };
// Two objects live on different path spaces (horizon or atom sets differ).
struct SpaceMismatch : Error { using Error::Error; };
// Time index outside 1..T.
struct InvalidHorizon : Error { using Error::Error; };
struct InvalidIndex : Error { using Error::Error; };
// Path measure expected to be a probability but is not.
struct NotProbability : Error { using Error::Error; };
// Malformed law document.
struct ParseError : Error { using Error::Error; };
// Transport marginals do not match.
struct MarginalMismatch : Error { using Error::Error; };
// A claimed coupling fails to reproduce its marginals.
struct NotACoupling : Error { using Error::Error; };
struct InvalidParameter : Error { using Error::Error; };
// Instance exceeds the oracle size cap.
struct TooLarge : Error { using Error::Error; };

}  // namespace atvkit
