#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atvkit/errors.hpp"

namespace atvkit {

// A path is a list of atom indices, one per coordinate. Index i refers to
// the i-th atom of the corresponding Space.
using Path = std::vector<int>;

struct Atom {
  std::string id;
  // Numeric coordinate used by metric-derived weights; optional.
  std::optional<double> value;
};

// One coordinate space X_t: a finite list of atoms with unique ids.
class Space {
 public:
  explicit Space(std::vector<Atom> atoms);

  int size() const { return static_cast<int>(atoms_.size()); }
  const Atom& atom(int i) const { return atoms_.at(static_cast<size_t>(i)); }
  // -1 when the id is absent.
  int index_of(const std::string& id) const;

  bool operator==(const Space& other) const;

 private:
  std::vector<Atom> atoms_;
  std::map<std::string, int> index_;
};

using SpaceList = std::vector<Space>;
using SpacesPtr = std::shared_ptr<const SpaceList>;

bool same_spaces(const SpaceList& a, const SpaceList& b);
std::string path_to_string(const SpaceList& spaces, int coord_begin, const Path& p);

// A nonnegative measure on paths over coordinates
// [coord_begin, coord_begin + length) of an ambient space list.
// Zero-mass entries are never stored.
class PathMeasure {
 public:
  PathMeasure(SpacesPtr spaces, int coord_begin, int length);

  void add(const Path& p, double mass);
  double mass(const Path& p) const;
  double total() const;
  bool empty() const { return atoms_.empty(); }

  const std::map<Path, double>& atoms() const { return atoms_; }
  int coord_begin() const { return coord_begin_; }
  int length() const { return length_; }
  const SpacesPtr& spaces() const { return spaces_; }

 private:
  SpacesPtr spaces_;
  int coord_begin_;
  int length_;
  std::map<Path, double> atoms_;
};

// Pointwise minimum of two measures on the same path space.
PathMeasure meet(const PathMeasure& a, const PathMeasure& b);

struct ResidualParts {
  PathMeasure positive;  // (a - b)_+
  PathMeasure negative;  // (b - a)_+
  PathMeasure abs_diff;  // |a - b|
};

// Jordan decomposition of a - b. positive and negative have disjoint
// supports; abs_diff is their sum.
ResidualParts residual_parts(const PathMeasure& a, const PathMeasure& b);

// A finite-support law of a T-step process, stored as a rooted tree of
// transition kernels: every reachable prefix of length t < T carries a
// probability row over the atoms of X_{t+1}. Zero-probability branches are
// pruned at construction and kernels of unreachable prefixes are dropped.
// Immutable after construction.
class ProcessLaw {
 public:
  // Rows are dense over the atoms of the corresponding space. Entries must
  // be nonnegative and each reachable row must sum to 1 within tol::kProbSum.
  ProcessLaw(SpacesPtr spaces, std::map<Path, std::vector<double>> kernels);

  int horizon() const { return static_cast<int>(spaces_->size()); }
  const SpacesPtr& spaces() const { return spaces_; }

  // Child distribution at a supported prefix of length t < T.
  const std::vector<double>& kernel(const Path& prefix) const;
  bool supports_prefix(const Path& prefix) const;
  // Product of kernel probabilities along the prefix (0 when unsupported).
  double prefix_mass(const Path& prefix) const;

  // Induced probability measure on full paths.
  PathMeasure path_measure() const;
  // Conditional law of the remaining coordinates given a supported prefix
  // of length t < T; lives on X_{t+1:T}.
  PathMeasure tail_law(const Path& prefix) const;
  // Marginal of the first t coordinates, 1 <= t <= T.
  PathMeasure projection(int t) const;

  // Supported prefixes of length t (0 <= t <= T), sorted.
  std::vector<Path> supported_prefixes(int t) const;

  const std::map<Path, std::vector<double>>& kernels() const { return kernels_; }

 private:
  SpacesPtr spaces_;
  std::map<Path, std::vector<double>> kernels_;
};

// Inverse of ProcessLaw::path_measure for probability measures on full
// paths. Throws NotProbability when the total mass is not 1.
ProcessLaw law_from_path_measure(const PathMeasure& m);

// Rebuilds both laws on the merged space list (per-coordinate union of
// atoms, sorted by id). Atoms present in one law only become zero-mass in
// the other. Throws SpaceMismatch on horizon or atom-value conflicts.
std::pair<ProcessLaw, ProcessLaw> unify(const ProcessLaw& a, const ProcessLaw& b);

// Throws SpaceMismatch unless both laws already share equal space lists.
void require_same_spaces(const ProcessLaw& a, const ProcessLaw& b);

}  // namespace atvkit
