#include "atvkit/process_law.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "atvkit/tolerances.hpp"

namespace atvkit {

namespace tol {
double inequality_slack() {
  if (const char* env = std::getenv("ATVKIT_TOL_OVERRIDE")) {
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
  }
  return kInequalitySlack;
}
}  // namespace tol

Space::Space(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  for (int i = 0; i < static_cast<int>(atoms_.size()); ++i) {
    if (atoms_[static_cast<size_t>(i)].id.find('/') != std::string::npos) {
      throw InvalidLaw("atom id '" + atoms_[static_cast<size_t>(i)].id +
                       "' must not contain '/'");
    }
    auto [it, inserted] = index_.emplace(atoms_[static_cast<size_t>(i)].id, i);
    (void)it;
    if (!inserted) {
      throw InvalidLaw("duplicate atom id '" + atoms_[static_cast<size_t>(i)].id +
                       "' within one coordinate space");
    }
  }
}

int Space::index_of(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

bool Space::operator==(const Space& other) const {
  if (atoms_.size() != other.atoms_.size()) return false;
  for (size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].id != other.atoms_[i].id) return false;
    if (atoms_[i].value != other.atoms_[i].value) return false;
  }
  return true;
}

bool same_spaces(const SpaceList& a, const SpaceList& b) {
  if (a.size() != b.size()) return false;
  for (size_t t = 0; t < a.size(); ++t) {
    if (!(a[t] == b[t])) return false;
  }
  return true;
}

std::string path_to_string(const SpaceList& spaces, int coord_begin, const Path& p) {
  std::string out;
  for (size_t i = 0; i < p.size(); ++i) {
    if (i > 0) out += '/';
    const Space& sp = spaces.at(static_cast<size_t>(coord_begin) + i);
    out += sp.atom(p[i]).id;
  }
  return out;
}

PathMeasure::PathMeasure(SpacesPtr spaces, int coord_begin, int length)
    : spaces_(std::move(spaces)), coord_begin_(coord_begin), length_(length) {
  if (!spaces_) throw InvalidLaw("path measure needs a space list");
  if (coord_begin_ < 0 || length_ < 0 ||
      coord_begin_ + length_ > static_cast<int>(spaces_->size())) {
    throw InvalidLaw("path measure coordinates out of range");
  }
}

void PathMeasure::add(const Path& p, double mass) {
  if (static_cast<int>(p.size()) != length_) {
    throw InvalidLaw("path length does not match measure length");
  }
  if (mass < 0.0) throw InvalidLaw("negative mass in path measure");
  if (mass == 0.0) return;
  atoms_[p] += mass;
}

double PathMeasure::mass(const Path& p) const {
  auto it = atoms_.find(p);
  return it == atoms_.end() ? 0.0 : it->second;
}

double PathMeasure::total() const {
  double s = 0.0;
  for (const auto& [p, m] : atoms_) s += m;
  return s;
}

namespace {

void require_same_space(const PathMeasure& a, const PathMeasure& b) {
  if (a.coord_begin() != b.coord_begin() || a.length() != b.length() ||
      !same_spaces(*a.spaces(), *b.spaces())) {
    throw SpaceMismatch("path measures live on different path spaces");
  }
}

}  // namespace

PathMeasure meet(const PathMeasure& a, const PathMeasure& b) {
  require_same_space(a, b);
  PathMeasure out(a.spaces(), a.coord_begin(), a.length());
  for (const auto& [p, ma] : a.atoms()) {
    double mb = b.mass(p);
    double m = std::min(ma, mb);
    if (m > 0.0) out.add(p, m);
  }
  return out;
}

ResidualParts residual_parts(const PathMeasure& a, const PathMeasure& b) {
  require_same_space(a, b);
  ResidualParts out{PathMeasure(a.spaces(), a.coord_begin(), a.length()),
                    PathMeasure(a.spaces(), a.coord_begin(), a.length()),
                    PathMeasure(a.spaces(), a.coord_begin(), a.length())};
  std::set<Path> keys;
  for (const auto& [p, m] : a.atoms()) keys.insert(p);
  for (const auto& [p, m] : b.atoms()) keys.insert(p);
  for (const Path& p : keys) {
    double d = a.mass(p) - b.mass(p);
    if (d > 0.0) {
      out.positive.add(p, d);
      out.abs_diff.add(p, d);
    } else if (d < 0.0) {
      out.negative.add(p, -d);
      out.abs_diff.add(p, -d);
    }
  }
  return out;
}

ProcessLaw::ProcessLaw(SpacesPtr spaces, std::map<Path, std::vector<double>> kernels)
    : spaces_(std::move(spaces)) {
  if (!spaces_ || spaces_->empty()) {
    throw InvalidHorizon("process law needs horizon T >= 1");
  }
  const int T = horizon();
  for (const auto& [prefix, row] : kernels) {
    if (static_cast<int>(prefix.size()) >= T) {
      throw InvalidLaw("kernel key of length " + std::to_string(prefix.size()) +
                       " in a horizon-" + std::to_string(T) + " law");
    }
    for (size_t t = 0; t < prefix.size(); ++t) {
      if (prefix[t] < 0 || prefix[t] >= (*spaces_)[t].size()) {
        throw InvalidLaw("kernel key holds an out-of-range atom index");
      }
    }
  }

  // Keep only rows reachable with positive probability; validate as we walk.
  std::vector<Path> stack;
  stack.push_back({});
  while (!stack.empty()) {
    Path prefix = std::move(stack.back());
    stack.pop_back();
    const int t = static_cast<int>(prefix.size());
    if (t == T) continue;
    auto it = kernels.find(prefix);
    if (it == kernels.end()) {
      throw InvalidLaw("missing kernel at reachable prefix '" +
                       path_to_string(*spaces_, 0, prefix) + "'");
    }
    std::vector<double> row = it->second;
    const Space& sp = (*spaces_)[static_cast<size_t>(t)];
    if (static_cast<int>(row.size()) != sp.size()) {
      throw InvalidLaw("kernel row width mismatch at prefix '" +
                       path_to_string(*spaces_, 0, prefix) + "'");
    }
    double sum = 0.0;
    for (double& p : row) {
      if (p < 0.0) {
        if (p < -1e-15) {
          throw InvalidLaw("negative probability at prefix '" +
                           path_to_string(*spaces_, 0, prefix) + "'");
        }
        p = 0.0;
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol::kProbSum) {
      std::ostringstream msg;
      msg << "kernel row at prefix '" << path_to_string(*spaces_, 0, prefix)
          << "' sums to " << sum;
      throw InvalidLaw(msg.str());
    }
    kernels_.emplace(prefix, row);
    for (int a = 0; a < sp.size(); ++a) {
      if (row[static_cast<size_t>(a)] > 0.0) {
        Path child = prefix;
        child.push_back(a);
        stack.push_back(std::move(child));
      }
    }
  }
}

const std::vector<double>& ProcessLaw::kernel(const Path& prefix) const {
  auto it = kernels_.find(prefix);
  if (it == kernels_.end()) {
    throw PrefixNotSupported("prefix '" + path_to_string(*spaces_, 0, prefix) +
                             "' has zero probability or is out of range");
  }
  return it->second;
}

bool ProcessLaw::supports_prefix(const Path& prefix) const {
  return prefix_mass(prefix) > 0.0;
}

double ProcessLaw::prefix_mass(const Path& prefix) const {
  if (static_cast<int>(prefix.size()) > horizon()) return 0.0;
  double m = 1.0;
  Path cur;
  for (int a : prefix) {
    auto it = kernels_.find(cur);
    if (it == kernels_.end()) return 0.0;
    if (a < 0 || a >= static_cast<int>(it->second.size())) return 0.0;
    double p = it->second[static_cast<size_t>(a)];
    if (p <= 0.0) return 0.0;
    m *= p;
    cur.push_back(a);
  }
  return m;
}

PathMeasure ProcessLaw::path_measure() const {
  PathMeasure out(spaces_, 0, horizon());
  Path prefix;
  // depth-first product of kernel rows
  auto walk = [&](auto&& self, double mass) -> void {
    const int t = static_cast<int>(prefix.size());
    if (t == horizon()) {
      out.add(prefix, mass);
      return;
    }
    const std::vector<double>& row = kernels_.at(prefix);
    for (int a = 0; a < static_cast<int>(row.size()); ++a) {
      double p = row[static_cast<size_t>(a)];
      if (p <= 0.0) continue;
      prefix.push_back(a);
      self(self, mass * p);
      prefix.pop_back();
    }
  };
  walk(walk, 1.0);
  return out;
}

PathMeasure ProcessLaw::tail_law(const Path& prefix) const {
  const int t = static_cast<int>(prefix.size());
  if (t >= horizon()) {
    throw InvalidIndex("tail law needs a prefix of length < T");
  }
  if (kernels_.find(prefix) == kernels_.end()) {
    throw PrefixNotSupported("prefix '" + path_to_string(*spaces_, 0, prefix) +
                             "' has zero probability");
  }
  PathMeasure out(spaces_, t, horizon() - t);
  Path cur = prefix;
  auto walk = [&](auto&& self, double mass) -> void {
    if (static_cast<int>(cur.size()) == horizon()) {
      out.add(Path(cur.begin() + t, cur.end()), mass);
      return;
    }
    const std::vector<double>& row = kernels_.at(cur);
    for (int a = 0; a < static_cast<int>(row.size()); ++a) {
      double p = row[static_cast<size_t>(a)];
      if (p <= 0.0) continue;
      cur.push_back(a);
      self(self, mass * p);
      cur.pop_back();
    }
  };
  walk(walk, 1.0);
  return out;
}

PathMeasure ProcessLaw::projection(int t) const {
  if (t < 1 || t > horizon()) {
    throw InvalidHorizon("projection index must satisfy 1 <= t <= T");
  }
  PathMeasure out(spaces_, 0, t);
  Path prefix;
  auto walk = [&](auto&& self, double mass) -> void {
    if (static_cast<int>(prefix.size()) == t) {
      out.add(prefix, mass);
      return;
    }
    const std::vector<double>& row = kernels_.at(prefix);
    for (int a = 0; a < static_cast<int>(row.size()); ++a) {
      double p = row[static_cast<size_t>(a)];
      if (p <= 0.0) continue;
      prefix.push_back(a);
      self(self, mass * p);
      prefix.pop_back();
    }
  };
  walk(walk, 1.0);
  return out;
}

std::vector<Path> ProcessLaw::supported_prefixes(int t) const {
  if (t < 0 || t > horizon()) {
    throw InvalidHorizon("prefix length must satisfy 0 <= t <= T");
  }
  std::vector<Path> out;
  Path prefix;
  auto walk = [&](auto&& self) -> void {
    if (static_cast<int>(prefix.size()) == t) {
      out.push_back(prefix);
      return;
    }
    const std::vector<double>& row = kernels_.at(prefix);
    for (int a = 0; a < static_cast<int>(row.size()); ++a) {
      if (row[static_cast<size_t>(a)] <= 0.0) continue;
      prefix.push_back(a);
      self(self);
      prefix.pop_back();
    }
  };
  walk(walk);
  return out;
}

ProcessLaw law_from_path_measure(const PathMeasure& m) {
  if (m.coord_begin() != 0 ||
      m.length() != static_cast<int>(m.spaces()->size())) {
    throw InvalidLaw("law_from_path_measure needs a full-path measure");
  }
  if (std::abs(m.total() - 1.0) > tol::kProbSum) {
    std::ostringstream msg;
    msg << "path measure has total mass " << m.total() << ", expected 1";
    throw NotProbability(msg.str());
  }
  const int T = m.length();
  // Prefix masses, then kernel rows by conditional division.
  std::map<Path, double> prefix_mass;
  for (const auto& [p, mass] : m.atoms()) {
    for (int t = 0; t <= T; ++t) {
      prefix_mass[Path(p.begin(), p.begin() + t)] += mass;
    }
  }
  std::map<Path, std::vector<double>> kernels;
  for (const auto& [prefix, mass] : prefix_mass) {
    const int t = static_cast<int>(prefix.size());
    if (t == T || mass <= 0.0) continue;
    const Space& sp = (*m.spaces())[static_cast<size_t>(t)];
    std::vector<double> row(static_cast<size_t>(sp.size()), 0.0);
    for (int a = 0; a < sp.size(); ++a) {
      Path child = prefix;
      child.push_back(a);
      auto it = prefix_mass.find(child);
      if (it != prefix_mass.end()) row[static_cast<size_t>(a)] = it->second / mass;
    }
    kernels.emplace(prefix, std::move(row));
  }
  return ProcessLaw(m.spaces(), std::move(kernels));
}

namespace {

std::vector<double> remap_row(const std::vector<double>& row, const Space& from,
                              const Space& to) {
  std::vector<double> out(static_cast<size_t>(to.size()), 0.0);
  for (int a = 0; a < from.size(); ++a) {
    int j = to.index_of(from.atom(a).id);
    out[static_cast<size_t>(j)] = row[static_cast<size_t>(a)];
  }
  return out;
}

ProcessLaw remap_law(const ProcessLaw& law, const SpacesPtr& merged) {
  std::map<Path, std::vector<double>> kernels;
  // Translate prefixes atom by atom, rows dense over the merged space.
  auto translate = [&](const Path& p) {
    Path out;
    out.reserve(p.size());
    for (size_t t = 0; t < p.size(); ++t) {
      const std::string& id = (*law.spaces())[t].atom(p[t]).id;
      out.push_back((*merged)[t].index_of(id));
    }
    return out;
  };
  for (const auto& [prefix, row] : law.kernels()) {
    const size_t t = prefix.size();
    kernels.emplace(translate(prefix),
                    remap_row(row, (*law.spaces())[t], (*merged)[t]));
  }
  return ProcessLaw(merged, std::move(kernels));
}

}  // namespace

std::pair<ProcessLaw, ProcessLaw> unify(const ProcessLaw& a, const ProcessLaw& b) {
  if (a.horizon() != b.horizon()) {
    throw SpaceMismatch("laws have different horizons");
  }
  if (a.spaces() == b.spaces() || same_spaces(*a.spaces(), *b.spaces())) {
    return {a, b};
  }
  SpaceList merged;
  for (int t = 0; t < a.horizon(); ++t) {
    const Space& sa = (*a.spaces())[static_cast<size_t>(t)];
    const Space& sb = (*b.spaces())[static_cast<size_t>(t)];
    std::map<std::string, std::optional<double>> atoms;
    for (int i = 0; i < sa.size(); ++i) atoms[sa.atom(i).id] = sa.atom(i).value;
    for (int i = 0; i < sb.size(); ++i) {
      const Atom& atom = sb.atom(i);
      auto it = atoms.find(atom.id);
      if (it == atoms.end()) {
        atoms[atom.id] = atom.value;
      } else if (it->second && atom.value && *it->second != *atom.value) {
        throw SpaceMismatch("conflicting values for atom '" + atom.id +
                            "' in coordinate " + std::to_string(t + 1));
      } else if (!it->second) {
        it->second = atom.value;
      }
    }
    std::vector<Atom> list;
    for (const auto& [id, value] : atoms) list.push_back(Atom{id, value});
    merged.emplace_back(std::move(list));
  }
  auto merged_ptr = std::make_shared<const SpaceList>(std::move(merged));
  return {remap_law(a, merged_ptr), remap_law(b, merged_ptr)};
}

void require_same_spaces(const ProcessLaw& a, const ProcessLaw& b) {
  if (a.horizon() != b.horizon() ||
      (a.spaces() != b.spaces() && !same_spaces(*a.spaces(), *b.spaces()))) {
    throw SpaceMismatch("laws live on different path spaces");
  }
}

}  // namespace atvkit
