#include "atvkit/metric.hpp"

#include <algorithm>
#include <cmath>

namespace atvkit {

PathMetric::PathMetric(SpacesPtr spaces, std::vector<std::vector<double>> tables,
                       Combine combine)
    : spaces_(std::move(spaces)), tables_(std::move(tables)), combine_(combine) {}

PathMetric PathMetric::from_values(SpacesPtr spaces, Combine combine) {
  if (!spaces || spaces->empty()) throw InvalidHorizon("metric needs spaces");
  std::vector<std::vector<double>> tables;
  for (size_t t = 0; t < spaces->size(); ++t) {
    const Space& sp = (*spaces)[t];
    const int n = sp.size();
    std::vector<double> table(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0);
    for (int a = 0; a < n; ++a) {
      if (!sp.atom(a).value) {
        throw InvalidParameter("atom '" + sp.atom(a).id + "' in coordinate " +
                               std::to_string(t + 1) +
                               "' lacks a numeric value; metric cannot be derived");
      }
    }
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        table[static_cast<size_t>(a) * n + b] =
            std::abs(*sp.atom(a).value - *sp.atom(b).value);
      }
    }
    tables.push_back(std::move(table));
  }
  return PathMetric(std::move(spaces), std::move(tables), combine);
}

PathMetric PathMetric::from_tables(SpacesPtr spaces,
                                   std::vector<std::vector<double>> tables,
                                   Combine combine) {
  if (!spaces || spaces->empty()) throw InvalidHorizon("metric needs spaces");
  if (tables.size() != spaces->size()) {
    throw InvalidParameter("metric needs one table per coordinate");
  }
  for (size_t t = 0; t < tables.size(); ++t) {
    const int n = (*spaces)[t].size();
    const std::vector<double>& table = tables[t];
    if (static_cast<int>(table.size()) != n * n) {
      throw InvalidParameter("metric table " + std::to_string(t + 1) +
                             " has wrong size");
    }
    auto d = [&](int a, int b) { return table[static_cast<size_t>(a) * n + b]; };
    for (int a = 0; a < n; ++a) {
      if (std::abs(d(a, a)) > 1e-12) {
        throw InvalidParameter("metric table " + std::to_string(t + 1) +
                               ": nonzero diagonal");
      }
      for (int b = 0; b < n; ++b) {
        if (d(a, b) < 0.0) {
          throw InvalidParameter("metric table " + std::to_string(t + 1) +
                                 ": negative entry");
        }
        if (std::abs(d(a, b) - d(b, a)) > 1e-12) {
          throw InvalidParameter("metric table " + std::to_string(t + 1) +
                                 ": not symmetric");
        }
        for (int c = 0; c < n; ++c) {
          if (d(a, c) > d(a, b) + d(b, c) + 1e-12) {
            throw InvalidParameter("metric table " + std::to_string(t + 1) +
                                   ": triangle inequality fails");
          }
        }
      }
    }
  }
  return PathMetric(std::move(spaces), std::move(tables), combine);
}

double PathMetric::coord_distance(int t, int a, int b) const {
  const int n = (*spaces_)[static_cast<size_t>(t)].size();
  return tables_[static_cast<size_t>(t)][static_cast<size_t>(a) * n + b];
}

double PathMetric::distance(const Path& x, const Path& y) const {
  if (x.size() != y.size()) {
    throw SpaceMismatch("paths of different lengths in metric evaluation");
  }
  double out = 0.0;
  for (size_t t = 0; t < x.size(); ++t) {
    double d = coord_distance(static_cast<int>(t), x[t], y[t]);
    if (combine_ == Combine::L1) {
      out += d;
    } else {
      out = std::max(out, d);
    }
  }
  return out;
}

std::string PathMetric::descriptor() const {
  return combine_ == Combine::L1 ? "l1" : "max";
}

}  // namespace atvkit
