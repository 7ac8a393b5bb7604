#pragma once

#include <string>
#include <vector>

#include "atvkit/process_law.hpp"

namespace atvkit {

// A metric on full paths assembled from per-coordinate ground metrics.
// Default combination is the l1 sum of the coordinate distances; the max
// combination is accepted as an alternative.
class PathMetric {
 public:
  enum class Combine { L1, Max };

  // Ground metrics d_t(a,b) = |value_a - value_b|; every atom must carry a
  // numeric value.
  static PathMetric from_values(SpacesPtr spaces, Combine combine = Combine::L1);
  // Tabulated ground metrics, one square matrix (row-major) per coordinate.
  // Metric axioms are checked on load.
  static PathMetric from_tables(SpacesPtr spaces,
                                std::vector<std::vector<double>> tables,
                                Combine combine = Combine::L1);

  double coord_distance(int t, int a, int b) const;
  // Distance between two equal-length paths starting at coordinate 1.
  double distance(const Path& x, const Path& y) const;

  Combine combine() const { return combine_; }
  // True when distance() decomposes as a sum of per-stage terms.
  bool separable_l1() const { return combine_ == Combine::L1; }
  const SpacesPtr& spaces() const { return spaces_; }
  std::string descriptor() const;

 private:
  PathMetric(SpacesPtr spaces, std::vector<std::vector<double>> tables,
             Combine combine);

  SpacesPtr spaces_;
  std::vector<std::vector<double>> tables_;  // per t, row-major n_t x n_t
  Combine combine_;
};

}  // namespace atvkit
