#pragma once

#include <map>
#include <optional>
#include <string>

#include "atvkit/metric.hpp"
#include "atvkit/process_law.hpp"

namespace atvkit {

// A nonnegative weight function on full paths: a constant, a tabulated
// function, or the metric-derived rule phi(x) = sqrt(alpha) * d(x, x0)^p.
class WeightFunction {
 public:
  static WeightFunction constant(double c);
  static WeightFunction from_table(SpacesPtr spaces, std::map<Path, double> table);
  static WeightFunction rule(double alpha, Path x0, double p, PathMetric metric);

  double operator()(const Path& x) const;
  std::string descriptor() const;

 private:
  WeightFunction() = default;

  std::optional<double> constant_;
  std::optional<std::map<Path, double>> table_;
  SpacesPtr spaces_;
  // rule form
  double alpha_ = 0.0;
  double exponent_ = 0.0;
  Path base_point_;
  std::optional<PathMetric> metric_;
};

}  // namespace atvkit
