#include "atvkit/weight.hpp"

#include <cmath>
#include <sstream>

namespace atvkit {

WeightFunction WeightFunction::constant(double c) {
  if (c < 0.0) throw InvalidParameter("constant weight must be nonnegative");
  WeightFunction w;
  w.constant_ = c;
  return w;
}

WeightFunction WeightFunction::from_table(SpacesPtr spaces,
                                          std::map<Path, double> table) {
  for (const auto& [path, value] : table) {
    if (value < 0.0) {
      throw InvalidParameter("weight table has a negative value at path '" +
                             path_to_string(*spaces, 0, path) + "'");
    }
  }
  WeightFunction w;
  w.spaces_ = std::move(spaces);
  w.table_ = std::move(table);
  return w;
}

WeightFunction WeightFunction::rule(double alpha, Path x0, double p,
                                    PathMetric metric) {
  if (alpha <= 0.0) throw InvalidParameter("rule weight needs alpha > 0");
  if (p < 1.0) throw InvalidParameter("rule weight needs exponent p >= 1");
  WeightFunction w;
  w.alpha_ = alpha;
  w.exponent_ = p;
  w.base_point_ = std::move(x0);
  w.metric_ = std::move(metric);
  return w;
}

double WeightFunction::operator()(const Path& x) const {
  if (constant_) return *constant_;
  if (table_) {
    auto it = table_->find(x);
    if (it == table_->end()) {
      throw InvalidParameter("weight table has no value at path '" +
                             path_to_string(*spaces_, 0, x) + "'");
    }
    return it->second;
  }
  double d = metric_->distance(x, base_point_);
  return std::sqrt(alpha_) * std::pow(d, exponent_);
}

std::string WeightFunction::descriptor() const {
  std::ostringstream out;
  if (constant_) {
    out << "const:" << *constant_;
  } else if (table_) {
    out << "table[" << table_->size() << "]";
  } else {
    // No commas: descriptors appear as single CSV fields.
    out << "rule:alpha=" << alpha_ << ";p=" << exponent_;
  }
  return out.str();
}

}  // namespace atvkit
