#include "remex/dataset.hpp"

#include <algorithm>
#include <map>

#include "remex/numeric.hpp"

namespace remex {

Eigen::VectorXd feature_means(const Dataset& data) {
  require(data.n() > 0, Errc::empty_dataset, "cannot average an empty dataset");
  Eigen::VectorXd out(data.d());
  const double total = data.total_weight();
  for (int j = 0; j < data.d(); ++j) {
    NeumaierSum s;
    for (int i = 0; i < data.n(); ++i) s.add(data.weight(i) * data.x(i, j));
    out[j] = s.total() / total;
  }
  return out;
}

ValueSupport feature_support(const Dataset& data, int j) {
  require(j >= 0 && j < data.d(), Errc::index_out_of_range, "feature index out of range");
  std::map<double, double> acc;
  for (int i = 0; i < data.n(); ++i) acc[data.x(i, j)] += data.weight(i);
  ValueSupport out;
  const double total = data.total_weight();
  for (const auto& [v, w] : acc) {
    out.values.push_back(v);
    out.weights.push_back(w / total);
  }
  return out;
}

std::pair<double, double> feature_range(const Dataset& data, int j) {
  require(data.n() > 0, Errc::empty_dataset, "empty dataset has no range");
  double lo = data.x(0, j), hi = data.x(0, j);
  for (int i = 1; i < data.n(); ++i) {
    lo = std::min(lo, data.x(i, j));
    hi = std::max(hi, data.x(i, j));
  }
  return {lo, hi};
}

}  // namespace remex
