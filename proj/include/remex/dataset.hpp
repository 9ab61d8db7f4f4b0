#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "remex/error.hpp"

namespace remex {

enum class FeatureType { continuous, categorical };

struct FeatureKind {
  FeatureType type = FeatureType::continuous;
  int cardinality = 0;  // categorical only

  static FeatureKind cont() { return {FeatureType::continuous, 0}; }
  static FeatureKind cat(int cardinality) { return {FeatureType::categorical, cardinality}; }
};

/// Tabular data. Categorical features are stored as small non-negative
/// integers inside the real-valued matrix. Optional per-row weights turn
/// empirical means into exact expectations when rows enumerate a finite
/// sample space.
struct Dataset {
  Eigen::MatrixXd x;            // n × d
  Eigen::VectorXd y_reg;        // size n when regression, else 0
  std::vector<int> y_class;     // size n when classification, else empty
  int classes = 0;              // 0 means regression
  std::vector<FeatureKind> kinds;
  Eigen::VectorXd weights;      // size n or 0 (uniform)
  std::vector<std::string> feature_names;

  int n() const { return static_cast<int>(x.rows()); }
  int d() const { return static_cast<int>(x.cols()); }
  bool classification() const { return classes > 0; }
  bool has_labels() const { return classification() ? !y_class.empty() : y_reg.size() > 0; }

  double weight(int row) const { return weights.size() > 0 ? weights[row] : 1.0; }

  double total_weight() const {
    if (weights.size() == 0) return static_cast<double>(n());
    return weights.sum();
  }

  void validate() const {
    if (classification()) {
      require(y_class.empty() || static_cast<int>(y_class.size()) == n(), Errc::dimension_mismatch,
              "class label count != row count");
      for (int y : y_class) {
        require(y >= 0 && y < classes, Errc::config_error,
                "class label " + std::to_string(y) + " outside [0, classes)");
      }
    } else {
      require(y_reg.size() == 0 || y_reg.size() == x.rows(), Errc::dimension_mismatch,
              "regression label count != row count");
    }
    require(kinds.empty() || static_cast<int>(kinds.size()) == d(), Errc::dimension_mismatch,
            "feature kind count != feature count");
    require(weights.size() == 0 || weights.size() == x.rows(), Errc::dimension_mismatch,
            "weight count != row count");
    for (int j = 0; j < d() && !kinds.empty(); ++j) {
      if (kinds[j].type != FeatureType::categorical) continue;
      for (int i = 0; i < n(); ++i) {
        const double v = x(i, j);
        require(v == std::floor(v) && v >= 0 && v < kinds[j].cardinality, Errc::config_error,
                "categorical entry out of range in column " + std::to_string(j + 1));
      }
    }
  }

  FeatureKind kind(int j) const {
    return kinds.empty() ? FeatureKind::cont() : kinds[j];
  }
};

/// Weight-averaged column means.
Eigen::VectorXd feature_means(const Dataset& data);

/// Distinct values of one column with normalized weights, ascending.
struct ValueSupport {
  std::vector<double> values;
  std::vector<double> weights;
};
ValueSupport feature_support(const Dataset& data, int j);

std::pair<double, double> feature_range(const Dataset& data, int j);

}  // namespace remex
