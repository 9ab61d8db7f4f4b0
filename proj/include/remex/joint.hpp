#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "remex/dataset.hpp"
#include "remex/mask.hpp"
#include "remex/rng.hpp"

namespace remex {

/// Exact finite joint distribution p(X, Y) over categorical features and a
/// discrete response. Probabilities are stored in row-major (x_1 ... x_d, y)
/// order. Serves as the ground-truth oracle for conditional removal and the
/// information-theoretic identities.
class DiscreteJoint {
 public:
  DiscreteJoint() = default;
  DiscreteJoint(std::vector<int> cards, int classes, std::vector<double> probs);

  int d() const { return static_cast<int>(cards_.size()); }
  int classes() const { return classes_; }
  const std::vector<int>& cards() const { return cards_; }
  const std::vector<double>& probs() const { return probs_; }

  /// Number of feature cells (product of cardinalities).
  std::size_t n_cells() const;

  /// Flat feature-cell index for integer feature values.
  std::size_t cell_index(const std::vector<int>& xs) const;
  std::vector<int> cell_values(std::size_t index) const;

  double p_xy(const std::vector<int>& xs, int y) const;
  double p_x(const std::vector<int>& xs) const;

  /// Marginal p(Y).
  Eigen::VectorXd class_marginal() const;

  /// p(x_S): marginal probability of agreeing with x on the members of s.
  double subset_marginal(const Eigen::VectorXd& x, Mask s) const;

  /// p(Y | X_S = x_S). Errors with ZeroProbabilityInput when p(x_S) = 0.
  Eigen::VectorXd class_given_subset(const Eigen::VectorXd& x, Mask s) const;

  /// E_{q(X_{S̄} | X_S = x_S)}[ g(X) ] for a vector-valued g over full cells.
  Eigen::VectorXd conditional_expectation(
      const Eigen::VectorXd& x, Mask s,
      const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g) const;

  /// I(Y; X_S) in nats, computed directly from the table.
  double mutual_information(Mask s) const;

  /// H(Y) in nats.
  double entropy_y() const;

  /// Enumerate (x, y) cells with positive probability into a weighted
  /// classification dataset (weights = probabilities).
  Dataset to_dataset() const;

  /// Same rows but regression labels y (class index as a real value).
  Dataset to_regression_dataset() const;

  /// Feature cell as a real vector.
  Eigen::VectorXd cell_vector(std::size_t index) const;

  /// Integer feature values from a real vector; errors if entries are not
  /// integers inside the cardinality range.
  std::vector<int> coerce(const Eigen::VectorXd& x) const;

  void validate(double tol = 1e-12) const;

  /// Random joint with all probabilities ≥ min_prob after normalization.
  static DiscreteJoint random(std::vector<int> cards, int classes, Rng& rng,
                              double min_prob = 1e-3);

  /// Joint with mutually independent features: p(x, y) = Π_j m_j(x_j) · c(y).
  /// (Y independent of X as well; behaviors that only read X are unaffected.)
  static DiscreteJoint independent(const std::vector<Eigen::VectorXd>& feature_marginals,
                                   const Eigen::VectorXd& class_marginal);

 private:
  std::vector<int> cards_;
  int classes_ = 0;
  std::vector<double> probs_;
};

/// p(Y = x_1) = agreement, else mass splits evenly over the other classes;
/// X_1 is binary uniform and any extra features are independent uniform
/// binary noise. agreement = 1 gives the exact-copy joint.
DiscreteJoint noisy_copy_joint(double agreement, int extra_features = 1);

}  // namespace remex
