#pragma once

#include <map>
#include <memory>
#include <optional>
#include <variant>

#include "remex/game.hpp"
#include "remex/removal.hpp"

namespace remex {

/// Prediction target for a loss: hard class index, regression value, or a
/// probability vector (soft cross entropy).
using Target = std::variant<int, double, Eigen::VectorXd>;

struct LossFn {
  enum class Kind { cross_entropy, mse };
  Kind kind = Kind::mse;

  /// ℓ(prediction, target). Cross entropy clips probabilities at 1e-12
  /// before logs; MSE on vectors is the squared Euclidean distance.
  double operator()(const Eigen::VectorXd& prediction, const Target& target) const;

  static LossFn cross_entropy() { return {Kind::cross_entropy}; }
  static LossFn mse() { return {Kind::mse}; }
};

struct LinkFn {
  enum class Kind { identity, log_odds };
  Kind kind = Kind::identity;

  double apply(double v) const;

  static LinkFn identity() { return {Kind::identity}; }
  static LinkFn log_odds() { return {Kind::log_odds}; }
};

/// u_x(S) = link(F(x_S)) for one input; multi-class outputs need an
/// explicit class index (no implicit argmax).
struct PredictionBehavior {
  Eigen::VectorXd x;
  std::optional<int> cls;
  LinkFn link = LinkFn::identity();
};

/// v_xy(S) = −ℓ(F(x_S), y).
struct PredictionLossBehavior {
  Eigen::VectorXd x;
  Target y;
  LossFn loss;
};

/// v_x(S) = −E_{q(Y)}[ℓ(F(x_S), Y)] for a label distribution q.
struct PredictionMeanLossBehavior {
  Eigen::VectorXd x;
  Eigen::VectorXd label_dist;
  LossFn loss;
};

/// v(S) = −E_{XY}[ℓ(F(X_S), Y)] over a dataset (weights make this exact
/// on enumerated joints).
struct DatasetLossBehavior {
  std::shared_ptr<const Dataset> data;
  LossFn loss;
};

/// w_x(S) = −ℓ(F(x_S), F(x)).
struct OutputLossBehavior {
  Eigen::VectorXd x;
  LossFn loss;
};

/// w(S) = −E_X[ℓ(F(X_S), F(X))].
struct DatasetOutputLossBehavior {
  std::shared_ptr<const Dataset> data;
  LossFn loss;
};

using BehaviorSpec =
    std::variant<PredictionBehavior, PredictionLossBehavior, PredictionMeanLossBehavior,
                 DatasetLossBehavior, OutputLossBehavior, DatasetOutputLossBehavior>;

/// Turn a subset function plus a behavior into a cooperative game.
/// Loss-based games carry the negative sign, so more informative subsets
/// score higher.
Game make_game(const SubsetFunction& f, const BehaviorSpec& spec);

/// v(S) for one mask: weighted mean of −ℓ over rows, compensated summation.
double dataset_loss_value(const SubsetFunction& f, const Dataset& data, LossFn loss, Mask s);

/// Max absolute violation of the set-function relationship identities,
/// enumerated over all 2^d subsets.
struct RelationReport {
  std::map<std::string, double> max_violation;
  double worst() const;
};

struct RelationshipInputs {
  Eigen::VectorXd x;
  std::optional<Target> y;                      // enables v_xy relation
  std::optional<Eigen::VectorXd> label_dist;    // enables v_x relation
  std::shared_ptr<const Dataset> data;          // enables v and w relations
  LossFn loss;
};

RelationReport relationship_check(const SubsetFunction& f, const RelationshipInputs& in);

/// w(S) = −E_X[(F(X_S) − F(X))²] for regression or single-probability
/// outputs; equals Var(E[f|X_S]) − Var(f) on exact extensions.
Game variance_explained_game(const SubsetFunction& f, const Dataset& data);

}  // namespace remex
