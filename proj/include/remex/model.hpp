#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "remex/dataset.hpp"
#include "remex/joint.hpp"

namespace remex {

/// A trained prediction function f: R^d -> R^out. Regression models have a
/// single output; classification models return a probability vector over
/// `classes` entries. Models are immutable and safe for concurrent use.
class PredictModel {
 public:
  virtual ~PredictModel() = default;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual bool classification() const = 0;
  virtual std::string kind() const = 0;
  virtual Eigen::VectorXd predict(const Eigen::VectorXd& x) const = 0;
};

using ModelPtr = std::shared_ptr<const PredictModel>;

/// w·x + b regression model.
class LinearModel final : public PredictModel {
 public:
  LinearModel(Eigen::VectorXd w, double b) : w_(std::move(w)), b_(b) {}

  int input_dim() const override { return static_cast<int>(w_.size()); }
  int output_dim() const override { return 1; }
  bool classification() const override { return false; }
  std::string kind() const override { return "linear"; }

  Eigen::VectorXd predict(const Eigen::VectorXd& x) const override {
    require(x.size() == w_.size(), Errc::dimension_mismatch, "linear model input dimension");
    Eigen::VectorXd out(1);
    out[0] = w_.dot(x) + b_;
    return out;
  }

  const Eigen::VectorXd& weights() const { return w_; }
  double intercept() const { return b_; }

 private:
  Eigen::VectorXd w_;
  double b_;
};

/// softmax(W x + b) classifier.
class LogisticModel final : public PredictModel {
 public:
  LogisticModel(Eigen::MatrixXd w, Eigen::VectorXd b) : w_(std::move(w)), b_(std::move(b)) {
    require(w_.rows() == b_.size(), Errc::dimension_mismatch, "logit rows != bias size");
  }

  int input_dim() const override { return static_cast<int>(w_.cols()); }
  int output_dim() const override { return static_cast<int>(w_.rows()); }
  bool classification() const override { return true; }
  std::string kind() const override { return "logistic"; }

  Eigen::VectorXd predict(const Eigen::VectorXd& x) const override;

  const Eigen::MatrixXd& weights() const { return w_; }
  const Eigen::VectorXd& bias() const { return b_; }

 private:
  Eigen::MatrixXd w_;
  Eigen::VectorXd b_;
};

/// Lookup model over enumerable integer-coded feature cells.
class TableModel final : public PredictModel {
 public:
  TableModel(std::vector<int> cards, Eigen::MatrixXd outputs, bool classifier);

  int input_dim() const override { return static_cast<int>(cards_.size()); }
  int output_dim() const override { return static_cast<int>(outputs_.cols()); }
  bool classification() const override { return classifier_; }
  std::string kind() const override { return "external-table"; }

  Eigen::VectorXd predict(const Eigen::VectorXd& x) const override;

  const std::vector<int>& cards() const { return cards_; }
  const Eigen::MatrixXd& outputs() const { return outputs_; }

 private:
  std::vector<int> cards_;
  Eigen::MatrixXd outputs_;  // n_cells × out
  bool classifier_;
};

/// Exact Bayes model read off a DiscreteJoint: p(Y | X = x) in
/// classification mode, E[Y | X = x] (class index as value) in regression
/// mode. Errors with ZeroProbabilityInput off the joint's support.
class BayesModel final : public PredictModel {
 public:
  BayesModel(DiscreteJoint joint, bool regression_mode = false)
      : joint_(std::move(joint)), regression_(regression_mode) {}

  int input_dim() const override { return joint_.d(); }
  int output_dim() const override { return regression_ ? 1 : joint_.classes(); }
  bool classification() const override { return !regression_; }
  std::string kind() const override { return "bayes-from-joint"; }

  Eigen::VectorXd predict(const Eigen::VectorXd& x) const override;

  const DiscreteJoint& joint() const { return joint_; }
  bool regression_mode() const { return regression_; }

 private:
  DiscreteJoint joint_;
  bool regression_;
};

/// Closed-form ridge regression: solve (X'ᵀX' + ridge·I) w = X'ᵀy with an
/// intercept column appended to X'. Deterministic. Errors with
/// SingularSystem when ridge = 0 and the normal matrix is rank-deficient.
ModelPtr train_linear(const Dataset& data, double ridge);

struct LogisticTrainConfig {
  double lr = 0.5;
  int epochs = 2000;
  double l2 = 0.0;
  std::uint64_t seed = 0;
};

/// Full-batch gradient descent on softmax cross entropy. Deterministic
/// given the config. Errors with NonFiniteLoss on divergence.
ModelPtr train_logistic(const Dataset& data, const LogisticTrainConfig& config);

/// Learning rate below which the full-batch logistic loss is provably
/// non-increasing: 2 / L with L = λ_max(XᵀX)/(2n) + l2 bounded via the
/// Frobenius norm.
double logistic_stable_lr(const Dataset& data, double l2);

/// Exact Bayes classifier p(Y | X = x) of a joint.
ModelPtr bayes_predictor(const DiscreteJoint& joint);

/// Exact conditional expectation E[Y | X = x] of a joint.
ModelPtr bayes_regressor(const DiscreteJoint& joint);

}  // namespace remex
