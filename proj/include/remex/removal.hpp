#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "remex/mlp.hpp"
#include "remex/model.hpp"

namespace remex {

/// A prediction-with-missing-features interface F(x, S). The output must
/// depend only on the coordinates of x selected by S (invariance); most
/// constructors below additionally agree with their base model at the full
/// mask (subset extension). Instances are immutable and callable
/// concurrently.
struct SubsetFunction {
  int d = 0;
  int output_dim = 1;
  /// ReplacementCategorical sets this false: its output depends on held-out
  /// coordinates through the replacement distributions, so it is not a
  /// subset function in the strict sense and is excluded from invariance
  /// audits.
  bool invariant = true;
  std::string name;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, Mask)> fn;

  Eigen::VectorXd eval(const Eigen::VectorXd& x, Mask s) const {
    require(static_cast<int>(x.size()) == d, Errc::dimension_mismatch,
            "input length != subset function dimension");
    require(s.dim() == d, Errc::dimension_mismatch, "mask dimension mismatch");
    return fn(x, s);
  }
};

/// F(x_S) = f(x_S, r_{S̄}): held-out features take values from r.
SubsetFunction extend_default(const ModelPtr& model, const Eigen::VectorXd& reference);

/// Zeros special case of extend_default.
SubsetFunction extend_zeros(const ModelPtr& model, int d);

enum class McStrategy {
  marginal_joint,         // rows of the background, jointly
  product_of_marginals,   // independent per-feature empirical marginals
  uniform,                // uniform over [min,max] / {0..card-1} per feature
  replacement_categorical // LIME-tabular p(X_i | X_i != x_i), categorical only
};

struct McOptions {
  int n_samples = 512;
  /// Enumerate the strategy's support instead of sampling. Requires a
  /// finite support no larger than support_cap.
  bool exact = false;
  std::size_t support_cap = 1u << 20;
  std::uint64_t seed = 0;
};

/// Monte Carlo marginalization strategies. The per-call RNG stream is
/// seeded from (seed, s, x_S) only, so invariance to held-out coordinates
/// holds exactly, not just in expectation.
SubsetFunction extend_monte_carlo(const ModelPtr& model, McStrategy strategy,
                                  const Dataset& background, const McOptions& options);

enum class MatchFallback { error, marginal };

/// Average the model over background rows that agree with x on S exactly.
/// With MatchFallback::error (default), unseen x_S raises NoMatchingRows;
/// the marginal fallback averages over all rows instead.
SubsetFunction extend_conditional_empirical(const ModelPtr& model, const Dataset& background,
                                            MatchFallback fallback = MatchFallback::error);

/// F(x_S) = E_{q(X_{S̄} | X_S = x_S)}[ f(x_S, X_{S̄}) ], exactly, from a
/// finite joint. The unique subset extension consistent with q.
SubsetFunction extend_conditional_exact(const ModelPtr& model, const DiscreteJoint& joint);

/// Exact p(Y | X_S = x_S) read off the joint.
SubsetFunction bayes_subset_predictor(const DiscreteJoint& joint);

/// Exact E[Y | X_S = x_S] (class index as value) read off the joint.
SubsetFunction bayes_subset_regressor(const DiscreteJoint& joint);

struct SeparateModelsTrainer {
  enum class Kind { linear, logistic };
  Kind kind = Kind::linear;
  double ridge = 0.0;
  LogisticTrainConfig logistic;
};

/// Train one model per feature subset (d <= 12) and dispatch to f_S(x_S).
/// The cache is built eagerly; evaluation never trains.
SubsetFunction extend_separate_models(const SeparateModelsTrainer& trainer, const Dataset& data);

/// F(x_S) = g(x ⊙ m(S), m(S)) for a trained masked predictor.
SubsetFunction wrap_masked(const MaskedPtr& predictor);

}  // namespace remex
