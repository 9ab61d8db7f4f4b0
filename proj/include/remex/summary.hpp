#pragma once

#include <functional>
#include <optional>
#include <string>

#include "remex/game.hpp"

namespace remex {

struct AttributionResult {
  Eigen::VectorXd values;
  std::optional<double> intercept;  // WLS only
  std::string method;
  std::uint64_t n_evaluations = 0;
  /// Set by normalize_attributions when any input value is negative;
  /// normalized shares of mixed-sign scores are hard to interpret.
  bool negative_input_warning = false;
};

struct SelectionResult {
  Mask subset;
  double objective = 0.0;
  bool tie_broken = false;
  std::string method;
  std::uint64_t n_evaluations = 0;
};

/// Subset weighting for the additive-model (WLS) summary. Weights are
/// functions of |S| for the named kernels. Infinite weights at the empty
/// or full set are realized as hard equality constraints, never as large
/// finite weights.
struct WeightingKernel {
  std::function<double(int size, int d)> weight_fn;
  bool infinite_at_empty = false;
  bool infinite_at_full = false;
  std::string name;

  double weight(int size, int d) const;

  /// π_Sh(S) = (d−1) / (C(d,|S|)·|S|·(d−|S|)), infinite at ∅ and D.
  static WeightingKernel shapley();
  /// π_B(S) = 1.
  static WeightingKernel banzhaf();
  /// 1(|S| ≤ 1).
  static WeightingKernel include_individual();
  /// 1(|S| ≥ d−1).
  static WeightingKernel remove_individual();
  static WeightingKernel custom(std::function<double(int, int)> fn, bool inf_empty,
                                bool inf_full, std::string name);
};

struct Regularizer {
  enum class Kind { none, l2, l1 };
  Kind kind = Kind::none;
  double lambda = 0.0;

  static Regularizer none() { return {Kind::none, 0.0}; }
  static Regularizer l2(double lambda) { return {Kind::l2, lambda}; }
  static Regularizer l1(double lambda) { return {Kind::l1, lambda}; }
};

/// a_i = u(D) − u(D∖{i}); d+1 evaluations.
AttributionResult remove_individual(const Game& game);

/// a_i = u({i}) − u(∅); d+1 evaluations.
AttributionResult include_individual(const Game& game);

/// Exact Shapley values by subset enumeration (d ≤ 24).
AttributionResult shapley_exact(const Game& game);

/// Exact Banzhaf values by subset enumeration (d ≤ 24).
AttributionResult banzhaf_exact(const Game& game);

/// a_i = mean of u(S) over subsets containing i, uniform over subsets.
AttributionResult mean_when_included_exact(const Game& game);

/// Fit b_0 + Σ_{i∈S} b_i to u(S) under π with optional regularization.
/// Infinite kernel weights become the constraints b_0 = u(∅) and
/// Σ b_i = u(D) − u(∅). L1 is solved by cyclic coordinate descent
/// (tolerance 1e-10 on coefficient change, at most 1e5 sweeps).
AttributionResult wls_fit(const Game& game, const WeightingKernel& kernel,
                          const Regularizer& reg = Regularizer::none());

/// w_i = a_i / Σ_j a_j. Errors with ZeroSum when the sum vanishes; flags
/// a warning when any input value is negative.
AttributionResult normalize_attributions(const AttributionResult& a);

/// argmin_S u(D∖S) + λ|S|.
SelectionResult select_low_value(const Game& game, double lambda);

/// argmin |S| subject to u(S) ≥ t; exhaustive.
SelectionResult select_min_size(const Game& game, double threshold);

/// Greedy variant: iteratively drop the member whose removal keeps u
/// highest while u stays ≥ t. Feasible but possibly suboptimal.
SelectionResult select_min_size_greedy(const Game& game, double threshold);

/// argmax u(S) subject to |S| = k.
SelectionResult select_fixed_size(const Game& game, int k);

/// argmax u(S) − λ|S|.
SelectionResult select_regularized(const Game& game, double lambda);

/// argmax u(S) − γ·u(D∖S) − λ|S|.
SelectionResult select_partition(const Game& game, double gamma, double lambda);

enum class ExcessForm {
  mp,      // argmin_S e(S̄, 1λ)
  invase,  // argmax_S e(S, 1λ)
  mm       // argmax_S e(S, 1λ/(1+γ)) − γ e(S̄, 1λ/(1+γ))
};

/// Selection restated through coalition excess under equal allocations.
/// Returns the same subset as the matching direct solver (objectives
/// differ by an additive constant).
SelectionResult selection_via_excess(const Game& game, ExcessForm form, double lambda,
                                     double gamma = 0.0);

}  // namespace remex
