#pragma once

#include "remex/mask_sampler.hpp"
#include "remex/summary.hpp"

namespace remex {

struct EstimatorConfig {
  std::uint64_t master_seed = 0;
  int batch_size = 64;
  /// Converged when (CI width / range of estimates) drops below this.
  double convergence_threshold = 0.025;
  std::uint64_t max_evaluations = 2'000'000;
  double confidence = 0.95;
  /// RISE inclusion probability.
  double rise_inclusion_p = 0.5;
  /// Worker threads per batch. Results are bit-identical to a serial run:
  /// per-sample seeds are counter-derived and the reduction order is fixed.
  int threads = 1;

  void validate() const {
    require(batch_size >= 1, Errc::config_error, "batch size must be >= 1");
    require(convergence_threshold > 0.0, Errc::config_error, "threshold must be > 0");
    require(confidence > 0.0 && confidence < 1.0, Errc::config_error,
            "confidence must be in (0,1)");
    require(rise_inclusion_p > 0.0 && rise_inclusion_p < 1.0, Errc::config_error,
            "inclusion probability must be in (0,1)");
    require(threads >= 1, Errc::config_error, "threads must be >= 1");
  }
};

struct EstimateResult {
  Eigen::VectorXd values;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd ci_half_widths;
  bool converged = false;
  std::uint64_t n_samples = 0;
  std::uint64_t n_game_evaluations = 0;
  std::string method;
  EstimatorConfig config;  // echoed for provenance
};

/// Permutation-sampling Shapley estimator: each permutation contributes one
/// marginal contribution per player (d+1 evaluations), telescoping to
/// u(D) − u(∅) exactly.
EstimateResult shapley_sampled(const Game& game, const EstimatorConfig& config);

/// Uniform-subset Banzhaf estimator; each draw S is shared across players
/// by flipping one bit at a time (d+1 evaluations per draw).
EstimateResult banzhaf_sampled(const Game& game, const EstimatorConfig& config);

/// RISE-style estimator: include each feature independently with
/// probability p and average u(S) over the subsets containing i.
EstimateResult mean_when_included_sampled(const Game& game, const EstimatorConfig& config);

/// KernelSHAP/LIME-style estimator: draw subsets with probability
/// proportional to π(S), fit the constrained least squares on the sample,
/// and bootstrap (B = 20 refits) for confidence intervals.
EstimateResult wls_sampled(const Game& game, const WeightingKernel& kernel,
                           const EstimatorConfig& config);

}  // namespace remex
