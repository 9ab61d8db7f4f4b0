#pragma once

#include "remex/mask.hpp"
#include "remex/rng.hpp"

namespace remex {

/// Sample k in {0, ..., d} uniformly, then k indices without replacement.
/// P(|S| = k) = 1/(d+1); subsets of equal size are equiprobable.
Mask sample_mask_uniform_cardinality(int d, Rng& rng);

/// Distribution over subsets used to train masked models and drive some
/// estimators. Draws never depend on any data row.
struct MaskSampler {
  enum class Kind { uniform_cardinality, bernoulli, uniform_subsets };

  Kind kind = Kind::uniform_cardinality;
  double p = 0.5;  // bernoulli inclusion probability

  Mask sample(int d, Rng& rng) const;

  /// Exact pmf of a mask under this sampler.
  double prob(Mask m) const;

  static MaskSampler uniform_cardinality() { return {Kind::uniform_cardinality, 0.5}; }
  static MaskSampler bernoulli(double p) { return {Kind::bernoulli, p}; }
  static MaskSampler uniform_subsets() { return {Kind::uniform_subsets, 0.5}; }
};

}  // namespace remex
