#include "remex/mask_sampler.hpp"

#include <numeric>
#include <vector>

#include "remex/numeric.hpp"

namespace remex {

Mask sample_mask_uniform_cardinality(int d, Rng& rng) {
  require(d >= 0 && d <= Mask::kMaxPlayers, Errc::dimension_too_large, "mask width");
  const int k = static_cast<int>(rng.index(static_cast<std::uint64_t>(d) + 1));
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), 0);
  Mask m = Mask::empty(d);
  // Partial Fisher-Yates: the first k slots become the sample.
  for (int j = 0; j < k; ++j) {
    const int pick = j + static_cast<int>(rng.index(static_cast<std::uint64_t>(d - j)));
    std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(pick)]);
    m = m.with(idx[static_cast<std::size_t>(j)]);
  }
  return m;
}

Mask MaskSampler::sample(int d, Rng& rng) const {
  switch (kind) {
    case Kind::uniform_cardinality:
      return sample_mask_uniform_cardinality(d, rng);
    case Kind::bernoulli: {
      Mask m = Mask::empty(d);
      for (int i = 0; i < d; ++i) {
        if (rng.unit() < p) m = m.with(i);
      }
      return m;
    }
    case Kind::uniform_subsets: {
      const std::uint64_t bits =
          d == 0 ? 0 : rng.index(std::uint64_t{1} << std::min(d, Mask::kMaxPlayers));
      return Mask(bits, d);
    }
  }
  fail(Errc::config_error, "unknown mask sampler kind");
}

double MaskSampler::prob(Mask m) const {
  const int d = m.dim();
  const int k = m.count();
  switch (kind) {
    case Kind::uniform_cardinality:
      return 1.0 / ((d + 1.0) * binomial(d, k));
    case Kind::bernoulli:
      return std::pow(p, k) * std::pow(1.0 - p, d - k);
    case Kind::uniform_subsets:
      return std::ldexp(1.0, -d);
  }
  fail(Errc::config_error, "unknown mask sampler kind");
}

}  // namespace remex
