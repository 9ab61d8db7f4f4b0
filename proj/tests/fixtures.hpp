#pragma once

#include <vector>

#include "remex/game.hpp"
#include "remex/joint.hpp"
#include "remex/rng.hpp"

namespace remex::test {

// G1: d=2 with u(∅)=0, u({1})=1, u({2})=2, u({1,2})=4.
inline Game g1() { return TabulatedGame(2, {0, 1, 2, 4}).as_game(); }

// G2: d=3 with u(S)=1 iff player 1 ∈ S and |S| ≥ 2.
inline Game g2() { return TabulatedGame(3, {0, 0, 0, 1, 0, 1, 0, 1}).as_game(); }

inline Game constant_game(int d, double c) {
  return Game{d, [c](Mask) { return c; }};
}

// Modular game u(S) = Σ_{i∈S} coef_i.
inline Game additive_game(const std::vector<double>& coefs) {
  const int d = static_cast<int>(coefs.size());
  auto cs = coefs;
  return Game{d, [cs](Mask s) {
                double total = 0.0;
                for (int i : s.members()) total += cs[static_cast<std::size_t>(i)];
                return total;
              }};
}

inline TabulatedGame random_game(int d, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> values(std::size_t{1} << d);
  for (double& v : values) v = rng.uniform(lo, hi);
  return TabulatedGame(d, std::move(values));
}

// Brute-force Shapley values straight from the permutation definition;
// independent of the production enumeration path.
inline Eigen::VectorXd shapley_by_permutations(const Game& game) {
  const int d = game.d;
  std::vector<int> perm(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) perm[static_cast<std::size_t>(i)] = i;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
  std::size_t count = 0;
  do {
    Mask s = Mask::empty(d);
    double prev = game.value(s);
    for (int i : perm) {
      s = s.with(i);
      const double cur = game.value(s);
      total[i] += cur - prev;
      prev = cur;
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total / static_cast<double>(count);
}

// Brute-force Banzhaf values from the subset definition.
inline Eigen::VectorXd banzhaf_by_subsets(const Game& game) {
  const int d = game.d;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < d; ++i) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const Mask& s : enumerate_subsets(d)) {
      if (s.contains(i)) continue;
      acc += game.value(s.with(i)) - game.value(s);
      ++count;
    }
    total[i] = acc / static_cast<double>(count);
  }
  return total;
}

}  // namespace remex::test
