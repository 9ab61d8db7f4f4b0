#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "remex/mask.hpp"

namespace remex {

/// Payoffs proposed to each player.
using Allocation = Eigen::VectorXd;

/// A cooperative game: a set function over subsets of d players.
/// Games are pure value objects; value() must be safe to call from
/// multiple threads without coordination.
struct Game {
  int d = 0;
  std::function<double(Mask)> fn;

  double value(Mask s) const {
    require(s.dim() == d, Errc::dimension_mismatch,
            "mask dimension " + std::to_string(s.dim()) + " != game dimension " + std::to_string(d));
    return fn(s);
  }
};

/// Dense cache of a game's 2^d values, indexed by the mask's bit pattern
/// interpreted as an unsigned integer. Immutable after construction.
class TabulatedGame {
 public:
  TabulatedGame(int d, std::vector<double> values)
      : d_(d), values_(std::make_shared<const std::vector<double>>(std::move(values))) {
    check_exhaustive_dim(d_);
    require(values_->size() == (std::size_t{1} << d_), Errc::dimension_mismatch,
            "tabulated game needs 2^d values");
  }

  int dim() const { return d_; }
  const std::vector<double>& values() const { return *values_; }
  double at(std::uint64_t index) const { return (*values_)[index]; }
  double value(Mask s) const { return (*values_)[s.bits()]; }

  Game as_game() const {
    auto v = values_;
    return Game{d_, [v](Mask s) { return (*v)[s.bits()]; }};
  }

 private:
  int d_;
  std::shared_ptr<const std::vector<double>> values_;
};

/// u(S ∪ {i}) − u(S). Requires i ∉ S.
double marginal_contribution(const Game& game, int player, Mask s);

/// e(S, z) = u(S) − Σ_{i∈S} z_i, the coalition's dissatisfaction under z.
double excess(const Game& game, Mask s, const Allocation& z);

/// Evaluate the game on every subset. Exactly 2^d evaluations.
TabulatedGame tabulate(const Game& game);

/// Game on d−1 players where players i and j of the original game act as
/// one atomic player (placed at min(i,j) after reindexing). Used by the
/// Banzhaf 2-efficiency checks.
Game merge_players(const Game& game, int i, int j);

/// Game on d+1 players where the player at `position` contributes nothing.
Game add_null_player(const Game& game, int position);

}  // namespace remex
