#include "remex/game.hpp"

#include "remex/numeric.hpp"

namespace remex {

double marginal_contribution(const Game& game, int player, Mask s) {
  require(player >= 0 && player < game.d, Errc::index_out_of_range,
          "player " + std::to_string(player) + " out of range for d=" + std::to_string(game.d));
  require(!s.contains(player), Errc::player_in_set,
          "player " + std::to_string(player + 1) + " already in " + s.to_string());
  return game.value(s.with(player)) - game.value(s);
}

double excess(const Game& game, Mask s, const Allocation& z) {
  require(static_cast<int>(z.size()) == game.d, Errc::dimension_mismatch,
          "allocation length " + std::to_string(z.size()) + " != d=" + std::to_string(game.d));
  NeumaierSum paid;
  for (int i : s.members()) paid.add(z[i]);
  return game.value(s) - paid.total();
}

TabulatedGame tabulate(const Game& game) {
  check_exhaustive_dim(game.d);
  const std::size_t n = std::size_t{1} << game.d;
  std::vector<double> values(n);
  for (std::size_t b = 0; b < n; ++b) {
    values[b] = game.value(Mask(b, game.d));
  }
  return TabulatedGame(game.d, std::move(values));
}

Game merge_players(const Game& game, int i, int j) {
  require(i != j, Errc::player_in_set, "merge needs two distinct players");
  require(i >= 0 && i < game.d && j >= 0 && j < game.d, Errc::index_out_of_range,
          "merge player out of range");
  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  const int d_new = game.d - 1;
  auto base = game;
  // New index k maps to old index k for k < hi, and k+1 otherwise; the
  // merged pair lives at new index lo.
  return Game{d_new, [base, lo, hi](Mask t) {
                Mask s = Mask::empty(base.d);
                for (int k : t.members()) {
                  const int old_k = (k < hi) ? k : k + 1;
                  s = s.with(old_k);
                  if (k == lo) s = s.with(hi);
                }
                return base.value(s);
              }};
}

Game add_null_player(const Game& game, int position) {
  require(position >= 0 && position <= game.d, Errc::index_out_of_range,
          "null-player position out of range");
  auto base = game;
  return Game{game.d + 1, [base, position](Mask s) {
                Mask inner = Mask::empty(base.d);
                for (int k : s.members()) {
                  if (k == position) continue;
                  inner = inner.with(k < position ? k : k - 1);
                }
                return base.value(inner);
              }};
}

}  // namespace remex
