#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "remex/summary.hpp"

using namespace remex;
using namespace remex::test;

TEST_CASE("remove and include individual") {
  const Game game = g1();
  const auto rem = remove_individual(game);
  CHECK(rem.values[0] == doctest::Approx(2.0));
  CHECK(rem.values[1] == doctest::Approx(3.0));
  CHECK(rem.n_evaluations == 3);
  const auto inc = include_individual(game);
  CHECK(inc.values[0] == doctest::Approx(1.0));
  CHECK(inc.values[1] == doctest::Approx(2.0));

  CHECK(remove_individual(constant_game(4, 2.0)).values.norm() == 0.0);
  CHECK(include_individual(constant_game(4, 2.0)).values.norm() == 0.0);

  const Game add = additive_game({0.5, -1.5, 3.0});
  const auto ra = remove_individual(add);
  const auto ia = include_individual(add);
  for (int i = 0; i < 3; ++i) {
    CHECK(ra.values[i] == doctest::Approx(ia.values[i]));
  }
  CHECK(ra.values[2] == doctest::Approx(3.0));
}

TEST_CASE("shapley exact") {
  const auto phi1 = shapley_exact(g1());
  CHECK(phi1.values[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(phi1.values[1] == doctest::Approx(2.5).epsilon(1e-12));

  const auto phi2 = shapley_exact(g2());
  CHECK(phi2.values[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(phi2.values[1] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(phi2.values[2] == doctest::Approx(1.0 / 6).epsilon(1e-12));

  const Game sym{4, [](Mask s) { return static_cast<double>(s.count()); }};
  const auto phi3 = shapley_exact(sym);
  for (int i = 0; i < 4; ++i) CHECK(phi3.values[i] == doctest::Approx(1.0).epsilon(1e-12));

  // Against the brute-force permutation oracle on random games.
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.index(5));
    const Game g = random_game(d, rng).as_game();
    const auto got = shapley_exact(g);
    const auto want = shapley_by_permutations(g);
    CHECK((got.values - want).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK_THROWS_AS(shapley_exact(Game{25, [](Mask) { return 0.0; }}), Error);
}

TEST_CASE("banzhaf exact") {
  const auto psi1 = banzhaf_exact(g1());
  CHECK(psi1.values[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(psi1.values[1] == doctest::Approx(2.5).epsilon(1e-12));

  const auto psi2 = banzhaf_exact(g2());
  CHECK(psi2.values[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(psi2.values[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(psi2.values[2] == doctest::Approx(0.25).epsilon(1e-12));

  CHECK(banzhaf_exact(constant_game(5, 7.0)).values.norm() == 0.0);

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.index(5));
    const Game g = random_game(d, rng).as_game();
    CHECK((banzhaf_exact(g).values - banzhaf_by_subsets(g)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("mean when included") {
  const auto a2 = mean_when_included_exact(g2());
  CHECK(a2.values[0] == doctest::Approx(0.75));
  CHECK(a2.values[1] == doctest::Approx(0.5));
  CHECK(a2.values[2] == doctest::Approx(0.5));

  const auto a1 = mean_when_included_exact(g1());
  CHECK(a1.values[0] == doctest::Approx(2.5));
  CHECK(a1.values[1] == doctest::Approx(3.0));

  const auto ac = mean_when_included_exact(constant_game(3, -1.25));
  for (int i = 0; i < 3; ++i) CHECK(ac.values[i] == doctest::Approx(-1.25));

  // Relation to Banzhaf: MWI_i − mean over subsets excluding i == ψ_i.
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng.index(5));
    const Game g = random_game(d, rng).as_game();
    const auto mwi = mean_when_included_exact(g);
    const auto psi = banzhaf_exact(g);
    for (int i = 0; i < d; ++i) {
      double excluded = 0.0;
      int count = 0;
      for (const Mask& s : enumerate_subsets(d)) {
        if (!s.contains(i)) {
          excluded += g.value(s);
          ++count;
        }
      }
      excluded /= count;
      CHECK(mwi.values[i] - excluded == doctest::Approx(psi.values[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("wls closed forms on G1") {
  SUBCASE("banzhaf kernel") {
    const auto fit = wls_fit(g1(), WeightingKernel::banzhaf());
    CHECK(fit.values[0] == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(fit.values[1] == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(*fit.intercept == doctest::Approx(-0.25).epsilon(1e-10));
  }
  SUBCASE("shapley kernel") {
    const auto fit = wls_fit(g1(), WeightingKernel::shapley());
    CHECK(fit.values[0] == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(fit.values[1] == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(*fit.intercept == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("include-individual kernel") {
    const auto fit = wls_fit(g1(), WeightingKernel::include_individual());
    CHECK(*fit.intercept == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(fit.values[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.values[1] == doctest::Approx(2.0).epsilon(1e-10));
  }
}

TEST_CASE("wls kernel theorems on random games") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 2 + static_cast<int>(rng.index(7));
    const Game g = random_game(d, rng).as_game();
    CHECK((wls_fit(g, WeightingKernel::shapley()).values - shapley_exact(g).values)
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
    CHECK((wls_fit(g, WeightingKernel::banzhaf()).values - banzhaf_exact(g).values)
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
    CHECK((wls_fit(g, WeightingKernel::include_individual()).values -
           include_individual(g).values)
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
    CHECK((wls_fit(g, WeightingKernel::remove_individual()).values -
           remove_individual(g).values)
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
  }
}

TEST_CASE("wls regularization paths") {
  Rng rng(13);
  const Game g = random_game(5, rng).as_game();
  SUBCASE("l2 shrinks coefficients") {
    const auto base = wls_fit(g, WeightingKernel::banzhaf());
    const auto reg = wls_fit(g, WeightingKernel::banzhaf(), Regularizer::l2(10.0));
    CHECK(reg.values.norm() < base.values.norm());
  }
  SUBCASE("l1 with zero penalty matches unregularized") {
    const auto base = wls_fit(g, WeightingKernel::banzhaf());
    const auto l1 = wls_fit(g, WeightingKernel::banzhaf(), Regularizer::l1(0.0));
    CHECK((base.values - l1.values).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(*base.intercept == doctest::Approx(*l1.intercept).epsilon(1e-8));
  }
  SUBCASE("large l1 penalty zeroes every coefficient") {
    const auto l1 = wls_fit(g, WeightingKernel::banzhaf(), Regularizer::l1(1e4));
    CHECK(l1.values.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("l1 with the full-set constraint is rejected") {
    CHECK_THROWS_AS(wls_fit(g, WeightingKernel::shapley(), Regularizer::l1(0.1)), Error);
  }
}

TEST_CASE("shapley axioms") {
  Rng rng(17);
  SUBCASE("efficiency") {
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 2 + static_cast<int>(rng.index(7));
      const Game g = random_game(d, rng).as_game();
      const auto phi = shapley_exact(g);
      const double total = phi.values.sum();
      const double expected = g.value(Mask::full(d)) - g.value(Mask::empty(d));
      CHECK(std::abs(total - expected) <= 1e-10);
      const auto kfit = wls_fit(g, WeightingKernel::shapley());
      CHECK(std::abs(kfit.values.sum() - expected) <= 1e-10);
    }
  }
  SUBCASE("symmetry for interchangeable players") {
    // Symmetric game in players 0 and 1: u depends on |S ∩ {0,1}|.
    const Game g{4, [](Mask s) {
                   const int pair = (s.contains(0) ? 1 : 0) + (s.contains(1) ? 1 : 0);
                   return pair * 1.25 + (s.contains(2) ? 0.5 : 0.0) * (s.contains(3) ? 2.0 : 1.0);
                 }};
    for (const auto& result :
         {shapley_exact(g), banzhaf_exact(g), mean_when_included_exact(g),
          include_individual(g), remove_individual(g)}) {
      CHECK(std::abs(result.values[0] - result.values[1]) <= 1e-10);
    }
  }
  SUBCASE("dummy player gets zero and leaves others unchanged") {
    Rng rng2(19);
    for (int trial = 0; trial < 10; ++trial) {
      const int d = 2 + static_cast<int>(rng2.index(4));
      const Game g = random_game(d, rng2).as_game();
      const int pos = static_cast<int>(rng2.index(static_cast<std::uint64_t>(d) + 1));
      const Game padded = add_null_player(g, pos);
      const auto base_sh = shapley_exact(g);
      const auto pad_sh = shapley_exact(padded);
      CHECK(std::abs(pad_sh.values[pos]) <= 1e-10);
      const auto base_bz = banzhaf_exact(g);
      const auto pad_bz = banzhaf_exact(padded);
      CHECK(std::abs(pad_bz.values[pos]) <= 1e-10);
      const auto base_inc = include_individual(g);
      const auto pad_inc = include_individual(padded);
      const auto base_rem = remove_individual(g);
      const auto pad_rem = remove_individual(padded);
      int k = 0;
      for (int i = 0; i <= d; ++i) {
        if (i == pos) continue;
        CHECK(std::abs(pad_sh.values[i] - base_sh.values[k]) <= 1e-10);
        CHECK(std::abs(pad_bz.values[i] - base_bz.values[k]) <= 1e-10);
        CHECK(std::abs(pad_inc.values[i] - base_inc.values[k]) <= 1e-10);
        CHECK(std::abs(pad_rem.values[i] - base_rem.values[k]) <= 1e-10);
        ++k;
      }
    }
  }
  SUBCASE("additivity") {
    Rng rng2(23);
    for (int trial = 0; trial < 10; ++trial) {
      const int d = 2 + static_cast<int>(rng2.index(5));
      const Game a = random_game(d, rng2).as_game();
      const Game b = random_game(d, rng2).as_game();
      const Game sum{d, [a, b](Mask s) { return a.value(s) + b.value(s); }};
      CHECK((shapley_exact(sum).values - shapley_exact(a).values - shapley_exact(b).values)
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
      CHECK((banzhaf_exact(sum).values - banzhaf_exact(a).values - banzhaf_exact(b).values)
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
      CHECK((include_individual(sum).values - include_individual(a).values -
             include_individual(b).values)
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
      CHECK((remove_individual(sum).values - remove_individual(a).values -
             remove_individual(b).values)
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
      // Unregularized WLS is linear in the game values.
      CHECK((wls_fit(sum, WeightingKernel::banzhaf()).values -
             wls_fit(a, WeightingKernel::banzhaf()).values -
             wls_fit(b, WeightingKernel::banzhaf()).values)
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
    }
  }
  SUBCASE("banzhaf 2-efficiency") {
    Rng rng2(29);
    for (int trial = 0; trial < 10; ++trial) {
      const int d = 3 + static_cast<int>(rng2.index(6));  // up to 8
      const Game g = random_game(d, rng2).as_game();
      const int i = static_cast<int>(rng2.index(static_cast<std::uint64_t>(d)));
      int j = static_cast<int>(rng2.index(static_cast<std::uint64_t>(d)));
      while (j == i) j = static_cast<int>(rng2.index(static_cast<std::uint64_t>(d)));
      const Game merged = merge_players(g, i, j);
      const auto psi = banzhaf_exact(g);
      const auto psi_m = banzhaf_exact(merged);
      const int merged_pos = std::min(i, j) < std::max(i, j) ? std::min(i, j) : 0;
      CHECK(std::abs(psi_m.values[merged_pos] - (psi.values[i] + psi.values[j])) <= 1e-10);
    }
  }
}

TEST_CASE("normalize attributions") {
  AttributionResult a;
  a.values.resize(2);
  a.values << 2, 3;
  a.method = "include-individual";
  const auto n = normalize_attributions(a);
  CHECK(n.values[0] == doctest::Approx(0.4));
  CHECK(n.values[1] == doctest::Approx(0.6));
  CHECK_FALSE(n.negative_input_warning);

  AttributionResult one;
  one.values.resize(1);
  one.values << 1;
  CHECK(normalize_attributions(one).values[0] == doctest::Approx(1.0));

  AttributionResult zero;
  zero.values.resize(2);
  zero.values << 1, -1;
  CHECK_THROWS_AS(normalize_attributions(zero), Error);

  AttributionResult mixed;
  mixed.values.resize(2);
  mixed.values << 3, -1;
  CHECK(normalize_attributions(mixed).negative_input_warning);
}

TEST_CASE("selection solvers on G2") {
  const Game game = g2();
  SUBCASE("low value") {
    const auto r = select_low_value(game, 0.25);
    CHECK(r.subset == Mask::single(0, 3));
    CHECK(r.objective == doctest::Approx(0.25));
    const auto all = select_low_value(game, 10.0);
    CHECK(all.subset.none());
    const auto c = select_low_value(constant_game(3, 5.0), 0.5);
    CHECK(c.subset.none());
  }
  SUBCASE("min size") {
    const auto r = select_min_size(game, 1.0);
    CHECK(r.subset == Mask(0b011, 3));  // {1,2}; tie with {1,3} broken lexicographically
    CHECK(r.objective == doctest::Approx(2.0));
    CHECK(r.tie_broken);
    const auto empty = select_min_size(game, -1.0);
    CHECK(empty.subset.none());
    CHECK_THROWS_AS(select_min_size(game, 2.0), Error);
  }
  SUBCASE("min size greedy") {
    const auto r = select_min_size_greedy(game, 1.0);
    CHECK(game.value(r.subset) >= 1.0);
    CHECK(r.subset.count() <= 3);
    CHECK_THROWS_AS(select_min_size_greedy(game, 2.0), Error);
    // Monotone additive game: greedy is optimal.
    const Game add = additive_game({1.0, 2.0, 3.0});
    const auto greedy = select_min_size_greedy(add, 4.0);
    const auto exact = select_min_size(add, 4.0);
    CHECK(greedy.subset.count() == exact.subset.count());
  }
  SUBCASE("fixed size") {
    const auto r = select_fixed_size(game, 2);
    CHECK(r.subset == Mask(0b011, 3));
    CHECK(select_fixed_size(game, 0).subset.none());
    CHECK(select_fixed_size(game, 3).subset.all());
  }
  SUBCASE("regularized") {
    const auto r = select_regularized(game, 0.25);
    CHECK(r.subset == Mask(0b011, 3));
    CHECK(r.objective == doctest::Approx(0.5));
    CHECK(r.tie_broken);
    const auto big = select_regularized(constant_game(3, 1.0), 100.0);
    CHECK(big.subset.none());
  }
  SUBCASE("partition") {
    const auto r = select_partition(game, 1.0, 0.0);
    CHECK(r.subset == Mask(0b011, 3));
    CHECK(r.objective == doctest::Approx(1.0));
    CHECK(r.tie_broken);
    // γ=0 reduces to select_regularized.
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
      const Game g = random_game(5, rng).as_game();
      const double lambda = rng.uniform(0, 0.4);
      const auto a = select_partition(g, 0.0, lambda);
      const auto b = select_regularized(g, lambda);
      CHECK(a.subset == b.subset);
    }
    const auto c = select_partition(constant_game(3, 2.0), 0.5, 0.1);
    CHECK(c.subset.none());
  }
}

TEST_CASE("selection via excess matches direct solvers") {
  SUBCASE("G2 examples") {
    const Game game = g2();
    CHECK(selection_via_excess(game, ExcessForm::mp, 0.25).subset == Mask::single(0, 3));
    CHECK(selection_via_excess(game, ExcessForm::invase, 0.25).subset == Mask(0b011, 3));
    CHECK(selection_via_excess(game, ExcessForm::mm, 0.0, 1.0).subset == Mask(0b011, 3));
  }
  SUBCASE("random games") {
    Rng rng(37);
    for (int trial = 0; trial < 60; ++trial) {
      const int d = 2 + static_cast<int>(rng.index(9));
      const Game g = random_game(d, rng).as_game();
      const double lambda = rng.uniform(0, 0.5);
      const double gamma = rng.uniform(0, 2.0);
      const auto mp_direct = select_low_value(g, lambda);
      const auto mp_excess = selection_via_excess(g, ExcessForm::mp, lambda);
      CHECK(mp_direct.subset == mp_excess.subset);
      const auto inv_direct = select_regularized(g, lambda);
      const auto inv_excess = selection_via_excess(g, ExcessForm::invase, lambda);
      CHECK(inv_direct.subset == inv_excess.subset);
      const auto mm_direct = select_partition(g, gamma, lambda);
      const auto mm_excess = selection_via_excess(g, ExcessForm::mm, lambda, gamma);
      CHECK(mm_direct.subset == mm_excess.subset);
    }
  }
}

TEST_CASE("selection axioms") {
  Rng rng(41);
  SUBCASE("dummy player is never selected") {
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 2 + static_cast<int>(rng.index(4));
      const Game g = random_game(d, rng).as_game();
      const int pos = static_cast<int>(rng.index(static_cast<std::uint64_t>(d) + 1));
      const Game padded = add_null_player(g, pos);
      const double lambda = rng.uniform(0.01, 0.5);
      CHECK_FALSE(select_regularized(padded, lambda).subset.contains(pos));
      CHECK_FALSE(select_low_value(padded, lambda).subset.contains(pos));
      CHECK_FALSE(select_partition(padded, rng.uniform(0, 1), lambda).subset.contains(pos));
    }
  }
  SUBCASE("constant shift leaves select_fixed_size unchanged") {
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 3 + static_cast<int>(rng.index(4));
      const Game g = random_game(d, rng).as_game();
      const double c = rng.uniform(-5, 5);
      const Game shifted{d, [g, c](Mask s) { return g.value(s) + c; }};
      const int k = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(d)));
      CHECK(select_fixed_size(g, k).subset == select_fixed_size(shifted, k).subset);
    }
  }
}
