#include "remex/selftest.hpp"

#include <chrono>
#include <cmath>

#include "remex/behavior.hpp"
#include "remex/estimate.hpp"
#include "remex/model.hpp"
#include "remex/numeric.hpp"

namespace remex {

namespace {

TabulatedGame random_tab(int d, Rng& rng) {
  std::vector<double> values(std::size_t{1} << d);
  for (double& v : values) v = rng.uniform(-1.0, 1.0);
  return TabulatedGame(d, std::move(values));
}

double kernels_suite() {
  Rng rng(0x6b65726e);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + static_cast<int>(rng.index(9));  // 2..10
    const Game g = random_tab(d, rng).as_game();
    worst = std::max(worst, (wls_fit(g, WeightingKernel::shapley()).values -
                             shapley_exact(g).values)
                                .cwiseAbs()
                                .maxCoeff());
    worst = std::max(worst, (wls_fit(g, WeightingKernel::banzhaf()).values -
                             banzhaf_exact(g).values)
                                .cwiseAbs()
                                .maxCoeff());
    worst = std::max(worst, (wls_fit(g, WeightingKernel::include_individual()).values -
                             include_individual(g).values)
                                .cwiseAbs()
                                .maxCoeff());
    worst = std::max(worst, (wls_fit(g, WeightingKernel::remove_individual()).values -
                             remove_individual(g).values)
                                .cwiseAbs()
                                .maxCoeff());
  }
  return worst;
}

double axioms_suite() {
  Rng rng(0x6178696f);
  double worst = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 2 + static_cast<int>(rng.index(7));  // 2..8
    const Game g = random_tab(d, rng).as_game();
    // Efficiency.
    const auto phi = shapley_exact(g);
    worst = std::max(worst, std::abs(phi.values.sum() - (g.value(Mask::full(d)) -
                                                         g.value(Mask::empty(d)))));
    // Dummy padding.
    const int pos = static_cast<int>(rng.index(static_cast<std::uint64_t>(d) + 1));
    const Game padded = add_null_player(g, pos);
    const auto phi_p = shapley_exact(padded);
    const auto psi = banzhaf_exact(g);
    const auto psi_p = banzhaf_exact(padded);
    worst = std::max(worst, std::abs(phi_p.values[pos]));
    worst = std::max(worst, std::abs(psi_p.values[pos]));
    int k = 0;
    for (int i = 0; i <= d; ++i) {
      if (i == pos) continue;
      worst = std::max(worst, std::abs(phi_p.values[i] - phi.values[k]));
      worst = std::max(worst, std::abs(psi_p.values[i] - psi.values[k]));
      ++k;
    }
    // Additivity.
    const Game h = random_tab(d, rng).as_game();
    const Game sum{d, [g, h](Mask s) { return g.value(s) + h.value(s); }};
    worst = std::max(worst, (shapley_exact(sum).values - shapley_exact(g).values -
                             shapley_exact(h).values)
                                .cwiseAbs()
                                .maxCoeff());
    worst = std::max(worst, (banzhaf_exact(sum).values - banzhaf_exact(g).values -
                             banzhaf_exact(h).values)
                                .cwiseAbs()
                                .maxCoeff());
    // 2-efficiency.
    if (d >= 3) {
      const int i = static_cast<int>(rng.index(static_cast<std::uint64_t>(d)));
      int jj = static_cast<int>(rng.index(static_cast<std::uint64_t>(d)));
      while (jj == i) jj = static_cast<int>(rng.index(static_cast<std::uint64_t>(d)));
      const auto merged = banzhaf_exact(merge_players(g, i, jj));
      worst = std::max(worst, std::abs(merged.values[std::min(i, jj)] -
                                       (psi.values[i] + psi.values[jj])));
    }
  }
  // Symmetry on a constructed pair of interchangeable players.
  const Game sym{5, [](Mask s) {
                   const int pair = (s.contains(0) ? 1 : 0) + (s.contains(1) ? 1 : 0);
                   return 0.7 * pair + 0.2 * s.count() * s.count();
                 }};
  for (const auto& r : {shapley_exact(sym), banzhaf_exact(sym), mean_when_included_exact(sym)}) {
    worst = std::max(worst, std::abs(r.values[0] - r.values[1]));
  }
  return worst;
}

double consistency_suite() {
  Rng rng(0x636f6e73);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.index(3));  // 2..4
    std::vector<int> cards;
    for (int j = 0; j < d; ++j) cards.push_back(2 + static_cast<int>(rng.index(2)));  // 2..3
    const int classes = 2 + static_cast<int>(rng.index(2));                           // 2..3
    const auto joint = DiscreteJoint::random(cards, classes, rng, 1e-3);
    const std::size_t cells = joint.n_cells();
    const std::uint64_t n_subsets = std::uint64_t{1} << d;
    std::vector<double> px(cells);
    for (std::size_t c = 0; c < cells; ++c) px[c] = joint.p_x(joint.cell_values(c));
    for (const bool regression : {false, true}) {
      const ModelPtr model = regression ? bayes_regressor(joint) : bayes_predictor(joint);
      const auto f = extend_conditional_exact(model, joint);
      // F on every (cell, subset) pair, evaluated once.
      std::vector<std::vector<Eigen::VectorXd>> table(cells);
      for (std::size_t c = 0; c < cells; ++c) {
        const Eigen::VectorXd x = joint.cell_vector(c);
        table[c].reserve(n_subsets);
        for (std::uint64_t b = 0; b < n_subsets; ++b) table[c].push_back(f.eval(x, Mask(b, d)));
      }
      auto agree_off = [&](std::size_t a, std::size_t b, Mask on) {
        const auto va = joint.cell_values(a);
        const auto vb = joint.cell_values(b);
        for (int j : on.members()) {
          if (va[static_cast<std::size_t>(j)] != vb[static_cast<std::size_t>(j)]) return false;
        }
        return true;
      };
      for (const Mask& s : enumerate_subsets(d)) {
        for (const Mask& t : enumerate_subsets(d)) {
          if ((t.bits() & s.bits()) != t.bits() || t.bits() == 0) continue;
          const Mask rest(s.bits() ^ t.bits(), d);
          for (std::size_t c = 0; c < cells; ++c) {
            // Average F(·, S) over q(X_T | x_rest) using the cached table.
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(table[c][0].size());
            double z = 0.0;
            for (std::size_t c2 = 0; c2 < cells; ++c2) {
              if (px[c2] == 0.0 || !agree_off(c, c2, rest)) continue;
              acc += px[c2] * table[c2][s.bits()];
              z += px[c2];
            }
            acc /= z;
            worst = std::max(worst, (acc - table[c][rest.bits()]).cwiseAbs().maxCoeff());
          }
        }
      }
    }
  }
  return worst;
}

double information_suite() {
  double worst = 0.0;
  // Exact copy: information gain ln 2; noisy copy at 0.9: ln 2 − H_b(0.9).
  for (const double agreement : {1.0, 0.9}) {
    const auto joint = noisy_copy_joint(agreement, 1);
    const auto f = bayes_subset_predictor(joint);
    auto data = std::make_shared<const Dataset>(joint.to_dataset());
    const Game v = make_game(f, DatasetLossBehavior{data, LossFn::cross_entropy()});
    const double gain = v.value(Mask::single(0, 2)) - v.value(Mask::empty(2));
    const double hb = agreement == 1.0
                          ? 0.0
                          : -agreement * std::log(agreement) -
                                (1 - agreement) * std::log(1 - agreement);
    worst = std::max(worst, std::abs(gain - (std::log(2.0) - hb)));
  }
  // Random joints: v(S) − v(∅) == I(Y; X_S); pointwise-MI; KL identity.
  Rng rng(0x696e666f);
  for (int trial = 0; trial < 6; ++trial) {
    const auto joint = DiscreteJoint::random({2, 3}, 2, rng, 1e-3);
    const auto f = bayes_subset_predictor(joint);
    auto data = std::make_shared<const Dataset>(joint.to_dataset());
    const Game v = make_game(f, DatasetLossBehavior{data, LossFn::cross_entropy()});
    const double base = v.value(Mask::empty(2));
    const Eigen::VectorXd py = joint.class_marginal();
    for (const Mask& s : enumerate_subsets(2)) {
      worst = std::max(worst, std::abs(v.value(s) - base - joint.mutual_information(s)));
    }
    for (std::size_t c = 0; c < joint.n_cells(); ++c) {
      const Eigen::VectorXd x = joint.cell_vector(c);
      const Eigen::VectorXd cond = joint.class_given_subset(x, Mask::full(2));
      for (int y = 0; y < joint.classes(); ++y) {
        const Game vxy =
            make_game(f, PredictionLossBehavior{x, Target{y}, LossFn::cross_entropy()});
        const double b0 = vxy.value(Mask::empty(2));
        for (const Mask& s : enumerate_subsets(2)) {
          const double rhs = std::log(joint.class_given_subset(x, s)[y]) - std::log(py[y]);
          worst = std::max(worst, std::abs(vxy.value(s) - b0 - rhs));
        }
      }
      const Game vx = make_game(f, PredictionMeanLossBehavior{x, cond, LossFn::cross_entropy()});
      const double at_full = vx.value(Mask::full(2));
      for (const Mask& s : enumerate_subsets(2)) {
        const Eigen::VectorXd ps = joint.class_given_subset(x, s);
        double kl = 0.0;
        for (int y = 0; y < joint.classes(); ++y) {
          if (cond[y] > 0) kl += cond[y] * std::log(cond[y] / ps[y]);
        }
        worst = std::max(worst, std::abs(vx.value(s) - at_full + kl));
      }
    }
  }
  return worst;
}

}  // namespace

std::vector<std::string> selftest_suite_names() {
  return {"kernels", "axioms", "consistency", "information"};
}

std::vector<SuiteResult> run_selftest(const std::vector<std::string>& suites,
                                      double tolerance_scale) {
  require(!suites.empty(), Errc::config_error, "no selftest suites selected");
  std::vector<SuiteResult> out;
  for (const auto& name : suites) {
    SuiteResult r;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    if (name == "kernels") {
      r.tolerance = 1e-8 * tolerance_scale;
      r.max_error = kernels_suite();
    } else if (name == "axioms") {
      r.tolerance = 1e-10 * tolerance_scale;
      r.max_error = axioms_suite();
    } else if (name == "consistency") {
      r.tolerance = 1e-10 * tolerance_scale;
      r.max_error = consistency_suite();
    } else if (name == "information") {
      r.tolerance = 1e-6 * tolerance_scale;
      r.max_error = information_suite();
    } else {
      fail(Errc::config_error, "unknown selftest suite \"" + name + "\"");
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.passed = r.max_error <= r.tolerance;
    out.push_back(r);
  }
  return out;
}

}  // namespace remex
