#include <cmath>
#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "remex/estimate.hpp"

using namespace remex;
using namespace remex::test;

TEST_CASE("sample_mask_uniform_cardinality distribution") {
  SUBCASE("d=0 always empty") {
    Rng rng(1);
    for (int t = 0; t < 10; ++t) CHECK(sample_mask_uniform_cardinality(0, rng).none());
  }
  SUBCASE("d=1 is a fair coin") {
    Rng rng(2);
    int ones = 0;
    const int n = 100000;
    for (int t = 0; t < n; ++t) {
      if (sample_mask_uniform_cardinality(1, rng).count() == 1) ++ones;
    }
    CHECK(std::abs(ones / static_cast<double>(n) - 0.5) < 0.01);
  }
  SUBCASE("d=2 chi-square against the exact pmf") {
    Rng rng(3);
    const int n = 100000;
    std::map<std::uint64_t, int> counts;
    for (int t = 0; t < n; ++t) ++counts[sample_mask_uniform_cardinality(2, rng).bits()];
    // P(∅)=P(D)=1/3, P({1})=P({2})=1/6.
    const std::map<std::uint64_t, double> expected{
        {0, n / 3.0}, {1, n / 6.0}, {2, n / 6.0}, {3, n / 3.0}};
    double chi2 = 0.0;
    for (const auto& [bits, e] : expected) {
      const double diff = counts[bits] - e;
      chi2 += diff * diff / e;
    }
    CHECK(chi2 < 16.27);  // 3 dof at 0.001
  }
}

TEST_CASE("mask sampler pmf matches empirical frequencies") {
  Rng rng(5);
  for (const auto sampler : {MaskSampler::uniform_cardinality(), MaskSampler::bernoulli(0.3),
                             MaskSampler::uniform_subsets()}) {
    const int d = 3;
    const int n = 200000;
    std::map<std::uint64_t, int> counts;
    for (int t = 0; t < n; ++t) ++counts[sampler.sample(d, rng).bits()];
    for (const Mask& m : enumerate_subsets(d)) {
      const double p = sampler.prob(m);
      const double freq = counts[m.bits()] / static_cast<double>(n);
      CHECK(std::abs(freq - p) < 5 * std::sqrt(p * (1 - p) / n) + 1e-4);
    }
  }
}

TEST_CASE("shapley sampled") {
  SUBCASE("G1 converges inside its own CI") {
    const auto r = shapley_sampled(g1(), {.master_seed = 1, .max_evaluations = 400000});
    CHECK(r.converged);
    CHECK(std::abs(r.values[0] - 1.5) <= std::max(r.ci_half_widths[0], 1e-9) + 1e-9);
    CHECK(std::abs(r.values[1] - 2.5) <= std::max(r.ci_half_widths[1], 1e-9) + 1e-9);
  }
  SUBCASE("constant game converges immediately to zeros") {
    const auto r = shapley_sampled(constant_game(4, 3.0), {.master_seed = 2});
    CHECK(r.converged);
    CHECK(r.n_samples == 64);  // one batch
    CHECK(r.values.norm() == 0.0);
  }
  SUBCASE("determinism: identical config twice") {
    const EstimatorConfig cfg{.master_seed = 7, .max_evaluations = 20000};
    Rng rng(11);
    const Game g = random_game(6, rng).as_game();
    const auto a = shapley_sampled(g, cfg);
    const auto b = shapley_sampled(g, cfg);
    CHECK(a.values == b.values);
    CHECK(a.std_errors == b.std_errors);
    CHECK(a.n_samples == b.n_samples);
  }
  SUBCASE("serial equals parallel bit for bit") {
    Rng rng(13);
    const Game g = random_game(6, rng).as_game();
    EstimatorConfig serial{.master_seed = 3, .max_evaluations = 50000, .threads = 1};
    EstimatorConfig parallel = serial;
    parallel.threads = 4;
    const auto a = shapley_sampled(g, serial);
    const auto b = shapley_sampled(g, parallel);
    CHECK(a.values == b.values);
    CHECK(a.ci_half_widths == b.ci_half_widths);
  }
  SUBCASE("per-permutation efficiency telescopes") {
    Rng rng(17);
    const Game g = random_game(5, rng).as_game();
    // One permutation = batch of 1 with the budget for exactly one sample.
    const auto r =
        shapley_sampled(g, {.master_seed = 5, .batch_size = 1, .max_evaluations = 6});
    const double expected = g.value(Mask::full(5)) - g.value(Mask::empty(5));
    CHECK(r.n_samples == 1);
    CHECK(std::abs(r.values.sum() - expected) <= 1e-12 * 6);
  }
  SUBCASE("budget exhaustion flags non-convergence") {
    Rng rng(19);
    const Game g = random_game(6, rng).as_game();
    const auto r = shapley_sampled(g, {.master_seed = 1, .max_evaluations = 70});
    CHECK_FALSE(r.converged);
    CHECK(r.n_game_evaluations <= 70);
  }
}

TEST_CASE("banzhaf sampled") {
  SUBCASE("G1 converges to the Banzhaf values") {
    const auto r = banzhaf_sampled(g1(), {.master_seed = 1, .max_evaluations = 400000});
    CHECK(r.converged);
    CHECK(std::abs(r.values[0] - 1.5) <= 4 * r.ci_half_widths[0] + 1e-9);
    CHECK(std::abs(r.values[1] - 2.5) <= 4 * r.ci_half_widths[1] + 1e-9);
  }
  SUBCASE("constant game gives zeros") {
    const auto r = banzhaf_sampled(constant_game(3, -2.0), {.master_seed = 4});
    CHECK(r.converged);
    CHECK(r.values.norm() == 0.0);
  }
}

TEST_CASE("mean when included sampled") {
  SUBCASE("G2 converges to the exact uniform means at p=0.5") {
    const auto r =
        mean_when_included_sampled(g2(), {.master_seed = 1, .max_evaluations = 500000});
    const Eigen::Vector3d expected(0.75, 0.5, 0.5);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(r.values[i] - expected[i]) <= 4 * r.ci_half_widths[i] + 1e-9);
    }
  }
  SUBCASE("constant game") {
    const auto r = mean_when_included_sampled(constant_game(3, 1.5), {.master_seed = 2});
    CHECK(r.converged);
    for (int i = 0; i < 3; ++i) CHECK(r.values[i] == doctest::Approx(1.5));
  }
  SUBCASE("p != 0.5 targets the reweighted mean") {
    Rng rng(23);
    const Game g = random_game(4, rng).as_game();
    const double p = 0.3;
    const auto r = mean_when_included_sampled(
        g, {.master_seed = 3, .max_evaluations = 2000000, .rise_inclusion_p = p});
    // Exact weighted target: E[u(S) | i ∈ S] under Bernoulli(p) inclusion.
    for (int i = 0; i < 4; ++i) {
      double num = 0.0, den = 0.0;
      for (const Mask& s : enumerate_subsets(4)) {
        if (!s.contains(i)) continue;
        const double w = std::pow(p, s.count()) * std::pow(1 - p, 4 - s.count());
        num += w * g.value(s);
        den += w;
      }
      CHECK(std::abs(r.values[i] - num / den) <= 5 * r.ci_half_widths[i] + 1e-6);
    }
  }
}

TEST_CASE("wls sampled") {
  SUBCASE("shapley kernel converges to the exact values on G1") {
    const auto r = wls_sampled(g1(), WeightingKernel::shapley(),
                               {.master_seed = 1, .max_evaluations = 100000});
    CHECK(r.converged);
    CHECK(std::abs(r.values[0] - 1.5) <= 1e-3);
    CHECK(std::abs(r.values[1] - 2.5) <= 1e-3);
  }
  SUBCASE("banzhaf kernel converges to banzhaf_exact") {
    Rng rng(29);
    const Game g = random_game(5, rng).as_game();
    const auto exact = banzhaf_exact(g);
    const auto r = wls_sampled(g, WeightingKernel::banzhaf(),
                               {.master_seed = 2, .max_evaluations = 400000});
    CHECK(r.converged);
    CHECK((r.values - exact.values).cwiseAbs().maxCoeff() <= 0.05);
  }
  SUBCASE("additive game is recovered exactly once a basis is covered") {
    const Game add = additive_game({1.0, -2.0, 0.5, 3.0});
    const auto r = wls_sampled(add, WeightingKernel::shapley(),
                               {.master_seed = 3, .batch_size = 128, .max_evaluations = 4000});
    const Eigen::Vector4d expected(1.0, -2.0, 0.5, 3.0);
    CHECK((r.values - expected).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("serial equals parallel") {
    Rng rng(31);
    const Game g = random_game(6, rng).as_game();
    EstimatorConfig serial{.master_seed = 5, .max_evaluations = 30000, .threads = 1};
    EstimatorConfig parallel = serial;
    parallel.threads = 3;
    const auto a = wls_sampled(g, WeightingKernel::shapley(), serial);
    const auto b = wls_sampled(g, WeightingKernel::shapley(), parallel);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("estimator unbiasedness audit (single-sample mean)") {
  Rng rng(37);
  const Game g = random_game(6, rng).as_game();
  const auto exact_sh = shapley_exact(g);
  const auto exact_bz = banzhaf_exact(g);
  const int trials = 10000;
  Eigen::VectorXd mean_sh = Eigen::VectorXd::Zero(6);
  Eigen::VectorXd mean_bz = Eigen::VectorXd::Zero(6);
  Eigen::VectorXd m2_sh = Eigen::VectorXd::Zero(6);
  Eigen::VectorXd m2_bz = Eigen::VectorXd::Zero(6);
  for (int t = 0; t < trials; ++t) {
    const auto sh = shapley_sampled(
        g, {.master_seed = static_cast<std::uint64_t>(t), .batch_size = 1, .max_evaluations = 7});
    const auto bz = banzhaf_sampled(
        g, {.master_seed = static_cast<std::uint64_t>(t), .batch_size = 1, .max_evaluations = 7});
    for (int i = 0; i < 6; ++i) {
      const double ds = sh.values[i] - mean_sh[i];
      mean_sh[i] += ds / (t + 1);
      m2_sh[i] += ds * (sh.values[i] - mean_sh[i]);
      const double db = bz.values[i] - mean_bz[i];
      mean_bz[i] += db / (t + 1);
      m2_bz[i] += db * (bz.values[i] - mean_bz[i]);
    }
  }
  for (int i = 0; i < 6; ++i) {
    const double se_sh = std::sqrt(m2_sh[i] / (trials - 1) / trials);
    const double se_bz = std::sqrt(m2_bz[i] / (trials - 1) / trials);
    CHECK(std::abs(mean_sh[i] - exact_sh.values[i]) <= 5 * se_sh);
    CHECK(std::abs(mean_bz[i] - exact_bz.values[i]) <= 5 * se_bz);
  }
}

TEST_CASE("ci half widths shrink with more samples on average") {
  Rng rng(41);
  const Game g = random_game(6, rng).as_game();
  const auto small = shapley_sampled(g, {.master_seed = 9, .max_evaluations = 3000});
  const auto large = shapley_sampled(g, {.master_seed = 9, .max_evaluations = 60000});
  CHECK(large.ci_half_widths.maxCoeff() < small.ci_half_widths.maxCoeff());
}
