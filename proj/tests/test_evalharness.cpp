#include <cmath>
#include <memory>

#include "doctest.h"
#include "fixtures.hpp"
#include "remex/evalharness.hpp"

using namespace remex;
using namespace remex::test;

namespace {

SubsetFunction toy_subset() {
  Eigen::VectorXd w(2);
  w << 1, 2;
  const ModelPtr model = std::make_shared<LinearModel>(w, 0.0);
  return extend_default(model, Eigen::VectorXd::Zero(2));
}

}  // namespace

TEST_CASE("deletion and insertion curves") {
  const auto f = toy_subset();
  Eigen::VectorXd x(2);
  x << 1, 1;
  const BehaviorSpec behavior = PredictionBehavior{x, std::nullopt, LinkFn::identity()};
  // Ranking (2,1): feature 2 most important (0-based: (1,0)).
  const auto del = deletion_curve(f, behavior, {1, 0});
  CHECK(del.points == std::vector<double>{3, 1, 0});
  CHECK(del.area == doctest::Approx(4.0 / 3));
  const auto ins = insertion_curve(f, behavior, {1, 0});
  CHECK(ins.points == std::vector<double>{3, 2, 0});
  CHECK(ins.area == doctest::Approx(5.0 / 3));
  // Start-from-empty insertion variant.
  const auto ins0 = insertion_curve(f, behavior, {1, 0}, true);
  CHECK(ins0.points == std::vector<double>{0, 2, 3});

  const Game flat = constant_game(3, 2.0);
  const auto c = removal_curve(flat, {0, 1, 2}, CurveDirection::deletion);
  CHECK(c.area == doctest::Approx(2.0));
  for (double p : c.points) CHECK(p == doctest::Approx(2.0));

  CHECK_THROWS_AS(removal_curve(flat, {0, 1}, CurveDirection::deletion), Error);
  CHECK_THROWS_AS(removal_curve(flat, {0, 1, 1}, CurveDirection::deletion), Error);

  // Truncation flag (default off keeps all d+1 points).
  const auto trunc = removal_curve(make_game(f, behavior), {1, 0}, CurveDirection::deletion,
                                   false, 1);
  CHECK(trunc.points == std::vector<double>{3, 1});
  CHECK(trunc.area == doctest::Approx(2.0));
}

TEST_CASE("curve endpoints are the full and empty values for any ranking") {
  Rng rng(3);
  const Game g = random_game(5, rng).as_game();
  std::vector<int> ranking{3, 0, 4, 1, 2};
  for (auto dir : {CurveDirection::deletion, CurveDirection::insertion}) {
    const auto c = removal_curve(g, ranking, dir);
    CHECK(c.points.front() == g.value(Mask::full(5)));
    CHECK(c.points.back() == g.value(Mask::empty(5)));
  }
}

TEST_CASE("equal-attribution permutations leave symmetric-game areas unchanged") {
  const Game sym{4, [](Mask s) { return std::sqrt(static_cast<double>(s.count())); }};
  const auto a = removal_curve(sym, {0, 1, 2, 3}, CurveDirection::deletion);
  const auto b = removal_curve(sym, {2, 3, 1, 0}, CurveDirection::deletion);
  CHECK(a.area == doctest::Approx(b.area).epsilon(1e-12));
}

TEST_CASE("explanation distances") {
  Eigen::VectorXd a(3), b(3);
  a << 0, 3, 4;
  b << 0, 3, 4;
  CHECK(explanation_distance(a, b, DistanceMetric::euclidean) == doctest::Approx(0.0));
  CHECK(explanation_distance(a, b, DistanceMetric::pearson) == doctest::Approx(1.0));
  Eigen::VectorXd c(2), d(2);
  c << 1, 2;
  d << 2, 1;
  CHECK(explanation_distance(c, d, DistanceMetric::spearman) == doctest::Approx(-1.0));
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(explanation_distance(a, flat, DistanceMetric::pearson), Error);
  CHECK(explanation_distance(a, flat, DistanceMetric::euclidean) == doctest::Approx(5.0));
  // Spearman with ties uses average ranks.
  Eigen::VectorXd t1(4), t2(4);
  t1 << 1, 1, 2, 3;
  t2 << 1, 2, 3, 4;
  CHECK(explanation_distance(t1, t2, DistanceMetric::spearman) ==
        doctest::Approx(0.9486832980505138));
}

TEST_CASE("run_grid populates all cells and distance groups") {
  const auto f = toy_subset();
  Eigen::VectorXd r(2);
  r << 0.5, 0.5;
  Eigen::VectorXd w(2);
  w << 1, 2;
  const ModelPtr model = std::make_shared<LinearModel>(w, 0.0);
  GridSpec spec;
  spec.removals = {{"zeros", extend_zeros(model, 2)}, {"half", extend_default(model, r)}};
  Eigen::VectorXd x(2);
  x << 1, 1;
  spec.behaviors = {{"pred", PredictionBehavior{x, std::nullopt, LinkFn::identity()}}};
  SummarySpec shap;
  shap.kind = SummarySpec::Kind::shapley;
  SummarySpec ri;
  ri.kind = SummarySpec::Kind::remove_individual;
  spec.summaries = {{"shapley", shap}, {"remove-individual", ri}};
  const auto report = run_grid(spec);
  CHECK(report.cells.size() == 4);
  for (const auto& cell : report.cells) CHECK(cell.ok);
  REQUIRE(report.comparisons.size() == 2);
  CHECK(report.comparisons[0].axis == "summary");
  CHECK(report.comparisons[1].axis == "removal");
  // Additive game: shapley == remove-individual per cell, distance 0.
  CHECK(report.comparisons[0].mean_distance(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  // Distance matrices are symmetric with zero diagonal.
  for (const auto& comp : report.comparisons) {
    CHECK(comp.mean_distance.diagonal().norm() == doctest::Approx(0.0));
    CHECK((comp.mean_distance - comp.mean_distance.transpose()).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  // Cell failures are recorded, not fatal.
  SummarySpec bad;
  bad.kind = SummarySpec::Kind::select_min_size;
  bad.threshold = 100.0;
  spec.summaries.push_back({"infeasible", bad});
  const auto with_bad = run_grid(spec);
  int failures = 0;
  for (const auto& cell : with_bad.cells) {
    if (!cell.ok) ++failures;
  }
  CHECK(failures == 2);
  // Parallel grid gives identical values.
  GridSpec par = spec;
  par.threads = 3;
  const auto preport = run_grid(par);
  REQUIRE(preport.cells.size() == with_bad.cells.size());
  for (std::size_t i = 0; i < preport.cells.size(); ++i) {
    CHECK(preport.cells[i].ok == with_bad.cells[i].ok);
    if (preport.cells[i].values() && with_bad.cells[i].values()) {
      CHECK(*preport.cells[i].values() == *with_bad.cells[i].values());
    }
  }
}

TEST_CASE("grid distance reflects removal equivalence under independence") {
  const auto ind = DiscreteJoint::independent(
      {Eigen::Vector2d(0.4, 0.6), Eigen::Vector2d(0.7, 0.3)}, Eigen::Vector2d(0.5, 0.5));
  Eigen::VectorXd w(2);
  w << 2.0, -1.0;
  const ModelPtr model = std::make_shared<LinearModel>(w, 0.0);
  Dataset bg = ind.to_dataset();
  GridSpec spec;
  spec.removals = {
      {"marginal-joint", extend_monte_carlo(model, McStrategy::marginal_joint, bg, {.exact = true})},
      {"product", extend_monte_carlo(model, McStrategy::product_of_marginals, bg, {.exact = true})}};
  Eigen::VectorXd x(2);
  x << 1, 0;
  spec.behaviors = {{"pred", PredictionBehavior{x, std::nullopt, LinkFn::identity()}}};
  SummarySpec shap;
  shap.kind = SummarySpec::Kind::shapley;
  spec.summaries = {{"shapley", shap}};
  const auto report = run_grid(spec);
  CHECK(report.comparisons[1].mean_distance(0, 1) <= 1e-10);
}

TEST_CASE("aligned metric demo: each masking favors its own removal strategy") {
  // X1 ∈ {0,1,2} with mean 0.8; X2 indicates a high conditional mean:
  // E[X1 | X2=1] ≈ 1.26 > 1 = x1*, so the conditional explanation ranks
  // feature 2 first at x* = (1,1) while the zeros explanation ranks
  // feature 1 first.
  const std::vector<double> px = {0.4, 0.4, 0.2};
  const std::vector<double> a = {0.1, 0.5, 0.7};  // p(X2=1 | X1)
  std::vector<double> probs;
  for (int x1 = 0; x1 < 3; ++x1) {
    for (int x2 = 0; x2 < 2; ++x2) {
      const double p = px[static_cast<std::size_t>(x1)] *
                       (x2 == 1 ? a[static_cast<std::size_t>(x1)]
                                : 1 - a[static_cast<std::size_t>(x1)]);
      probs.push_back(p);  // class 0 carries all mass; Y is irrelevant here
      probs.push_back(0.0);
    }
  }
  const DiscreteJoint joint({3, 2}, 2, probs);
  Eigen::VectorXd w(2);
  w << 1, 0;  // f(x) = x1
  const ModelPtr model = std::make_shared<LinearModel>(w, 0.0);
  const auto zeros_f = extend_zeros(model, 2);
  const auto cond_f = extend_conditional_exact(model, joint);

  Eigen::VectorXd x(2);
  x << 1, 1;
  const BehaviorSpec behavior = PredictionBehavior{x, std::nullopt, LinkFn::identity()};
  const auto zeros_expl = shapley_exact(make_game(zeros_f, behavior));
  const auto cond_expl = shapley_exact(make_game(cond_f, behavior));
  // The two explanations rank the features differently.
  CHECK(ranking_from_attribution(zeros_expl.values) == std::vector<int>{0, 1});
  CHECK(ranking_from_attribution(cond_expl.values) == std::vector<int>{1, 0});

  const auto report = aligned_metric_demo(
      {{"zeros-explanation", zeros_expl}, {"conditional-explanation", cond_expl}},
      {{"zeros-masking", zeros_f}, {"conditional-masking", cond_f}},
      [&](const SubsetFunction&) { return behavior; });
  CHECK(report.ranking_by_masking.at("zeros-masking").front() == "zeros-explanation");
  CHECK(report.ranking_by_masking.at("conditional-masking").front() == "conditional-explanation");
}

TEST_CASE("aligned metric demo: trivial model ties") {
  const ModelPtr model = std::make_shared<LinearModel>(Eigen::VectorXd::Zero(2), 1.0);
  const auto f = extend_zeros(model, 2);
  Eigen::VectorXd x(2);
  x << 1, 1;
  const BehaviorSpec behavior = PredictionBehavior{x, std::nullopt, LinkFn::identity()};
  AttributionResult e1, e2;
  e1.values = Eigen::Vector2d(1.0, 0.0);
  e2.values = Eigen::Vector2d(0.0, 1.0);
  const auto report = aligned_metric_demo({{"a", e1}, {"b", e2}}, {{"zeros", f}},
                                          [&](const SubsetFunction&) { return behavior; });
  CHECK(report.entries[0].score == doctest::Approx(report.entries[1].score));
}
