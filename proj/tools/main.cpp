#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "remex/io.hpp"
#include "remex/selftest.hpp"

namespace fs = std::filesystem;
using remex::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int classify_error(const remex::Error& e) {
  switch (e.code()) {
    case remex::Errc::config_error:
    case remex::Errc::io_error:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

remex::Game load_game_file(const std::string& path) {
  return remex::tabulated_game_from_json(remex::read_json_file(path)).as_game();
}

Eigen::VectorXd load_attribution_values(const std::string& path) {
  json j = remex::read_json_file(path);
  if (j.contains("result")) j = j["result"];
  return remex::attribution_from_json(j).values;
}

struct GameCmdState {
  std::string game_path;
  std::string kernel = "shapley";
  std::string reg_kind = "none";
  double reg_lambda = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  double threshold = 0.0;
  int k = 0;
  std::string form = "mp";
  bool sampled = false;
  std::uint64_t seed = 0;
  std::uint64_t max_evaluations = 2'000'000;
  int threads = 1;
};

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

remex::EstimatorConfig estimator_for(const GameCmdState& st) {
  remex::EstimatorConfig cfg;
  cfg.master_seed = st.seed;
  cfg.max_evaluations = st.max_evaluations;
  cfg.threads = st.threads;
  return cfg;
}

int run_game_subcommand(const std::string& name, const GameCmdState& st) {
  const remex::Game game = load_game_file(st.game_path);
  if (name == "shapley") {
    if (st.sampled) {
      emit(remex::estimate_to_json(remex::shapley_sampled(game, estimator_for(st))));
    } else {
      emit(remex::attribution_to_json(remex::shapley_exact(game)));
    }
  } else if (name == "banzhaf") {
    if (st.sampled) {
      emit(remex::estimate_to_json(remex::banzhaf_sampled(game, estimator_for(st))));
    } else {
      emit(remex::attribution_to_json(remex::banzhaf_exact(game)));
    }
  } else if (name == "mean-when-included") {
    if (st.sampled) {
      emit(remex::estimate_to_json(remex::mean_when_included_sampled(game, estimator_for(st))));
    } else {
      emit(remex::attribution_to_json(remex::mean_when_included_exact(game)));
    }
  } else if (name == "remove-individual") {
    emit(remex::attribution_to_json(remex::remove_individual(game)));
  } else if (name == "include-individual") {
    emit(remex::attribution_to_json(remex::include_individual(game)));
  } else if (name == "wls") {
    remex::WeightingKernel kernel = remex::WeightingKernel::shapley();
    if (st.kernel == "banzhaf") kernel = remex::WeightingKernel::banzhaf();
    else if (st.kernel == "include-individual") kernel = remex::WeightingKernel::include_individual();
    else if (st.kernel == "remove-individual") kernel = remex::WeightingKernel::remove_individual();
    else remex::require(st.kernel == "shapley", remex::Errc::config_error,
                        "unknown kernel \"" + st.kernel + "\"");
    if (st.sampled) {
      emit(remex::estimate_to_json(remex::wls_sampled(game, kernel, estimator_for(st))));
    } else {
      remex::Regularizer reg = remex::Regularizer::none();
      if (st.reg_kind == "l1") reg = remex::Regularizer::l1(st.reg_lambda);
      else if (st.reg_kind == "l2") reg = remex::Regularizer::l2(st.reg_lambda);
      else remex::require(st.reg_kind == "none", remex::Errc::config_error,
                          "unknown regularizer \"" + st.reg_kind + "\"");
      emit(remex::attribution_to_json(remex::wls_fit(game, kernel, reg)));
    }
  } else if (name == "select-low-value") {
    emit(remex::selection_to_json(remex::select_low_value(game, st.lambda), game.d));
  } else if (name == "select-min-size") {
    emit(remex::selection_to_json(remex::select_min_size(game, st.threshold), game.d));
  } else if (name == "select-min-size-greedy") {
    emit(remex::selection_to_json(remex::select_min_size_greedy(game, st.threshold), game.d));
  } else if (name == "select-fixed-size") {
    emit(remex::selection_to_json(remex::select_fixed_size(game, st.k), game.d));
  } else if (name == "select-regularized") {
    emit(remex::selection_to_json(remex::select_regularized(game, st.lambda), game.d));
  } else if (name == "select-partition") {
    emit(remex::selection_to_json(remex::select_partition(game, st.gamma, st.lambda), game.d));
  } else if (name == "select-excess") {
    remex::ExcessForm form = remex::ExcessForm::mp;
    if (st.form == "invase") form = remex::ExcessForm::invase;
    else if (st.form == "mm") form = remex::ExcessForm::mm;
    else remex::require(st.form == "mp", remex::Errc::config_error,
                        "form must be mp, invase or mm");
    emit(remex::selection_to_json(remex::selection_via_excess(game, form, st.lambda, st.gamma),
                                  game.d));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"remex: removal-based model explanations"};
  app.require_subcommand(1);

  // ---- explain ----
  auto* explain = app.add_subcommand("explain", "run a configured explanation to a JSON file");
  std::string explain_config;
  std::string explain_out;
  std::uint64_t explain_seed = 0;
  int explain_threads = 1;
  bool explain_seed_set = false;
  explain->add_option("--config", explain_config, "run config JSON")->required();
  explain->add_option("--out", explain_out, "output path (overrides config \"output\")");
  explain->add_option("--seed", explain_seed, "seed override")
      ->envname("REMEX_SEED")
      ->each([&](const std::string&) { explain_seed_set = true; });
  explain->add_option("--threads", explain_threads, "worker threads for estimators");

  // ---- game ----
  auto* game_cmd = app.add_subcommand("game", "summaries of a tabulated game file");
  game_cmd->require_subcommand(1);
  GameCmdState gst;
  const std::vector<std::string> game_subs = {
      "shapley",          "banzhaf",           "mean-when-included",
      "remove-individual", "include-individual", "wls",
      "select-low-value", "select-min-size",   "select-min-size-greedy",
      "select-fixed-size", "select-regularized", "select-partition",
      "select-excess"};
  for (const auto& name : game_subs) {
    auto* sub = game_cmd->add_subcommand(name);
    sub->add_option("--game", gst.game_path, "tabulated game JSON")->required();
    if (name == "wls") {
      sub->add_option("--kernel", gst.kernel, "shapley|banzhaf|include-individual|remove-individual");
      sub->add_option("--regularizer", gst.reg_kind, "none|l1|l2");
      sub->add_option("--reg-lambda", gst.reg_lambda, "regularization strength");
    }
    if (name.rfind("select", 0) == 0) {
      sub->add_option("--lambda", gst.lambda, "size penalty");
      sub->add_option("--gamma", gst.gamma, "partition trade-off");
      sub->add_option("--threshold", gst.threshold, "value threshold");
      sub->add_option("--k", gst.k, "subset size");
      if (name == "select-excess") sub->add_option("--form", gst.form, "mp|invase|mm");
    } else {
      sub->add_flag("--sampled", gst.sampled, "use the sampling estimator");
      sub->add_option("--seed", gst.seed, "estimator seed");
      sub->add_option("--max-evaluations", gst.max_evaluations, "evaluation budget");
      sub->add_option("--threads", gst.threads, "worker threads");
    }
  }

  // ---- grid ----
  auto* grid = app.add_subcommand("grid", "run a removal × behavior × summary grid");
  std::string grid_spec_path, grid_out_dir = ".";
  grid->add_option("--spec", grid_spec_path, "grid spec JSON")->required();
  grid->add_option("--out-dir", grid_out_dir, "directory for report.json / report.csv");

  // ---- evaluate ----
  auto* evaluate = app.add_subcommand("evaluate", "curves and explanation distances");
  evaluate->require_subcommand(1);
  auto* curve = evaluate->add_subcommand("curve", "insertion/deletion curve for a ranking");
  std::string curve_config, curve_out;
  curve->add_option("--config", curve_config, "curve config JSON")->required();
  curve->add_option("--out", curve_out, "CSV output path (stdout JSON otherwise)");
  auto* dist = evaluate->add_subcommand("distance", "distance between two explanations");
  std::string dist_a, dist_b, dist_metric = "euclidean";
  dist->add_option("--a", dist_a, "attribution JSON")->required();
  dist->add_option("--b", dist_b, "attribution JSON")->required();
  dist->add_option("--metric", dist_metric, "euclidean|pearson|spearman");

  // ---- selftest ----
  auto* selftest = app.add_subcommand("selftest", "run the built-in oracle suites");
  std::vector<std::string> suites;
  double tolerance_scale = 1.0;
  selftest->add_option("--suite", suites, "suite name (repeatable; default: all)");
  selftest->add_option("--tolerance-scale", tolerance_scale, "test hook; scales tolerances")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (explain->parsed()) {
      const json config = remex::read_json_file(explain_config);
      const auto base_dir = fs::absolute(explain_config).parent_path();
      auto run = remex::build_run(config, base_dir,
                                  explain_seed_set
                                      ? std::optional<std::uint64_t>(explain_seed)
                                      : std::nullopt);
      run.summary.estimator.threads = explain_threads;
      const json payload = remex::execute_run(run, config);
      std::string out_path = !explain_out.empty() ? explain_out : run.output_path;
      if (out_path.empty()) {
        emit(payload);
      } else {
        remex::write_json_file(out_path, payload);
        std::cerr << "wrote " << out_path << "\n";
      }
      return kExitOk;
    }

    if (game_cmd->parsed()) {
      for (auto* sub : game_cmd->get_subcommands()) {
        return run_game_subcommand(sub->get_name(), gst);
      }
    }

    if (grid->parsed()) {
      const json spec_json = remex::read_json_file(grid_spec_path);
      const auto base_dir = fs::absolute(grid_spec_path).parent_path();
      const auto report = remex::run_grid_from_json(spec_json, base_dir);
      fs::create_directories(grid_out_dir);
      remex::write_json_file(fs::path(grid_out_dir) / "report.json",
                             remex::grid_report_to_json(report));
      std::ofstream csv(fs::path(grid_out_dir) / "report.csv");
      csv << remex::grid_report_to_csv(report);
      std::cerr << "wrote " << grid_out_dir << "/report.{json,csv}\n";
      return kExitOk;
    }

    if (curve->parsed()) {
      const json config = remex::read_json_file(curve_config);
      const auto base_dir = fs::absolute(curve_config).parent_path();
      const auto result = remex::run_curve_from_json(config, base_dir);
      if (curve_out.empty()) {
        emit(remex::curve_to_json(result));
      } else {
        std::ofstream out(curve_out);
        out << remex::curve_to_csv(result);
        std::cerr << "wrote " << curve_out << "\n";
      }
      return kExitOk;
    }

    if (dist->parsed()) {
      remex::DistanceMetric metric = remex::DistanceMetric::euclidean;
      if (dist_metric == "pearson") metric = remex::DistanceMetric::pearson;
      else if (dist_metric == "spearman") metric = remex::DistanceMetric::spearman;
      else remex::require(dist_metric == "euclidean", remex::Errc::config_error,
                          "metric must be euclidean, pearson or spearman");
      const double value = remex::explanation_distance(load_attribution_values(dist_a),
                                                       load_attribution_values(dist_b), metric);
      emit(json{{"metric", dist_metric}, {"value", value}});
      return kExitOk;
    }

    if (selftest->parsed()) {
      if (suites.empty()) suites = remex::selftest_suite_names();
      const auto results = remex::run_selftest(suites, tolerance_scale);
      bool all_pass = true;
      std::printf("%-14s %-6s %12s %12s %8s\n", "suite", "status", "max_error", "tolerance",
                  "seconds");
      for (const auto& r : results) {
        std::printf("%-14s %-6s %12.3e %12.3e %8.2f\n", r.name.c_str(),
                    r.passed ? "PASS" : "FAIL", r.max_error, r.tolerance, r.seconds);
        all_pass = all_pass && r.passed;
      }
      return all_pass ? kExitOk : kExitRuntime;
    }
  } catch (const remex::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
