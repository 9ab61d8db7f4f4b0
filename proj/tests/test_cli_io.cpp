#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "remex/io.hpp"

using namespace remex;
using namespace remex::test;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / ("remex_io_test_" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

#ifdef REMEX_CLI_PATH
struct CliResult {
  int exit_code;
  std::string stdout_text;
};

CliResult run_cli(const std::string& args, const fs::path& cwd) {
  const fs::path out_file = cwd / "_stdout.txt";
  const std::string cmd = "cd " + cwd.string() + " && " + REMEX_CLI_PATH + " " + args + " > " +
                          out_file.string() + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(status), ss.str()};
}
#endif

}  // namespace

TEST_CASE("real serialization round-trips bit-exactly") {
  Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    double x;
    switch (trial % 4) {
      case 0: x = rng.uniform(-1, 1); break;
      case 1: x = rng.uniform(-1e12, 1e12); break;
      case 2: x = rng.uniform(-1e-9, 1e-9); break;
      default: x = rng.normal() * std::pow(10.0, static_cast<double>(rng.index(30)) - 15.0);
    }
    const json j = x;
    const double back = json::parse(j.dump()).get<double>();
    CHECK(back == x);
  }
}

TEST_CASE("tabulated game json round trip") {
  Rng rng(5);
  const auto tab = random_game(5, rng);
  const auto back = tabulated_game_from_json(tabulated_game_to_json(tab));
  CHECK(back.values() == tab.values());
  CHECK_THROWS_AS(tabulated_game_from_json(json{{"d", 2}, {"values", {0, 1, 2, 4}}, {"extra", 1}}),
                  Error);
}

TEST_CASE("joint json round trip") {
  Rng rng(7);
  const auto joint = DiscreteJoint::random({2, 3}, 2, rng);
  const auto back = joint_from_json(joint_to_json(joint));
  CHECK(back.probs() == joint.probs());
  CHECK(back.cards() == joint.cards());
}

TEST_CASE("model json round trips preserve predictions") {
  Rng rng(11);
  Eigen::VectorXd x(2);
  x << 0.25, -1.5;

  Eigen::VectorXd w(2);
  w << 1.5, -0.5;
  const auto lin = std::make_shared<LinearModel>(w, 0.75);
  const auto lin2 = model_from_json(model_to_json(*lin));
  CHECK(lin2->predict(x) == lin->predict(x));

  Eigen::MatrixXd wm(3, 2);
  wm << 1, 2, -1, 0.5, 0, -2;
  Eigen::VectorXd b(3);
  b << 0.1, -0.2, 0.0;
  const auto logi = std::make_shared<LogisticModel>(wm, b);
  const auto logi2 = model_from_json(model_to_json(*logi));
  CHECK(logi2->predict(x) == logi->predict(x));

  const auto joint = DiscreteJoint::random({2, 2}, 2, rng);
  const auto bayes = bayes_predictor(joint);
  const auto bayes2 = model_from_json(model_to_json(*bayes));
  Eigen::VectorXd cell(2);
  cell << 1, 0;
  CHECK(bayes2->predict(cell) == bayes->predict(cell));

  const auto surrogate = train_masked_surrogate(bayes, joint.to_dataset(),
                                                MaskSampler::uniform_cardinality(),
                                                {.epochs = 100, .seed = 3});
  const auto surrogate2 = masked_mlp_from_json(masked_mlp_to_json(*surrogate));
  CHECK(surrogate2->predict_masked(cell, Mask::single(0, 2)) ==
        surrogate->predict_masked(cell, Mask::single(0, 2)));
}

TEST_CASE("csv dataset loading") {
  const auto dir = temp_dir();
  write_text(dir / "data.csv",
             "x1,x2,y,w\n"
             "0,1.5,0,0.25\n"
             "1,-0.5,1,0.75\n");
  write_text(dir / "schema.json",
             R"({"label":"y","task":"classification","classes":2,)"
             R"("categorical":{"x1":2},"weight":"w"})");
  const Dataset data = load_dataset(dir / "data.csv", dir / "schema.json");
  CHECK(data.n() == 2);
  CHECK(data.d() == 2);
  CHECK(data.classes == 2);
  CHECK(data.y_class == std::vector<int>{0, 1});
  CHECK(data.x(0, 1) == 1.5);
  CHECK(data.weights[1] == 0.75);
  CHECK(data.kinds[0].type == FeatureType::categorical);
  CHECK(data.kinds[1].type == FeatureType::continuous);
  CHECK(data.feature_names == std::vector<std::string>{"x1", "x2"});

  write_text(dir / "bad_schema.json", R"({"label":"y","task":"classification","classes":2,"oops":1})");
  CHECK_THROWS_AS(load_dataset(dir / "data.csv", dir / "bad_schema.json"), Error);
  write_text(dir / "missing_label.json", R"({"label":"nope","task":"regression"})");
  CHECK_THROWS_AS(load_dataset(dir / "data.csv", dir / "missing_label.json"), Error);
}

TEST_CASE("build_run rejects unknown fields and bad versions") {
  const auto dir = temp_dir();
  json config = {{"version", 1},
                 {"model", {{"kind", "linear"}, {"weights", {{"w", {1.0, 2.0}}, {"b", 0.0}}},
                            {"meta", json::object()}}},
                 {"removal", {{"strategy", "zeros"}}},
                 {"behavior", {{"kind", "prediction"}, {"x", {1.0, 1.0}}}},
                 {"summary", {{"kind", "shapley"}}}};
  CHECK_NOTHROW(build_run(config, dir));
  json bad = config;
  bad["surprise"] = true;
  CHECK_THROWS_AS(build_run(bad, dir), Error);
  json old = config;
  old["version"] = 2;
  CHECK_THROWS_AS(build_run(old, dir), Error);
  json bad_removal = config;
  bad_removal["removal"]["typo"] = 1;
  CHECK_THROWS_AS(build_run(bad_removal, dir), Error);
}

TEST_CASE("execute_run payloads are identical modulo timestamp") {
  const auto dir = temp_dir();
  json config = {{"version", 1},
                 {"seed", 9},
                 {"model", {{"kind", "linear"}, {"weights", {{"w", {1.0, 2.0}}, {"b", 0.0}}},
                            {"meta", json::object()}}},
                 {"removal", {{"strategy", "zeros"}}},
                 {"behavior", {{"kind", "prediction"}, {"x", {1.0, 1.0}}}},
                 {"summary", {{"kind", "shapley"}}}};
  auto run1 = build_run(config, dir);
  auto run2 = build_run(config, dir);
  json a = execute_run(run1, config);
  json b = execute_run(run2, config);
  a["provenance"].erase("timestamp");
  b["provenance"].erase("timestamp");
  CHECK(a.dump() == b.dump());
  CHECK(a["result"]["values"] == json::array({1.0, 2.0}));
}

TEST_CASE("estimate json echoes the statistical config") {
  const auto r = shapley_sampled(g1(), {.master_seed = 4, .max_evaluations = 3000});
  const json j = estimate_to_json(r);
  CHECK(j["config"]["master_seed"] == 4);
  CHECK(j["config"].contains("convergence_threshold"));
  CHECK_FALSE(j["config"].contains("threads"));
  // Round trip through text re-parses to identical values.
  const json back = json::parse(j.dump());
  CHECK(back["values"] == j["values"]);
}

TEST_CASE("curve csv format") {
  CurveResult c;
  c.points = {3, 1, 0};
  c.area = 4.0 / 3;
  c.direction = CurveDirection::deletion;
  const std::string csv = curve_to_csv(c);
  CHECK(csv == "n_removed,value\n0,3\n1,1\n2,0\n");
}

#ifdef REMEX_CLI_PATH

TEST_CASE("cli explain is byte-deterministic modulo timestamp") {
  const auto dir = temp_dir();
  write_text(dir / "model.json", R"({"kind":"linear","weights":{"w":[1,2],"b":0},"meta":{}})");
  write_text(dir / "cfg.json", R"({
    "version": 1, "seed": 11,
    "model": {"path": "model.json"},
    "removal": {"strategy": "default", "reference": [0, 0]},
    "behavior": {"kind": "prediction", "x": [1, 1]},
    "summary": {"kind": "shapley", "mode": "sampled",
                "estimator": {"max_evaluations": 5000}},
    "output": "out.json"
  })");
  CHECK(run_cli("explain --config cfg.json --out run1.json", dir).exit_code == 0);
  CHECK(run_cli("explain --config cfg.json --out run2.json", dir).exit_code == 0);
  json a = read_json_file(dir / "run1.json");
  json b = read_json_file(dir / "run2.json");
  a["provenance"].erase("timestamp");
  b["provenance"].erase("timestamp");
  CHECK(a.dump() == b.dump());
  // Serial vs parallel estimators agree byte for byte.
  CHECK(run_cli("explain --config cfg.json --threads 4 --out run3.json", dir).exit_code == 0);
  json c = read_json_file(dir / "run3.json");
  c["provenance"].erase("timestamp");
  CHECK(a.dump() == c.dump());
}

TEST_CASE("cli exit codes") {
  const auto dir = temp_dir();
  CHECK(run_cli("explain --config absent.json", dir).exit_code == 2);
  write_text(dir / "broken.json", "{not json");
  CHECK(run_cli("explain --config broken.json", dir).exit_code == 2);
  // Config parses but the run fails: min-size selection with an impossible
  // threshold is a runtime error (exit 3).
  write_text(dir / "model.json", R"({"kind":"linear","weights":{"w":[1,2],"b":0},"meta":{}})");
  write_text(dir / "infeasible.json", R"({
    "version": 1,
    "model": {"path": "model.json"},
    "removal": {"strategy": "zeros"},
    "behavior": {"kind": "prediction", "x": [1, 1]},
    "summary": {"kind": "select-min-size", "threshold": 99}
  })");
  CHECK(run_cli("explain --config infeasible.json", dir).exit_code == 3);
}

TEST_CASE("cli game subcommands") {
  const auto dir = temp_dir();
  write_text(dir / "g1.json", R"({"d":2,"values":[0,1,2,4]})");
  write_text(dir / "g2.json", R"({"d":3,"values":[0,0,0,1,0,1,0,1]})");
  auto r = run_cli("game shapley --game g1.json", dir);
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.stdout_text)["values"] == json::array({1.5, 2.5}));
  r = run_cli("game select-regularized --game g2.json --lambda 0.25", dir);
  CHECK(json::parse(r.stdout_text)["subset"] == json::array({1, 2}));
  write_text(dir / "bad.json", "[1,2");
  CHECK(run_cli("game shapley --game bad.json", dir).exit_code == 2);
}

TEST_CASE("cli evaluate curve and distance") {
  const auto dir = temp_dir();
  write_text(dir / "model.json", R"({"kind":"linear","weights":{"w":[1,2],"b":0},"meta":{}})");
  write_text(dir / "curve.json", R"({
    "version": 1,
    "model": {"path": "model.json"},
    "removal": {"strategy": "default", "reference": [0, 0]},
    "behavior": {"kind": "prediction", "x": [1, 1]},
    "ranking": [2, 1],
    "direction": "deletion"
  })");
  auto r = run_cli("evaluate curve --config curve.json", dir);
  CHECK(r.exit_code == 0);
  const json c = json::parse(r.stdout_text);
  CHECK(c["points"] == json::array({3.0, 1.0, 0.0}));
  CHECK(run_cli("evaluate curve --config curve.json --out curve.csv", dir).exit_code == 0);
  std::ifstream csv(dir / "curve.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n_removed,value");

  write_text(dir / "a.json", R"({"method":"m","values":[1,2],"n_evaluations":0})");
  write_text(dir / "b.json", R"({"method":"m","values":[2,1],"n_evaluations":0})");
  r = run_cli("evaluate distance --a a.json --b b.json --metric spearman", dir);
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.stdout_text)["value"].get<double>() == doctest::Approx(-1.0));
}

TEST_CASE("cli grid") {
  const auto dir = temp_dir();
  write_text(dir / "model.json", R"({"kind":"linear","weights":{"w":[1,2],"b":0},"meta":{}})");
  write_text(dir / "grid.json", R"({
    "version": 1, "seed": 3,
    "model": {"path": "model.json"},
    "removals": [
      {"name": "zeros", "strategy": "zeros"},
      {"name": "half", "strategy": "default", "reference": [0.5, 0.5]}
    ],
    "behaviors": [{"name": "pred", "kind": "prediction", "x": [1, 1]}],
    "summaries": [
      {"name": "shapley", "kind": "shapley"},
      {"name": "banzhaf", "kind": "banzhaf"}
    ]
  })");
  CHECK(run_cli("grid --spec grid.json --out-dir gridout", dir).exit_code == 0);
  const json report = read_json_file(dir / "gridout" / "report.json");
  CHECK(report["cells"].size() == 4);
  for (const auto& cell : report["cells"]) CHECK(cell["ok"] == true);
  std::ifstream csv(dir / "gridout" / "report.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "removal,behavior,summary,ok,method,n_evaluations,runtime_seconds,values,subset");
}

TEST_CASE("cli selftest smoke") {
  const auto dir = temp_dir();
  CHECK(run_cli("selftest --suite information", dir).exit_code == 0);
  CHECK(run_cli("selftest --suite information --tolerance-scale 1e-12", dir).exit_code == 3);
  CHECK(run_cli("selftest --suite nonsense", dir).exit_code == 2);
}

TEST_CASE("REMEX_SEED env var acts as the default seed") {
  const auto dir = temp_dir();
  write_text(dir / "model.json", R"({"kind":"linear","weights":{"w":[1,2],"b":0},"meta":{}})");
  write_text(dir / "cfg.json", R"({
    "version": 1, "seed": 1,
    "model": {"path": "model.json"},
    "removal": {"strategy": "zeros"},
    "behavior": {"kind": "prediction", "x": [1, 1]},
    "summary": {"kind": "shapley", "mode": "sampled",
                "estimator": {"max_evaluations": 2000}}
  })");
  CHECK(run_cli("explain --config cfg.json --seed 777 --out flag.json", dir).exit_code == 0);
  const std::string env_cmd = "cd " + dir.string() + " && REMEX_SEED=777 " + REMEX_CLI_PATH +
                              " explain --config cfg.json --out env.json > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(env_cmd.c_str())) == 0);
  json a = read_json_file(dir / "flag.json");
  json b = read_json_file(dir / "env.json");
  CHECK(a["result"]["config"]["master_seed"] == 777);
  CHECK(b["result"]["config"]["master_seed"] == 777);
  CHECK(a["result"]["values"] == b["result"]["values"]);
}

#endif  // REMEX_CLI_PATH
