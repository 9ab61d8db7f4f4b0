#include "remex/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace remex {

namespace {

Eigen::VectorXd vec_from_json(const json& j) {
  require(j.is_array(), Errc::config_error, "expected an array of reals");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  int i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Eigen::MatrixXd mat_from_json(const json& j) {
  require(j.is_array() && !j.empty(), Errc::config_error, "expected a nested array");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    require(static_cast<int>(j[r].size()) == cols, Errc::config_error, "ragged matrix");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json j = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

json mask_to_indices(Mask m) {
  json j = json::array();
  for (int i : m.members()) j.push_back(i + 1);  // 1-based in files
  return j;
}

}  // namespace

void check_keys(const json& j, const std::string& context,
                std::initializer_list<const char*> allowed) {
  require(j.is_object(), Errc::config_error, context + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    require(ok.count(key) > 0, Errc::config_error,
            "unknown field \"" + key + "\" in " + context);
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), Errc::io_error, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(Errc::config_error, "malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  require(out.good(), Errc::io_error, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// ---- game ----

json tabulated_game_to_json(const TabulatedGame& game) {
  json j;
  j["d"] = game.dim();
  j["values"] = game.values();
  return j;
}

TabulatedGame tabulated_game_from_json(const json& j) {
  check_keys(j, "game", {"d", "values"});
  require(j.contains("d") && j.contains("values"), Errc::config_error,
          "game needs \"d\" and \"values\"");
  return TabulatedGame(j["d"].get<int>(), j["values"].get<std::vector<double>>());
}

// ---- joint ----

json joint_to_json(const DiscreteJoint& joint) {
  json j;
  j["cards"] = joint.cards();
  j["classes"] = joint.classes();
  j["probs"] = joint.probs();
  return j;
}

DiscreteJoint joint_from_json(const json& j) {
  check_keys(j, "joint", {"cards", "classes", "probs"});
  require(j.contains("cards") && j.contains("classes") && j.contains("probs"), Errc::config_error,
          "joint needs \"cards\", \"classes\", \"probs\"");
  return DiscreteJoint(j["cards"].get<std::vector<int>>(), j["classes"].get<int>(),
                       j["probs"].get<std::vector<double>>());
}

// ---- models ----

json masked_mlp_to_json(const MaskedMlp& mlp) {
  json j;
  j["kind"] = "masked-mlp";
  j["weights"] = {{"w1", mat_to_json(mlp.w1())}, {"b1", vec_to_json(mlp.b1())},
                  {"w2", mat_to_json(mlp.w2())}, {"b2", vec_to_json(mlp.b2())},
                  {"w3", mat_to_json(mlp.w3())}, {"b3", vec_to_json(mlp.b3())}};
  j["meta"] = {{"d", mlp.features()},
               {"output_dim", mlp.output_dim()},
               {"classification", mlp.classification()}};
  return j;
}

MaskedPtr masked_mlp_from_json(const json& j) {
  check_keys(j, "masked-mlp model", {"kind", "weights", "meta"});
  const auto& w = j.at("weights");
  const auto& meta = j.at("meta");
  return std::make_shared<MaskedMlp>(
      meta.at("d").get<int>(), meta.at("output_dim").get<int>(),
      meta.at("classification").get<bool>(), mat_from_json(w.at("w1")),
      vec_from_json(w.at("b1")), mat_from_json(w.at("w2")), vec_from_json(w.at("b2")),
      mat_from_json(w.at("w3")), vec_from_json(w.at("b3")));
}

json model_to_json(const PredictModel& model) {
  json j;
  j["kind"] = model.kind();
  if (const auto* lin = dynamic_cast<const LinearModel*>(&model)) {
    j["weights"] = {{"w", vec_to_json(lin->weights())}, {"b", lin->intercept()}};
    j["meta"] = json::object();
    return j;
  }
  if (const auto* lo = dynamic_cast<const LogisticModel*>(&model)) {
    j["weights"] = {{"W", mat_to_json(lo->weights())}, {"b", vec_to_json(lo->bias())}};
    j["meta"] = json::object();
    return j;
  }
  if (const auto* tab = dynamic_cast<const TableModel*>(&model)) {
    j["weights"] = {{"cards", tab->cards()}, {"outputs", mat_to_json(tab->outputs())}};
    j["meta"] = {{"classification", tab->classification()}};
    return j;
  }
  if (const auto* bayes = dynamic_cast<const BayesModel*>(&model)) {
    j["weights"] = {{"joint", joint_to_json(bayes->joint())}};
    j["meta"] = {{"regression", bayes->regression_mode()}};
    return j;
  }
  if (const auto* mlp = dynamic_cast<const MaskedMlp*>(&model)) {
    return masked_mlp_to_json(*mlp);
  }
  fail(Errc::unsupported, "cannot serialize model kind " + model.kind());
}

ModelPtr model_from_json(const json& j) {
  require(j.is_object() && j.contains("kind"), Errc::config_error, "model needs a \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "linear") {
    check_keys(j, "linear model", {"kind", "weights", "meta"});
    const auto& w = j.at("weights");
    return std::make_shared<LinearModel>(vec_from_json(w.at("w")), w.at("b").get<double>());
  }
  if (kind == "logistic") {
    check_keys(j, "logistic model", {"kind", "weights", "meta"});
    const auto& w = j.at("weights");
    return std::make_shared<LogisticModel>(mat_from_json(w.at("W")), vec_from_json(w.at("b")));
  }
  if (kind == "external-table") {
    check_keys(j, "table model", {"kind", "weights", "meta"});
    const auto& w = j.at("weights");
    return std::make_shared<TableModel>(w.at("cards").get<std::vector<int>>(),
                                        mat_from_json(w.at("outputs")),
                                        j.at("meta").value("classification", true));
  }
  if (kind == "bayes-from-joint") {
    check_keys(j, "bayes model", {"kind", "weights", "meta"});
    const bool regression = j.contains("meta") ? j["meta"].value("regression", false) : false;
    return std::make_shared<BayesModel>(joint_from_json(j.at("weights").at("joint")), regression);
  }
  if (kind == "masked-mlp") {
    return std::static_pointer_cast<const PredictModel>(masked_mlp_from_json(j));
  }
  fail(Errc::config_error, "unknown model kind \"" + kind + "\"");
}

// ---- datasets ----

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

Dataset load_dataset_csv(const std::filesystem::path& csv_path, const json& schema) {
  check_keys(schema, "dataset schema", {"label", "task", "classes", "categorical", "weight"});
  std::ifstream in(csv_path);
  require(in.good(), Errc::io_error, "cannot open " + csv_path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::config_error,
          "CSV has no header row");
  const auto header = split_csv_line(line);

  const std::string label_col = schema.value("label", "");
  const std::string weight_col = schema.value("weight", "");
  const std::string task = schema.value("task", "regression");
  require(task == "regression" || task == "classification", Errc::config_error,
          "task must be \"regression\" or \"classification\"");

  int label_idx = -1, weight_idx = -1;
  std::vector<int> feature_cols;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (header[static_cast<std::size_t>(c)] == label_col) {
      label_idx = c;
    } else if (!weight_col.empty() && header[static_cast<std::size_t>(c)] == weight_col) {
      weight_idx = c;
    } else {
      feature_cols.push_back(c);
    }
  }
  require(label_col.empty() || label_idx >= 0, Errc::config_error,
          "label column \"" + label_col + "\" not found in CSV header");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    require(cells.size() == header.size(), Errc::config_error,
            "CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                std::to_string(header.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        fail(Errc::config_error, "non-numeric CSV cell \"" + cell + "\"");
      }
    }
    rows.push_back(std::move(row));
  }

  Dataset out;
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(feature_cols.size());
  out.x.resize(n, d);
  if (weight_idx >= 0) out.weights.resize(n);
  for (int j = 0; j < d; ++j) {
    out.feature_names.push_back(header[static_cast<std::size_t>(feature_cols[static_cast<std::size_t>(j)])]);
  }
  if (task == "classification") {
    out.classes = schema.value("classes", 0);
    require(out.classes >= 2, Errc::config_error, "classification needs \"classes\" >= 2");
    out.y_class.resize(static_cast<std::size_t>(n));
  } else if (label_idx >= 0) {
    out.y_reg.resize(n);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      out.x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(feature_cols[static_cast<std::size_t>(j)])];
    }
    if (label_idx >= 0) {
      const double y = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(label_idx)];
      if (task == "classification") {
        require(y == std::floor(y), Errc::config_error, "class labels must be integers");
        out.y_class[static_cast<std::size_t>(i)] = static_cast<int>(y);
      } else {
        out.y_reg[i] = y;
      }
    }
    if (weight_idx >= 0) out.weights[i] = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(weight_idx)];
  }
  out.kinds.assign(static_cast<std::size_t>(d), FeatureKind::cont());
  if (schema.contains("categorical")) {
    for (const auto& [name, card] : schema["categorical"].items()) {
      bool found = false;
      for (int j = 0; j < d; ++j) {
        if (out.feature_names[static_cast<std::size_t>(j)] == name) {
          out.kinds[static_cast<std::size_t>(j)] = FeatureKind::cat(card.get<int>());
          found = true;
        }
      }
      require(found, Errc::config_error, "categorical column \"" + name + "\" not in CSV");
    }
  }
  out.validate();
  return out;
}

Dataset load_dataset(const std::filesystem::path& csv_path,
                     const std::filesystem::path& schema_path) {
  return load_dataset_csv(csv_path, read_json_file(schema_path));
}

// ---- results ----

json attribution_to_json(const AttributionResult& a) {
  for (int i = 0; i < a.values.size(); ++i) {
    require(std::isfinite(a.values[i]), Errc::non_finite_value,
            "attribution values must be finite");
  }
  json j;
  j["method"] = a.method;
  j["values"] = vec_to_json(a.values);
  if (a.intercept.has_value()) j["intercept"] = *a.intercept;
  j["n_evaluations"] = a.n_evaluations;
  if (a.negative_input_warning) {
    j["warning"] = "normalized values include negative inputs";
  }
  return j;
}

AttributionResult attribution_from_json(const json& j) {
  check_keys(j, "attribution", {"method", "values", "intercept", "n_evaluations", "warning"});
  AttributionResult a;
  a.method = j.value("method", "");
  a.values = vec_from_json(j.at("values"));
  if (j.contains("intercept")) a.intercept = j["intercept"].get<double>();
  a.n_evaluations = j.value("n_evaluations", std::uint64_t{0});
  a.negative_input_warning = j.contains("warning");
  return a;
}

json selection_to_json(const SelectionResult& s, int d) {
  (void)d;
  json j;
  j["method"] = s.method;
  j["subset"] = mask_to_indices(s.subset);
  j["objective"] = s.objective;
  j["tie_broken"] = s.tie_broken;
  j["n_evaluations"] = s.n_evaluations;
  return j;
}

json estimate_to_json(const EstimateResult& e) {
  json j;
  j["method"] = e.method;
  j["values"] = vec_to_json(e.values);
  j["std_errors"] = vec_to_json(e.std_errors);
  j["ci_half_widths"] = vec_to_json(e.ci_half_widths);
  j["converged"] = e.converged;
  j["n_samples"] = e.n_samples;
  j["n_game_evaluations"] = e.n_game_evaluations;
  // threads is an execution detail, not part of the estimator's identity.
  j["config"] = {{"master_seed", e.config.master_seed},
                 {"batch_size", e.config.batch_size},
                 {"convergence_threshold", e.config.convergence_threshold},
                 {"max_evaluations", e.config.max_evaluations},
                 {"confidence", e.config.confidence},
                 {"rise_inclusion_p", e.config.rise_inclusion_p}};
  return j;
}

json curve_to_json(const CurveResult& c) {
  json j;
  j["direction"] = c.direction == CurveDirection::deletion ? "deletion" : "insertion";
  j["points"] = c.points;
  j["area"] = c.area;
  return j;
}

std::string curve_to_csv(const CurveResult& c) {
  std::ostringstream out;
  out << "n_removed,value\n";
  out.precision(17);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    out << i << "," << c.points[i] << "\n";
  }
  return out.str();
}

json grid_report_to_json(const GridReport& report) {
  json cells = json::array();
  for (const auto& cell : report.cells) {
    json c;
    c["removal"] = cell.removal;
    c["behavior"] = cell.behavior;
    c["summary"] = cell.summary;
    c["ok"] = cell.ok;
    c["runtime_seconds"] = cell.runtime_seconds;
    if (!cell.ok) c["error"] = cell.error;
    if (cell.attribution) c["attribution"] = attribution_to_json(*cell.attribution);
    if (cell.estimate) c["estimate"] = estimate_to_json(*cell.estimate);
    if (cell.selection) c["selection"] = selection_to_json(*cell.selection, 0);
    cells.push_back(std::move(c));
  }
  json comparisons = json::array();
  for (const auto& comp : report.comparisons) {
    comparisons.push_back({{"axis", comp.axis},
                           {"labels", comp.labels},
                           {"mean_distance", mat_to_json(comp.mean_distance)}});
  }
  return {{"cells", cells}, {"comparisons", comparisons}};
}

std::string grid_report_to_csv(const GridReport& report) {
  std::ostringstream out;
  out << "removal,behavior,summary,ok,method,n_evaluations,runtime_seconds,values,subset\n";
  out.precision(17);
  for (const auto& cell : report.cells) {
    out << cell.removal << "," << cell.behavior << "," << cell.summary << ","
        << (cell.ok ? 1 : 0) << ",";
    std::string method;
    std::uint64_t evals = 0;
    std::string values;
    std::string subset;
    if (cell.attribution) {
      method = cell.attribution->method;
      evals = cell.attribution->n_evaluations;
      std::ostringstream vs;
      vs.precision(17);
      for (int i = 0; i < cell.attribution->values.size(); ++i) {
        if (i) vs << ";";
        vs << cell.attribution->values[i];
      }
      values = vs.str();
    } else if (cell.estimate) {
      method = cell.estimate->method;
      evals = cell.estimate->n_game_evaluations;
      std::ostringstream vs;
      vs.precision(17);
      for (int i = 0; i < cell.estimate->values.size(); ++i) {
        if (i) vs << ";";
        vs << cell.estimate->values[i];
      }
      values = vs.str();
    } else if (cell.selection) {
      method = cell.selection->method;
      evals = cell.selection->n_evaluations;
      std::ostringstream ss;
      const auto members = cell.selection->subset.members();
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) ss << ";";
        ss << members[i] + 1;
      }
      subset = ss.str();
    }
    out << method << "," << evals << "," << cell.runtime_seconds << "," << values << ","
        << subset << "\n";
  }
  return out.str();
}

// ---- run configuration ----

namespace {

LossFn loss_from_json(const json& j, const std::string& context) {
  const std::string name = j.get<std::string>();
  if (name == "cross-entropy") return LossFn::cross_entropy();
  if (name == "mse") return LossFn::mse();
  fail(Errc::config_error, context + ": unknown loss \"" + name + "\"");
}

Target target_from_json(const json& j) {
  if (j.is_array()) return Target{vec_from_json(j)};
  if (j.is_number_integer()) return Target{j.get<int>()};
  return Target{j.get<double>()};
}

EstimatorConfig estimator_from_json(const json& j, std::uint64_t seed) {
  EstimatorConfig cfg;
  cfg.master_seed = seed;
  if (j.is_null()) return cfg;
  check_keys(j, "estimator", {"batch_size", "convergence_threshold", "max_evaluations",
                              "confidence", "rise_inclusion_p"});
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.convergence_threshold = j.value("convergence_threshold", cfg.convergence_threshold);
  cfg.max_evaluations = j.value("max_evaluations", cfg.max_evaluations);
  cfg.confidence = j.value("confidence", cfg.confidence);
  cfg.rise_inclusion_p = j.value("rise_inclusion_p", cfg.rise_inclusion_p);
  cfg.validate();
  return cfg;
}

WeightingKernel kernel_from_json(const json& j) {
  const std::string name = j.get<std::string>();
  if (name == "shapley") return WeightingKernel::shapley();
  if (name == "banzhaf") return WeightingKernel::banzhaf();
  if (name == "include-individual") return WeightingKernel::include_individual();
  if (name == "remove-individual") return WeightingKernel::remove_individual();
  fail(Errc::config_error, "unknown kernel \"" + name + "\"");
}

struct RunParts {
  ModelPtr model;
  std::optional<Dataset> dataset;
  std::optional<DiscreteJoint> joint;
};

SubsetFunction removal_from_json(const json& j, const RunParts& parts, std::uint64_t seed,
                                 const std::filesystem::path& base_dir) {
  require(j.is_object() && j.contains("strategy"), Errc::config_error,
          "removal config needs a \"strategy\"");
  const std::string strategy = j["strategy"].get<std::string>();
  const auto need_model = [&]() -> ModelPtr {
    require(parts.model != nullptr, Errc::config_error,
            "removal strategy \"" + strategy + "\" needs a model");
    return parts.model;
  };
  const auto need_dataset = [&]() -> const Dataset& {
    require(parts.dataset.has_value(), Errc::config_error,
            "removal strategy \"" + strategy + "\" needs a dataset");
    return *parts.dataset;
  };
  const auto need_joint = [&]() -> const DiscreteJoint& {
    require(parts.joint.has_value(), Errc::config_error,
            "removal strategy \"" + strategy + "\" needs a joint");
    return *parts.joint;
  };

  if (strategy == "zeros") {
    check_keys(j, "removal", {"strategy"});
    return extend_zeros(need_model(), need_model()->input_dim());
  }
  if (strategy == "default") {
    check_keys(j, "removal", {"strategy", "reference"});
    if (j.contains("reference") && j["reference"].is_string()) {
      require(j["reference"].get<std::string>() == "mean", Errc::config_error,
              "reference must be an array or \"mean\"");
      return extend_default(need_model(), feature_means(need_dataset()));
    }
    require(j.contains("reference"), Errc::config_error, "default removal needs a reference");
    return extend_default(need_model(), vec_from_json(j["reference"]));
  }
  if (strategy == "marginal-joint" || strategy == "product-of-marginals" ||
      strategy == "uniform" || strategy == "replacement-categorical") {
    check_keys(j, "removal", {"strategy", "samples", "exact", "support_cap"});
    McOptions opt;
    opt.n_samples = j.value("samples", opt.n_samples);
    opt.exact = j.value("exact", false);
    opt.support_cap = j.value("support_cap", opt.support_cap);
    opt.seed = seed;
    McStrategy s = McStrategy::marginal_joint;
    if (strategy == "product-of-marginals") s = McStrategy::product_of_marginals;
    if (strategy == "uniform") s = McStrategy::uniform;
    if (strategy == "replacement-categorical") s = McStrategy::replacement_categorical;
    return extend_monte_carlo(need_model(), s, need_dataset(), opt);
  }
  if (strategy == "conditional-empirical") {
    check_keys(j, "removal", {"strategy", "fallback"});
    const std::string fb = j.value("fallback", "error");
    require(fb == "error" || fb == "marginal", Errc::config_error,
            "fallback must be \"error\" or \"marginal\"");
    return extend_conditional_empirical(
        need_model(), need_dataset(),
        fb == "error" ? MatchFallback::error : MatchFallback::marginal);
  }
  if (strategy == "conditional-exact") {
    check_keys(j, "removal", {"strategy"});
    return extend_conditional_exact(need_model(), need_joint());
  }
  if (strategy == "surrogate" || strategy == "missingness") {
    check_keys(j, "removal", {"strategy", "model_path", "train"});
    if (j.contains("model_path")) {
      const auto mlp = masked_mlp_from_json(
          read_json_file(base_dir / j["model_path"].get<std::string>()));
      return wrap_masked(mlp);
    }
    require(j.contains("train"), Errc::config_error,
            strategy + " removal needs \"model_path\" or \"train\"");
    const json& t = j["train"];
    check_keys(t, "train", {"epochs", "hidden", "lr", "sampler", "bernoulli_p"});
    MlpTrainConfig cfg;
    cfg.epochs = t.value("epochs", cfg.epochs);
    cfg.hidden = t.value("hidden", cfg.hidden);
    cfg.lr = t.value("lr", cfg.lr);
    cfg.seed = seed;
    MaskSampler sampler = MaskSampler::uniform_cardinality();
    const std::string sname = t.value("sampler", "uniform-cardinality");
    if (sname == "bernoulli") {
      sampler = MaskSampler::bernoulli(t.value("bernoulli_p", 0.5));
    } else if (sname == "uniform-subsets") {
      sampler = MaskSampler::uniform_subsets();
    } else {
      require(sname == "uniform-cardinality", Errc::config_error,
              "unknown mask sampler \"" + sname + "\"");
    }
    if (strategy == "surrogate") {
      return wrap_masked(train_masked_surrogate(need_model(), need_dataset(), sampler, cfg));
    }
    return wrap_masked(train_with_missingness(need_dataset(), sampler, cfg));
  }
  if (strategy == "separate-models") {
    check_keys(j, "removal", {"strategy", "trainer"});
    require(j.contains("trainer"), Errc::config_error, "separate-models needs a trainer");
    const json& t = j["trainer"];
    SeparateModelsTrainer trainer;
    const std::string kind = t.value("kind", "linear");
    if (kind == "linear") {
      check_keys(t, "trainer", {"kind", "ridge"});
      trainer.kind = SeparateModelsTrainer::Kind::linear;
      trainer.ridge = t.value("ridge", 0.0);
    } else if (kind == "logistic") {
      check_keys(t, "trainer", {"kind", "lr", "epochs", "l2"});
      trainer.kind = SeparateModelsTrainer::Kind::logistic;
      trainer.logistic.lr = t.value("lr", trainer.logistic.lr);
      trainer.logistic.epochs = t.value("epochs", trainer.logistic.epochs);
      trainer.logistic.l2 = t.value("l2", trainer.logistic.l2);
      trainer.logistic.seed = seed;
    } else {
      fail(Errc::config_error, "unknown trainer kind \"" + kind + "\"");
    }
    return extend_separate_models(trainer, need_dataset());
  }
  if (strategy == "bayes-subset") {
    check_keys(j, "removal", {"strategy", "regression"});
    if (j.value("regression", false)) return bayes_subset_regressor(need_joint());
    return bayes_subset_predictor(need_joint());
  }
  fail(Errc::config_error, "unknown removal strategy \"" + strategy + "\"");
}

BehaviorSpec behavior_from_json(const json& j, const RunParts& parts) {
  require(j.is_object() && j.contains("kind"), Errc::config_error,
          "behavior config needs a \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  const auto need_dataset = [&]() {
    require(parts.dataset.has_value(), Errc::config_error,
            "behavior \"" + kind + "\" needs a dataset");
    return std::make_shared<const Dataset>(*parts.dataset);
  };
  if (kind == "prediction") {
    check_keys(j, "behavior", {"kind", "x", "class", "link"});
    PredictionBehavior b;
    b.x = vec_from_json(j.at("x"));
    if (j.contains("class")) b.cls = j["class"].get<int>();
    const std::string link = j.value("link", "identity");
    if (link == "log-odds") {
      b.link = LinkFn::log_odds();
    } else {
      require(link == "identity", Errc::config_error, "unknown link \"" + link + "\"");
    }
    return b;
  }
  if (kind == "prediction-loss") {
    check_keys(j, "behavior", {"kind", "x", "y", "loss"});
    return PredictionLossBehavior{vec_from_json(j.at("x")), target_from_json(j.at("y")),
                                  loss_from_json(j.at("loss"), "behavior")};
  }
  if (kind == "prediction-mean-loss") {
    check_keys(j, "behavior", {"kind", "x", "label_dist", "loss"});
    return PredictionMeanLossBehavior{vec_from_json(j.at("x")), vec_from_json(j.at("label_dist")),
                                      loss_from_json(j.at("loss"), "behavior")};
  }
  if (kind == "dataset-loss") {
    check_keys(j, "behavior", {"kind", "loss"});
    return DatasetLossBehavior{need_dataset(), loss_from_json(j.at("loss"), "behavior")};
  }
  if (kind == "output-loss") {
    check_keys(j, "behavior", {"kind", "x", "loss"});
    return OutputLossBehavior{vec_from_json(j.at("x")), loss_from_json(j.at("loss"), "behavior")};
  }
  if (kind == "dataset-output-loss") {
    check_keys(j, "behavior", {"kind", "loss"});
    return DatasetOutputLossBehavior{need_dataset(), loss_from_json(j.at("loss"), "behavior")};
  }
  fail(Errc::config_error, "unknown behavior kind \"" + kind + "\"");
}

SummarySpec summary_from_json(const json& j, std::uint64_t seed) {
  require(j.is_object() && j.contains("kind"), Errc::config_error,
          "summary config needs a \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  SummarySpec spec;
  using K = SummarySpec::Kind;
  if (kind == "shapley" || kind == "banzhaf" || kind == "mean-when-included" ||
      kind == "remove-individual" || kind == "include-individual") {
    check_keys(j, "summary", {"kind", "mode", "estimator"});
    if (kind == "shapley") spec.kind = K::shapley;
    if (kind == "banzhaf") spec.kind = K::banzhaf;
    if (kind == "mean-when-included") spec.kind = K::mean_when_included;
    if (kind == "remove-individual") spec.kind = K::remove_individual;
    if (kind == "include-individual") spec.kind = K::include_individual;
    const std::string mode = j.value("mode", "exact");
    require(mode == "exact" || mode == "sampled", Errc::config_error,
            "summary mode must be \"exact\" or \"sampled\"");
    spec.sampled = mode == "sampled";
    if (spec.sampled) {
      require(kind != "remove-individual" && kind != "include-individual", Errc::config_error,
              kind + " is already linear-cost; no sampled mode");
      spec.estimator = estimator_from_json(j.value("estimator", json()), seed);
    }
    return spec;
  }
  if (kind == "wls") {
    check_keys(j, "summary", {"kind", "kernel", "regularizer", "mode", "estimator"});
    spec.kind = K::wls;
    spec.kernel = kernel_from_json(j.at("kernel"));
    if (j.contains("regularizer")) {
      const json& r = j["regularizer"];
      check_keys(r, "regularizer", {"kind", "lambda"});
      const std::string rk = r.value("kind", "none");
      const double lambda = r.value("lambda", 0.0);
      if (rk == "l1") {
        spec.regularizer = Regularizer::l1(lambda);
      } else if (rk == "l2") {
        spec.regularizer = Regularizer::l2(lambda);
      } else {
        require(rk == "none", Errc::config_error, "unknown regularizer \"" + rk + "\"");
      }
    }
    const std::string mode = j.value("mode", "exact");
    spec.sampled = mode == "sampled";
    if (spec.sampled) spec.estimator = estimator_from_json(j.value("estimator", json()), seed);
    return spec;
  }
  if (kind == "select-low-value") {
    check_keys(j, "summary", {"kind", "lambda"});
    spec.kind = K::select_low_value;
    spec.lambda = j.value("lambda", 0.0);
    return spec;
  }
  if (kind == "select-min-size") {
    check_keys(j, "summary", {"kind", "threshold"});
    spec.kind = K::select_min_size;
    spec.threshold = j.at("threshold").get<double>();
    return spec;
  }
  if (kind == "select-min-size-greedy") {
    check_keys(j, "summary", {"kind", "threshold"});
    spec.kind = K::select_min_size_greedy;
    spec.threshold = j.at("threshold").get<double>();
    return spec;
  }
  if (kind == "select-fixed-size") {
    check_keys(j, "summary", {"kind", "k"});
    spec.kind = K::select_fixed_size;
    spec.k = j.at("k").get<int>();
    return spec;
  }
  if (kind == "select-regularized") {
    check_keys(j, "summary", {"kind", "lambda"});
    spec.kind = K::select_regularized;
    spec.lambda = j.value("lambda", 0.0);
    return spec;
  }
  if (kind == "select-partition") {
    check_keys(j, "summary", {"kind", "gamma", "lambda"});
    spec.kind = K::select_partition;
    spec.gamma = j.value("gamma", 0.0);
    spec.lambda = j.value("lambda", 0.0);
    return spec;
  }
  fail(Errc::config_error, "unknown summary kind \"" + kind + "\"");
}

RunParts parts_from_json(const json& config, const std::filesystem::path& base_dir,
                         std::uint64_t seed) {
  RunParts parts;
  if (config.contains("joint")) {
    const json& j = config["joint"];
    if (j.is_object() && j.contains("path")) {
      check_keys(j, "joint reference", {"path"});
      parts.joint = joint_from_json(read_json_file(base_dir / j["path"].get<std::string>()));
    } else {
      parts.joint = joint_from_json(j);
    }
  }
  if (config.contains("dataset")) {
    const json& ds = config["dataset"];
    if (ds.is_object() && ds.contains("csv")) {
      check_keys(ds, "dataset reference", {"csv", "schema"});
      parts.dataset = load_dataset(base_dir / ds["csv"].get<std::string>(),
                                   base_dir / ds.at("schema").get<std::string>());
    } else if (ds.is_string() && ds.get<std::string>() == "from-joint") {
      require(parts.joint.has_value(), Errc::config_error,
              "dataset \"from-joint\" needs a joint");
      parts.dataset = parts.joint->to_dataset();
    } else {
      fail(Errc::config_error, "dataset must be {\"csv\",\"schema\"} or \"from-joint\"");
    }
  }
  if (config.contains("model")) {
    const json& m = config["model"];
    if (m.is_object() && m.contains("path")) {
      check_keys(m, "model reference", {"path"});
      parts.model = model_from_json(read_json_file(base_dir / m["path"].get<std::string>()));
    } else if (m.is_object() && m.contains("train")) {
      check_keys(m, "model reference", {"train"});
      const json& t = m["train"];
      const std::string kind = t.value("kind", "linear");
      require(parts.dataset.has_value(), Errc::config_error, "model training needs a dataset");
      if (kind == "linear") {
        check_keys(t, "model train", {"kind", "ridge"});
        parts.model = train_linear(*parts.dataset, t.value("ridge", 0.0));
      } else if (kind == "logistic") {
        check_keys(t, "model train", {"kind", "lr", "epochs", "l2"});
        LogisticTrainConfig cfg;
        cfg.lr = t.value("lr", cfg.lr);
        cfg.epochs = t.value("epochs", cfg.epochs);
        cfg.l2 = t.value("l2", cfg.l2);
        cfg.seed = seed;
        parts.model = train_logistic(*parts.dataset, cfg);
      } else {
        fail(Errc::config_error, "unknown trainable model kind \"" + kind + "\"");
      }
    } else if (m.is_object() && m.contains("bayes")) {
      check_keys(m, "model reference", {"bayes"});
      check_keys(m["bayes"], "bayes model", {"regression"});
      require(parts.joint.has_value(), Errc::config_error, "bayes model needs a joint");
      parts.model = m["bayes"].value("regression", false)
                        ? bayes_regressor(*parts.joint)
                        : bayes_predictor(*parts.joint);
    } else {
      parts.model = model_from_json(m);
    }
  }
  return parts;
}

}  // namespace

BuiltRun build_run(const json& config, const std::filesystem::path& base_dir,
                   std::optional<std::uint64_t> seed_override) {
  check_keys(config, "run config",
             {"version", "seed", "model", "dataset", "joint", "removal", "behavior", "summary",
              "output"});
  require(config.contains("version"), Errc::config_error, "config needs a \"version\" field");
  require(config["version"].get<int>() == 1, Errc::config_error,
          "unsupported config version (expected 1)");
  BuiltRun run;
  run.seed = seed_override.value_or(config.value("seed", std::uint64_t{0}));
  const RunParts parts = parts_from_json(config, base_dir, run.seed);
  require(config.contains("removal"), Errc::config_error, "config needs \"removal\"");
  require(config.contains("behavior"), Errc::config_error, "config needs \"behavior\"");
  require(config.contains("summary"), Errc::config_error, "config needs \"summary\"");
  run.subset_function = removal_from_json(config["removal"], parts, run.seed, base_dir);
  run.behavior = behavior_from_json(config["behavior"], parts);
  run.summary = summary_from_json(config["summary"], run.seed);
  run.summary.estimator.master_seed = run.seed;
  run.output_path = config.value("output", "");

  // Cross-validate dimensions between behavior inputs and the subset function.
  const int d = run.subset_function.d;
  if (const auto* b = std::get_if<PredictionBehavior>(&run.behavior)) {
    require(static_cast<int>(b->x.size()) == d, Errc::config_error,
            "behavior x has wrong dimension");
  }
  return run;
}

json execute_run(const BuiltRun& run, const json& config_echo) {
  const Game game = make_game(run.subset_function, run.behavior);
  json result;
  std::uint64_t evals = 0;
  const SummarySpec& s = run.summary;
  using K = SummarySpec::Kind;
  switch (s.kind) {
    case K::shapley:
      if (s.sampled) {
        const auto e = shapley_sampled(game, s.estimator);
        result = estimate_to_json(e);
        evals = e.n_game_evaluations;
      } else {
        const auto a = shapley_exact(game);
        result = attribution_to_json(a);
        evals = a.n_evaluations;
      }
      break;
    case K::banzhaf:
      if (s.sampled) {
        const auto e = banzhaf_sampled(game, s.estimator);
        result = estimate_to_json(e);
        evals = e.n_game_evaluations;
      } else {
        const auto a = banzhaf_exact(game);
        result = attribution_to_json(a);
        evals = a.n_evaluations;
      }
      break;
    case K::mean_when_included:
      if (s.sampled) {
        const auto e = mean_when_included_sampled(game, s.estimator);
        result = estimate_to_json(e);
        evals = e.n_game_evaluations;
      } else {
        const auto a = mean_when_included_exact(game);
        result = attribution_to_json(a);
        evals = a.n_evaluations;
      }
      break;
    case K::remove_individual: {
      const auto a = remove_individual(game);
      result = attribution_to_json(a);
      evals = a.n_evaluations;
      break;
    }
    case K::include_individual: {
      const auto a = include_individual(game);
      result = attribution_to_json(a);
      evals = a.n_evaluations;
      break;
    }
    case K::wls:
      if (s.sampled) {
        const auto e = wls_sampled(game, s.kernel, s.estimator);
        result = estimate_to_json(e);
        evals = e.n_game_evaluations;
      } else {
        const auto a = wls_fit(game, s.kernel, s.regularizer);
        result = attribution_to_json(a);
        evals = a.n_evaluations;
      }
      break;
    case K::select_low_value: {
      const auto r = select_low_value(game, s.lambda);
      result = selection_to_json(r, game.d);
      evals = r.n_evaluations;
      break;
    }
    case K::select_min_size: {
      const auto r = select_min_size(game, s.threshold);
      result = selection_to_json(r, game.d);
      evals = r.n_evaluations;
      break;
    }
    case K::select_min_size_greedy: {
      const auto r = select_min_size_greedy(game, s.threshold);
      result = selection_to_json(r, game.d);
      evals = r.n_evaluations;
      break;
    }
    case K::select_fixed_size: {
      const auto r = select_fixed_size(game, s.k);
      result = selection_to_json(r, game.d);
      evals = r.n_evaluations;
      break;
    }
    case K::select_regularized: {
      const auto r = select_regularized(game, s.lambda);
      result = selection_to_json(r, game.d);
      evals = r.n_evaluations;
      break;
    }
    case K::select_partition: {
      const auto r = select_partition(game, s.gamma, s.lambda);
      result = selection_to_json(r, game.d);
      evals = r.n_evaluations;
      break;
    }
  }
  json out;
  out["result"] = result;
  out["provenance"] = {{"config", config_echo},
                       {"engine_version", "0.1.0"},
                       {"n_evaluations", evals},
                       {"timestamp", static_cast<std::uint64_t>(std::time(nullptr))}};
  return out;
}

GridReport run_grid_from_json(const json& spec, const std::filesystem::path& base_dir) {
  check_keys(spec, "grid spec",
             {"version", "seed", "threads", "model", "dataset", "joint", "removals", "behaviors",
              "summaries"});
  require(spec.contains("version") && spec["version"].get<int>() == 1, Errc::config_error,
          "grid spec needs \"version\": 1");
  const std::uint64_t seed = spec.value("seed", std::uint64_t{0});
  const RunParts parts = parts_from_json(spec, base_dir, seed);
  GridSpec grid;
  grid.threads = spec.value("threads", 1);
  require(spec.contains("removals") && spec.contains("behaviors") && spec.contains("summaries"),
          Errc::config_error, "grid spec needs removals, behaviors and summaries arrays");
  for (const auto& r : spec["removals"]) {
    require(r.contains("name"), Errc::config_error, "grid removal entries need a \"name\"");
    json body = r;
    body.erase("name");
    grid.removals.emplace_back(r["name"].get<std::string>(),
                               removal_from_json(body, parts, seed, base_dir));
  }
  for (const auto& b : spec["behaviors"]) {
    require(b.contains("name"), Errc::config_error, "grid behavior entries need a \"name\"");
    json body = b;
    body.erase("name");
    grid.behaviors.emplace_back(b["name"].get<std::string>(), behavior_from_json(body, parts));
  }
  for (const auto& s : spec["summaries"]) {
    require(s.contains("name"), Errc::config_error, "grid summary entries need a \"name\"");
    json body = s;
    body.erase("name");
    SummarySpec sum = summary_from_json(body, seed);
    sum.estimator.master_seed = seed;
    grid.summaries.emplace_back(s["name"].get<std::string>(), sum);
  }
  return run_grid(grid);
}

CurveResult run_curve_from_json(const json& config, const std::filesystem::path& base_dir) {
  check_keys(config, "curve config",
             {"version", "seed", "model", "dataset", "joint", "removal", "behavior", "ranking",
              "direction", "insertion_from_empty", "truncate_after"});
  require(config.contains("version") && config["version"].get<int>() == 1, Errc::config_error,
          "curve config needs \"version\": 1");
  const std::uint64_t seed = config.value("seed", std::uint64_t{0});
  const RunParts parts = parts_from_json(config, base_dir, seed);
  const SubsetFunction f = removal_from_json(config.at("removal"), parts, seed, base_dir);
  const BehaviorSpec behavior = behavior_from_json(config.at("behavior"), parts);
  require(config.contains("ranking"), Errc::config_error, "curve config needs a ranking");
  std::vector<int> ranking;
  for (const auto& e : config["ranking"]) ranking.push_back(e.get<int>() - 1);  // 1-based files
  const std::string direction = config.value("direction", "deletion");
  require(direction == "deletion" || direction == "insertion", Errc::config_error,
          "direction must be deletion or insertion");
  return removal_curve(make_game(f, behavior), ranking,
                       direction == "deletion" ? CurveDirection::deletion
                                               : CurveDirection::insertion,
                       config.value("insertion_from_empty", false),
                       config.value("truncate_after", -1));
}

}  // namespace remex
