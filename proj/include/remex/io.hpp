#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "remex/evalharness.hpp"

namespace remex {

using json = nlohmann::json;

/// Strict object parsing: any key outside `allowed` is a ConfigError.
/// Silent misconfiguration would invalidate comparisons.
void check_keys(const json& j, const std::string& context,
                std::initializer_list<const char*> allowed);

// ---- game ----
json tabulated_game_to_json(const TabulatedGame& game);
TabulatedGame tabulated_game_from_json(const json& j);

// ---- joint ----
json joint_to_json(const DiscreteJoint& joint);
DiscreteJoint joint_from_json(const json& j);

// ---- models ----
json model_to_json(const PredictModel& model);
ModelPtr model_from_json(const json& j);
json masked_mlp_to_json(const MaskedMlp& mlp);
MaskedPtr masked_mlp_from_json(const json& j);

// ---- datasets ----
/// CSV with a header row; the sidecar schema names the label column and
/// declares categorical features:
///   {"label": "y", "task": "classification", "classes": 2,
///    "categorical": {"x1": 2}, "weight": "w"?}
Dataset load_dataset_csv(const std::filesystem::path& csv_path, const json& schema);
Dataset load_dataset(const std::filesystem::path& csv_path,
                     const std::filesystem::path& schema_path);

// ---- results ----
json attribution_to_json(const AttributionResult& a);
AttributionResult attribution_from_json(const json& j);
json selection_to_json(const SelectionResult& s, int d);
json estimate_to_json(const EstimateResult& e);
json curve_to_json(const CurveResult& c);
std::string curve_to_csv(const CurveResult& c);
json grid_report_to_json(const GridReport& report);
std::string grid_report_to_csv(const GridReport& report);

// ---- run configuration ----
/// A fully parsed and constructed run: the subset function, behavior and
/// summary assembled from a config file. `d` is validated across parts.
struct BuiltRun {
  SubsetFunction subset_function;
  BehaviorSpec behavior;
  SummarySpec summary;
  std::uint64_t seed = 0;
  std::string output_path;
};

/// Parse a RunConfig JSON (strict keys, version field required) and build
/// the pipeline. Paths are resolved relative to `base_dir`.
BuiltRun build_run(const json& config, const std::filesystem::path& base_dir,
                   std::optional<std::uint64_t> seed_override = std::nullopt);

/// Execute a built run and wrap the result with a provenance block.
json execute_run(const BuiltRun& run, const json& config_echo);

/// Parse a grid spec (shared model/dataset/joint plus named removal,
/// behavior, and summary axes) and run it.
GridReport run_grid_from_json(const json& spec, const std::filesystem::path& base_dir);

/// Parse a curve config (run config pieces plus a 1-based ranking and a
/// direction) and evaluate the curve.
CurveResult run_curve_from_json(const json& config, const std::filesystem::path& base_dir);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace remex
