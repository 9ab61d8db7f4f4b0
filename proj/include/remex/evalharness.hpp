#pragma once

#include <map>

#include "remex/behavior.hpp"
#include "remex/estimate.hpp"

namespace remex {

enum class CurveDirection { deletion, insertion };

struct CurveResult {
  std::vector<double> points;  // length d+1, indexed by features removed
  double area = 0.0;           // arithmetic mean of the points
  CurveDirection direction = CurveDirection::deletion;
};

/// Game values while removing features from the full set in the given
/// importance order (most important first). Deletion removes along the
/// ranking; insertion removes the least important first. The optional
/// start-from-empty insertion variant adds most-important features to the
/// empty set instead. truncate_after < 0 keeps all d+1 points; otherwise
/// the curve stops after that many removals.
CurveResult removal_curve(const Game& game, const std::vector<int>& ranking,
                          CurveDirection direction, bool insertion_from_empty = false,
                          int truncate_after = -1);

CurveResult deletion_curve(const SubsetFunction& f, const BehaviorSpec& behavior,
                           const std::vector<int>& ranking);
CurveResult insertion_curve(const SubsetFunction& f, const BehaviorSpec& behavior,
                            const std::vector<int>& ranking, bool from_empty = false);

/// Importance order (most important first) by descending |value|, ties by
/// ascending index.
std::vector<int> ranking_from_attribution(const Eigen::VectorXd& values);

enum class DistanceMetric { euclidean, pearson, spearman };

double explanation_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            DistanceMetric metric);

/// One summary definition for a grid cell (exact, sampled, or selection).
struct SummarySpec {
  enum class Kind {
    shapley,
    banzhaf,
    remove_individual,
    include_individual,
    mean_when_included,
    wls,
    select_low_value,
    select_min_size,
    select_min_size_greedy,
    select_fixed_size,
    select_regularized,
    select_partition
  };
  Kind kind = Kind::shapley;
  bool sampled = false;
  EstimatorConfig estimator;
  WeightingKernel kernel = WeightingKernel::shapley();
  Regularizer regularizer = Regularizer::none();
  double lambda = 0.0;
  double gamma = 0.0;
  double threshold = 0.0;
  int k = 0;

  bool is_selection() const { return kind >= Kind::select_low_value; }
};

struct GridCell {
  std::string removal, behavior, summary;
  bool ok = false;
  std::string error;
  std::optional<AttributionResult> attribution;
  std::optional<EstimateResult> estimate;
  std::optional<SelectionResult> selection;
  double runtime_seconds = 0.0;

  const Eigen::VectorXd* values() const {
    if (attribution) return &attribution->values;
    if (estimate) return &estimate->values;
    return nullptr;
  }
};

struct GridSpec {
  std::vector<std::pair<std::string, SubsetFunction>> removals;
  std::vector<std::pair<std::string, BehaviorSpec>> behaviors;
  std::vector<std::pair<std::string, SummarySpec>> summaries;
  int threads = 1;
};

/// Mean pairwise distances between cells that differ in exactly one axis.
struct AxisDistances {
  std::string axis;  // "summary" or "removal"
  std::vector<std::string> labels;
  Eigen::MatrixXd mean_distance;
};

struct GridReport {
  std::vector<GridCell> cells;
  std::vector<AxisDistances> comparisons;
};

/// Run every removal × behavior × summary combination; per-cell failures
/// are recorded in the report, not thrown.
GridReport run_grid(const GridSpec& spec);

/// Insertion/deletion areas of each explanation under each masking, plus
/// the per-masking ranking of explanations by score
/// (insertion area − deletion area; higher is better).
struct AlignedMetricEntry {
  std::string explanation, masking;
  double insertion_area = 0.0, deletion_area = 0.0, score = 0.0;
  int rank = 0;  // 1 = best under this masking
};

struct AlignedMetricReport {
  std::vector<AlignedMetricEntry> entries;
  std::map<std::string, std::vector<std::string>> ranking_by_masking;
};

/// Behavior builder per masking: the same behavior shape must be evaluated
/// against each masking's own subset function.
AlignedMetricReport aligned_metric_demo(
    const std::vector<std::pair<std::string, AttributionResult>>& explanations,
    const std::vector<std::pair<std::string, SubsetFunction>>& maskings,
    const std::function<BehaviorSpec(const SubsetFunction&)>& behavior_for);

}  // namespace remex
