#include "remex/evalharness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "remex/numeric.hpp"

namespace remex {

namespace {

void check_ranking(const std::vector<int>& ranking, int d) {
  require(static_cast<int>(ranking.size()) == d, Errc::invalid_ranking,
          "ranking must list every feature exactly once");
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  for (int r : ranking) {
    require(r >= 0 && r < d, Errc::invalid_ranking, "ranking index out of range");
    require(!seen[static_cast<std::size_t>(r)], Errc::invalid_ranking, "ranking repeats a feature");
    seen[static_cast<std::size_t>(r)] = true;
  }
}

}  // namespace

CurveResult removal_curve(const Game& game, const std::vector<int>& ranking,
                          CurveDirection direction, bool insertion_from_empty,
                          int truncate_after) {
  const int d = game.d;
  check_ranking(ranking, d);
  std::vector<int> order = ranking;
  if (direction == CurveDirection::insertion && !insertion_from_empty) {
    std::reverse(order.begin(), order.end());  // least important removed first
  }
  const int steps = truncate_after < 0 ? d : std::min(d, truncate_after);
  CurveResult out;
  out.direction = direction;
  out.points.reserve(static_cast<std::size_t>(steps) + 1);
  NeumaierSum area;
  Mask s = (direction == CurveDirection::insertion && insertion_from_empty) ? Mask::empty(d)
                                                                            : Mask::full(d);
  out.points.push_back(game.value(s));
  area.add(out.points.back());
  for (int k = 0; k < steps; ++k) {
    const int r = order[static_cast<std::size_t>(k)];
    s = (direction == CurveDirection::insertion && insertion_from_empty) ? s.with(r)
                                                                         : s.without(r);
    out.points.push_back(game.value(s));
    area.add(out.points.back());
  }
  out.area = area.total() / static_cast<double>(steps + 1);
  return out;
}

CurveResult deletion_curve(const SubsetFunction& f, const BehaviorSpec& behavior,
                           const std::vector<int>& ranking) {
  return removal_curve(make_game(f, behavior), ranking, CurveDirection::deletion);
}

CurveResult insertion_curve(const SubsetFunction& f, const BehaviorSpec& behavior,
                            const std::vector<int>& ranking, bool from_empty) {
  return removal_curve(make_game(f, behavior), ranking, CurveDirection::insertion, from_empty);
}

std::vector<int> ranking_from_attribution(const Eigen::VectorXd& values) {
  std::vector<int> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  return order;
}

namespace {

std::vector<double> average_ranks(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> ranks(static_cast<std::size_t>(n));
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[order[static_cast<std::size_t>(j + 1)]] == v[order[static_cast<std::size_t>(i)]]) ++j;
    const double avg = (i + j) / 2.0 + 1.0;  // 1-based average rank for ties
    for (int t = i; t <= j; ++t) ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean(), mb = b.mean();
  const Eigen::VectorXd da = a.array() - ma, db = b.array() - mb;
  const double sa = da.norm(), sb = db.norm();
  require(sa > 0.0 && sb > 0.0, Errc::constant_vector,
          "correlation is undefined for a constant vector");
  return da.dot(db) / (sa * sb);
}

}  // namespace

double explanation_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            DistanceMetric metric) {
  require(a.size() == b.size(), Errc::dimension_mismatch, "explanations differ in length");
  require(a.size() >= 1, Errc::dimension_mismatch, "empty explanations");
  switch (metric) {
    case DistanceMetric::euclidean:
      return (a - b).norm();
    case DistanceMetric::pearson:
      return pearson(a, b);
    case DistanceMetric::spearman: {
      const auto ra = average_ranks(a);
      const auto rb = average_ranks(b);
      Eigen::VectorXd va(a.size()), vb(b.size());
      for (int i = 0; i < a.size(); ++i) {
        va[i] = ra[static_cast<std::size_t>(i)];
        vb[i] = rb[static_cast<std::size_t>(i)];
      }
      return pearson(va, vb);
    }
  }
  fail(Errc::config_error, "unknown distance metric");
}

namespace {

GridCell run_cell(const SubsetFunction& removal, const BehaviorSpec& behavior,
                  const SummarySpec& summary) {
  GridCell cell;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Game game = make_game(removal, behavior);
    using K = SummarySpec::Kind;
    switch (summary.kind) {
      case K::shapley:
        if (summary.sampled) {
          cell.estimate = shapley_sampled(game, summary.estimator);
        } else {
          cell.attribution = shapley_exact(game);
        }
        break;
      case K::banzhaf:
        if (summary.sampled) {
          cell.estimate = banzhaf_sampled(game, summary.estimator);
        } else {
          cell.attribution = banzhaf_exact(game);
        }
        break;
      case K::remove_individual:
        cell.attribution = remove_individual(game);
        break;
      case K::include_individual:
        cell.attribution = include_individual(game);
        break;
      case K::mean_when_included:
        if (summary.sampled) {
          cell.estimate = mean_when_included_sampled(game, summary.estimator);
        } else {
          cell.attribution = mean_when_included_exact(game);
        }
        break;
      case K::wls:
        if (summary.sampled) {
          cell.estimate = wls_sampled(game, summary.kernel, summary.estimator);
        } else {
          cell.attribution = wls_fit(game, summary.kernel, summary.regularizer);
        }
        break;
      case K::select_low_value:
        cell.selection = select_low_value(game, summary.lambda);
        break;
      case K::select_min_size:
        cell.selection = select_min_size(game, summary.threshold);
        break;
      case K::select_min_size_greedy:
        cell.selection = select_min_size_greedy(game, summary.threshold);
        break;
      case K::select_fixed_size:
        cell.selection = select_fixed_size(game, summary.k);
        break;
      case K::select_regularized:
        cell.selection = select_regularized(game, summary.lambda);
        break;
      case K::select_partition:
        cell.selection = select_partition(game, summary.gamma, summary.lambda);
        break;
    }
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  cell.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

AxisDistances compare_axis(const GridReport& report, const GridSpec& spec, bool by_summary) {
  AxisDistances out;
  out.axis = by_summary ? "summary" : "removal";
  if (by_summary) {
    for (const auto& [name, unused] : spec.summaries) out.labels.push_back(name);
  } else {
    for (const auto& [name, unused] : spec.removals) out.labels.push_back(name);
  }
  const int n = static_cast<int>(out.labels.size());
  out.mean_distance = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);

  auto label_index = [&](const std::string& name) {
    for (int i = 0; i < n; ++i) {
      if (out.labels[static_cast<std::size_t>(i)] == name) return i;
    }
    return -1;
  };

  for (const auto& a : report.cells) {
    if (!a.ok || a.values() == nullptr) continue;
    for (const auto& b : report.cells) {
      if (!b.ok || b.values() == nullptr) continue;
      const bool shared = by_summary
                              ? (a.removal == b.removal && a.behavior == b.behavior)
                              : (a.summary == b.summary && a.behavior == b.behavior);
      if (!shared) continue;
      const int i = label_index(by_summary ? a.summary : a.removal);
      const int j = label_index(by_summary ? b.summary : b.removal);
      if (i < 0 || j < 0) continue;
      const double dist = explanation_distance(*a.values(), *b.values(), DistanceMetric::euclidean);
      out.mean_distance(i, j) += dist;
      counts(i, j) += 1.0;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (counts(i, j) > 0) out.mean_distance(i, j) /= counts(i, j);
    }
  }
  return out;
}

}  // namespace

GridReport run_grid(const GridSpec& spec) {
  require(!spec.removals.empty() && !spec.behaviors.empty() && !spec.summaries.empty(),
          Errc::config_error, "grid axes must be nonempty");
  GridReport report;
  struct Job {
    int r, b, s;
  };
  std::vector<Job> jobs;
  for (int r = 0; r < static_cast<int>(spec.removals.size()); ++r) {
    for (int b = 0; b < static_cast<int>(spec.behaviors.size()); ++b) {
      for (int s = 0; s < static_cast<int>(spec.summaries.size()); ++s) {
        jobs.push_back({r, b, s});
      }
    }
  }
  report.cells.resize(jobs.size());
  auto run_one = [&](std::size_t t) {
    const Job& job = jobs[t];
    GridCell cell = run_cell(spec.removals[static_cast<std::size_t>(job.r)].second,
                             spec.behaviors[static_cast<std::size_t>(job.b)].second,
                             spec.summaries[static_cast<std::size_t>(job.s)].second);
    cell.removal = spec.removals[static_cast<std::size_t>(job.r)].first;
    cell.behavior = spec.behaviors[static_cast<std::size_t>(job.b)].first;
    cell.summary = spec.summaries[static_cast<std::size_t>(job.s)].first;
    report.cells[t] = std::move(cell);
  };
  if (spec.threads <= 1) {
    for (std::size_t t = 0; t < jobs.size(); ++t) run_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min<std::size_t>(spec.threads, jobs.size());
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < jobs.size(); t = next.fetch_add(1)) run_one(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  report.comparisons.push_back(compare_axis(report, spec, true));
  report.comparisons.push_back(compare_axis(report, spec, false));
  return report;
}

AlignedMetricReport aligned_metric_demo(
    const std::vector<std::pair<std::string, AttributionResult>>& explanations,
    const std::vector<std::pair<std::string, SubsetFunction>>& maskings,
    const std::function<BehaviorSpec(const SubsetFunction&)>& behavior_for) {
  AlignedMetricReport report;
  for (const auto& [mask_name, mask_f] : maskings) {
    const BehaviorSpec behavior = behavior_for(mask_f);
    const Game game = make_game(mask_f, behavior);
    std::vector<AlignedMetricEntry> entries;
    for (const auto& [expl_name, attribution] : explanations) {
      const auto ranking = ranking_from_attribution(attribution.values);
      AlignedMetricEntry e;
      e.explanation = expl_name;
      e.masking = mask_name;
      e.deletion_area = removal_curve(game, ranking, CurveDirection::deletion).area;
      e.insertion_area = removal_curve(game, ranking, CurveDirection::insertion).area;
      e.score = e.insertion_area - e.deletion_area;
      entries.push_back(e);
    }
    std::vector<int> order(entries.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return entries[static_cast<std::size_t>(a)].score > entries[static_cast<std::size_t>(b)].score;
    });
    std::vector<std::string> ranked;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      entries[static_cast<std::size_t>(order[pos])].rank = static_cast<int>(pos) + 1;
      ranked.push_back(entries[static_cast<std::size_t>(order[pos])].explanation);
    }
    report.ranking_by_masking[mask_name] = ranked;
    for (auto& e : entries) report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace remex
