#include "remex/estimate.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <thread>
#include <unordered_set>
#include <vector>

#include "remex/numeric.hpp"
#include "remex/rng.hpp"

namespace remex {

namespace {

constexpr std::uint64_t kStreamShapley = 0x51;
constexpr std::uint64_t kStreamBanzhaf = 0x52;
constexpr std::uint64_t kStreamMwi = 0x53;
constexpr std::uint64_t kStreamWls = 0x54;
constexpr std::uint64_t kStreamBootstrap = 0x55;

struct Welford {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double dx = x - mean;
    mean += dx / static_cast<double>(n);
    m2 += dx * (x - mean);
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

/// Run fn(sample_index, slot) for `count` samples starting at
/// `first_index`. Slots are pre-indexed, so thread interleaving cannot
/// change any result: parallel equals serial bit for bit.
template <typename F>
void run_indexed(std::uint64_t first_index, int count, int threads, F&& fn) {
  if (threads <= 1 || count < 2) {
    for (int t = 0; t < count; ++t) fn(first_index + static_cast<std::uint64_t>(t), t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, count);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < count; t = next.fetch_add(1)) {
        fn(first_index + static_cast<std::uint64_t>(t), t);
      }
    });
  }
  for (auto& th : pool) th.join();
}

struct ConvergenceState {
  double z;
  double tau;

  /// CI width over range rule; absolute floor 1e-9 catches constant games.
  bool evaluate(const std::vector<Welford>& stats, Eigen::VectorXd* values,
                Eigen::VectorXd* se, Eigen::VectorXd* half) const {
    const int d = static_cast<int>(stats.size());
    values->resize(d);
    se->resize(d);
    half->resize(d);
    bool have_two = true;
    for (int i = 0; i < d; ++i) {
      (*values)[i] = stats[static_cast<std::size_t>(i)].mean;
      (*se)[i] = stats[static_cast<std::size_t>(i)].std_error();
      (*half)[i] = z * (*se)[i];
      if (stats[static_cast<std::size_t>(i)].n < 2) have_two = false;
    }
    if (!have_two) return false;
    if (half->maxCoeff() <= 1e-9) return true;
    const double range = std::max(values->maxCoeff() - values->minCoeff(), 1e-12);
    return 2.0 * half->maxCoeff() / range <= tau;
  }
};

}  // namespace

EstimateResult shapley_sampled(const Game& game, const EstimatorConfig& config) {
  config.validate();
  const int d = game.d;
  require(d >= 1, Errc::dimension_mismatch, "need at least one player");
  const std::uint64_t evals_per_sample = static_cast<std::uint64_t>(d) + 1;
  const ConvergenceState conv{normal_quantile(0.5 + config.confidence / 2.0),
                              config.convergence_threshold};

  std::vector<Welford> stats(static_cast<std::size_t>(d));
  std::vector<Eigen::VectorXd> slots;
  EstimateResult out;
  out.method = "shapley-sampled";
  out.config = config;

  while (true) {
    const std::uint64_t budget_left =
        config.max_evaluations > out.n_game_evaluations
            ? (config.max_evaluations - out.n_game_evaluations) / evals_per_sample
            : 0;
    const int batch = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(config.batch_size), budget_left));
    if (batch == 0) break;
    slots.assign(static_cast<std::size_t>(batch), Eigen::VectorXd());
    run_indexed(out.n_samples, batch, config.threads, [&](std::uint64_t k, int slot) {
      Rng rng(hash_u64(hash_u64(config.master_seed, kStreamShapley), k));
      std::vector<int> order(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
      rng.shuffle(order);
      Eigen::VectorXd mc(d);
      Mask s = Mask::empty(d);
      double prev = game.value(s);
      for (int i : order) {
        s = s.with(i);
        const double cur = game.value(s);
        mc[i] = cur - prev;
        prev = cur;
      }
      slots[static_cast<std::size_t>(slot)] = std::move(mc);
    });
    for (const auto& mc : slots) {
      for (int i = 0; i < d; ++i) stats[static_cast<std::size_t>(i)].add(mc[i]);
    }
    out.n_samples += static_cast<std::uint64_t>(batch);
    out.n_game_evaluations += static_cast<std::uint64_t>(batch) * evals_per_sample;
    if (conv.evaluate(stats, &out.values, &out.std_errors, &out.ci_half_widths)) {
      out.converged = true;
      break;
    }
  }
  conv.evaluate(stats, &out.values, &out.std_errors, &out.ci_half_widths);
  return out;
}

EstimateResult banzhaf_sampled(const Game& game, const EstimatorConfig& config) {
  config.validate();
  const int d = game.d;
  require(d >= 1, Errc::dimension_mismatch, "need at least one player");
  const std::uint64_t evals_per_sample = static_cast<std::uint64_t>(d) + 1;
  const ConvergenceState conv{normal_quantile(0.5 + config.confidence / 2.0),
                              config.convergence_threshold};
  const MaskSampler uniform = MaskSampler::uniform_subsets();

  std::vector<Welford> stats(static_cast<std::size_t>(d));
  std::vector<Eigen::VectorXd> slots;
  EstimateResult out;
  out.method = "banzhaf-sampled";
  out.config = config;

  while (true) {
    const std::uint64_t budget_left =
        config.max_evaluations > out.n_game_evaluations
            ? (config.max_evaluations - out.n_game_evaluations) / evals_per_sample
            : 0;
    const int batch = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(config.batch_size), budget_left));
    if (batch == 0) break;
    slots.assign(static_cast<std::size_t>(batch), Eigen::VectorXd());
    run_indexed(out.n_samples, batch, config.threads, [&](std::uint64_t k, int slot) {
      Rng rng(hash_u64(hash_u64(config.master_seed, kStreamBanzhaf), k));
      const Mask s = uniform.sample(d, rng);
      const double base = game.value(s);
      Eigen::VectorXd mc(d);
      for (int i = 0; i < d; ++i) {
        const double flipped = game.value(s.toggled(i));
        mc[i] = s.contains(i) ? base - flipped : flipped - base;
      }
      slots[static_cast<std::size_t>(slot)] = std::move(mc);
    });
    for (const auto& mc : slots) {
      for (int i = 0; i < d; ++i) stats[static_cast<std::size_t>(i)].add(mc[i]);
    }
    out.n_samples += static_cast<std::uint64_t>(batch);
    out.n_game_evaluations += static_cast<std::uint64_t>(batch) * evals_per_sample;
    if (conv.evaluate(stats, &out.values, &out.std_errors, &out.ci_half_widths)) {
      out.converged = true;
      break;
    }
  }
  conv.evaluate(stats, &out.values, &out.std_errors, &out.ci_half_widths);
  return out;
}

EstimateResult mean_when_included_sampled(const Game& game, const EstimatorConfig& config) {
  config.validate();
  const int d = game.d;
  require(d >= 1, Errc::dimension_mismatch, "need at least one player");
  const ConvergenceState conv{normal_quantile(0.5 + config.confidence / 2.0),
                              config.convergence_threshold};

  std::vector<Welford> stats(static_cast<std::size_t>(d));
  struct Draw {
    std::uint64_t bits;
    double value;
  };
  std::vector<Draw> slots;
  EstimateResult out;
  out.method = "mean-when-included-sampled";
  out.config = config;

  while (true) {
    const std::uint64_t budget_left = config.max_evaluations > out.n_game_evaluations
                                          ? config.max_evaluations - out.n_game_evaluations
                                          : 0;
    const int batch = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(config.batch_size), budget_left));
    if (batch == 0) break;
    slots.assign(static_cast<std::size_t>(batch), Draw{});
    run_indexed(out.n_samples, batch, config.threads, [&](std::uint64_t k, int slot) {
      Rng rng(hash_u64(hash_u64(config.master_seed, kStreamMwi), k));
      Mask s = Mask::empty(d);
      for (int i = 0; i < d; ++i) {
        if (rng.unit() < config.rise_inclusion_p) s = s.with(i);
      }
      slots[static_cast<std::size_t>(slot)] = {s.bits(), game.value(s)};
    });
    for (const auto& draw : slots) {
      for (int i = 0; i < d; ++i) {
        if (draw.bits & (std::uint64_t{1} << i)) stats[static_cast<std::size_t>(i)].add(draw.value);
      }
    }
    out.n_samples += static_cast<std::uint64_t>(batch);
    out.n_game_evaluations += static_cast<std::uint64_t>(batch);
    if (conv.evaluate(stats, &out.values, &out.std_errors, &out.ci_half_widths)) {
      out.converged = true;
      break;
    }
  }
  conv.evaluate(stats, &out.values, &out.std_errors, &out.ci_half_widths);
  return out;
}

namespace {

struct SampledRow {
  std::uint64_t bits;
  double value;
};

/// The kernel-weighted least squares objective restricted to the distinct
/// subsets present in the sample (duplicates collapse; each distinct subset
/// carries its exact weight π(S)). Once the sample covers the support this
/// reproduces the exact WLS solution. Infinite weights become equality
/// constraints as in the exact path.
Eigen::VectorXd fit_sampled_wls(const std::vector<SampledRow>& rows,
                                const std::vector<int>& pick, int d,
                                const WeightingKernel& kernel, double u_empty, double u_full) {
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(d + 1, d + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd z(d + 1);
  std::unordered_set<std::uint64_t> seen;
  for (int idx : pick) {
    const auto& row = rows[static_cast<std::size_t>(idx)];
    if (!seen.insert(row.bits).second) continue;
    const double w = kernel.weight(std::popcount(row.bits), d);
    if (w == 0.0) continue;
    z.setZero();
    z[0] = 1.0;
    for (int i = 0; i < d; ++i) {
      if (row.bits & (std::uint64_t{1} << i)) z[i + 1] = 1.0;
    }
    normal.noalias() += w * z * z.transpose();
    rhs.noalias() += w * row.value * z;
  }
  const int m = (kernel.infinite_at_empty ? 1 : 0) + (kernel.infinite_at_full ? 1 : 0);
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(d + 1 + m, d + 1 + m);
  kkt.topLeftCorner(d + 1, d + 1) = normal;
  Eigen::VectorXd full_rhs(d + 1 + m);
  full_rhs.head(d + 1) = rhs;
  int row_i = 0;
  if (kernel.infinite_at_empty) {
    kkt(d + 1 + row_i, 0) = 1.0;
    kkt(0, d + 1 + row_i) = 1.0;
    full_rhs[d + 1 + row_i] = u_empty;
    ++row_i;
  }
  if (kernel.infinite_at_full) {
    for (int j = 0; j <= d; ++j) {
      kkt(d + 1 + row_i, j) = 1.0;
      kkt(j, d + 1 + row_i) = 1.0;
    }
    full_rhs[d + 1 + row_i] = u_full;
    ++row_i;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  lu.setThreshold(1e-10);
  require(lu.isInvertible(), Errc::singular_system, "sampled WLS system is singular");
  return lu.solve(full_rhs).head(d + 1);
}

/// Point fit plus bootstrap CI; updates `out` and returns true on
/// convergence. A singular point fit leaves `out` untouched (the caller
/// enlarges the sample).
bool fit_and_check(const std::vector<SampledRow>& rows, const std::vector<int>& all_rows, int d,
                   const WeightingKernel& kernel, double u_empty, double u_full,
                   const ConvergenceState& conv, int n_bootstrap, const EstimatorConfig& config,
                   EstimateResult& out) {
  Eigen::VectorXd point;
  try {
    point = fit_sampled_wls(rows, all_rows, d, kernel, u_empty, u_full);
  } catch (const Error& e) {
    if (e.code() == Errc::singular_system) return false;
    throw;
  }
  Eigen::MatrixXd boots(n_bootstrap, d);
  int ok = 0;
  for (int b = 0; b < n_bootstrap; ++b) {
    Rng rng(hash_u64(hash_u64(hash_u64(config.master_seed, kStreamBootstrap),
                              static_cast<std::uint64_t>(b)),
                     out.n_samples));
    std::vector<int> pick(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      pick[i] = static_cast<int>(rng.index(rows.size()));
    }
    try {
      const Eigen::VectorXd beta = fit_sampled_wls(rows, pick, d, kernel, u_empty, u_full);
      boots.row(ok++) = beta.tail(d).transpose();
    } catch (const Error& e) {
      if (e.code() != Errc::singular_system) throw;
    }
  }
  out.values = point.tail(d);
  if (ok < 5) return false;
  out.std_errors.resize(d);
  for (int i = 0; i < d; ++i) {
    const auto col = boots.col(i).head(ok);
    const double mean = col.mean();
    out.std_errors[i] = std::sqrt((col.array() - mean).square().sum() / (ok - 1));
  }
  out.ci_half_widths = conv.z * out.std_errors;
  const double range = std::max(out.values.maxCoeff() - out.values.minCoeff(), 1e-12);
  const bool absolute = out.ci_half_widths.maxCoeff() <= 1e-9;
  if (absolute || 2.0 * out.ci_half_widths.maxCoeff() / range <= conv.tau) {
    out.converged = true;
    return true;
  }
  return false;
}

}  // namespace

EstimateResult wls_sampled(const Game& game, const WeightingKernel& kernel,
                           const EstimatorConfig& config) {
  config.validate();
  const int d = game.d;
  require(d >= 1, Errc::dimension_mismatch, "need at least one player");

  // Sizes the kernel can draw from (constrained sizes are pinned, not drawn).
  std::vector<int> sizes;
  std::vector<double> cum;
  double total = 0.0;
  for (int k = 0; k <= d; ++k) {
    if (k == 0 && kernel.infinite_at_empty) continue;
    if (k == d && kernel.infinite_at_full) continue;
    const double w = kernel.weight(k, d);
    if (w <= 0.0) continue;
    total += w * std::exp(log_binomial(d, k));
    sizes.push_back(k);
    cum.push_back(total);
  }
  require(!sizes.empty(), Errc::config_error, "kernel puts no weight on non-constrained subsets");

  EstimateResult out;
  out.method = "wls-sampled-" + kernel.name;
  out.config = config;

  double u_empty = 0.0, u_full = 0.0;
  if (kernel.infinite_at_empty) {
    u_empty = game.value(Mask::empty(d));
    ++out.n_game_evaluations;
  }
  if (kernel.infinite_at_full) {
    u_full = game.value(Mask::full(d));
    ++out.n_game_evaluations;
  }

  const ConvergenceState conv{normal_quantile(0.5 + config.confidence / 2.0),
                              config.convergence_threshold};
  const int kBootstrap = 20;
  std::vector<SampledRow> rows;
  std::vector<SampledRow> slots;
  std::vector<int> all_rows;
  // Refits cost O(n); checking at geometrically spaced sample counts keeps
  // the total fitting work linear in the final sample count.
  std::uint64_t next_check = 0;

  while (true) {
    const std::uint64_t budget_left = config.max_evaluations > out.n_game_evaluations
                                          ? config.max_evaluations - out.n_game_evaluations
                                          : 0;
    const int batch = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(config.batch_size), budget_left));
    if (batch == 0) break;
    slots.assign(static_cast<std::size_t>(batch), SampledRow{});
    run_indexed(out.n_samples, batch, config.threads, [&](std::uint64_t k, int slot) {
      Rng rng(hash_u64(hash_u64(config.master_seed, kStreamWls), k));
      const double u = rng.unit() * total;
      std::size_t pick = sizes.size() - 1;
      for (std::size_t t = 0; t < cum.size(); ++t) {
        if (u < cum[t]) {
          pick = t;
          break;
        }
      }
      const int size = sizes[pick];
      std::vector<int> idx(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) idx[static_cast<std::size_t>(i)] = i;
      Mask s = Mask::empty(d);
      for (int j = 0; j < size; ++j) {
        const int p = j + static_cast<int>(rng.index(static_cast<std::uint64_t>(d - j)));
        std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(p)]);
        s = s.with(idx[static_cast<std::size_t>(j)]);
      }
      slots[static_cast<std::size_t>(slot)] = {s.bits(), game.value(s)};
    });
    rows.insert(rows.end(), slots.begin(), slots.end());
    out.n_samples += static_cast<std::uint64_t>(batch);
    out.n_game_evaluations += static_cast<std::uint64_t>(batch);
    if (out.n_samples < next_check) continue;
    next_check = out.n_samples + std::max<std::uint64_t>(config.batch_size, out.n_samples / 2);

    all_rows.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) all_rows[i] = static_cast<int>(i);
    if (fit_and_check(rows, all_rows, d, kernel, u_empty, u_full, conv, kBootstrap, config, out)) {
      break;
    }
  }
  if (!out.converged && !rows.empty()) {
    // Final refit so the reported values reflect every drawn sample.
    all_rows.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) all_rows[i] = static_cast<int>(i);
    fit_and_check(rows, all_rows, d, kernel, u_empty, u_full, conv, kBootstrap, config, out);
  }
  require(out.values.size() == d, Errc::singular_system,
          "sampled WLS never produced a solvable system within budget");
  if (out.std_errors.size() != d) {
    out.std_errors = Eigen::VectorXd::Zero(d);
    out.ci_half_widths = Eigen::VectorXd::Zero(d);
  }
  return out;
}

}  // namespace remex
