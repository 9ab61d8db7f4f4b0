#include "remex/summary.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "remex/numeric.hpp"

namespace remex {

double WeightingKernel::weight(int size, int d) const {
  if ((size == 0 && infinite_at_empty) || (size == d && infinite_at_full)) {
    fail(Errc::config_error, "infinite kernel weight evaluated; use the constraint path");
  }
  const double w = weight_fn(size, d);
  require(w >= 0.0 && std::isfinite(w), Errc::config_error,
          "kernel weights must be finite and nonnegative");
  return w;
}

WeightingKernel WeightingKernel::shapley() {
  WeightingKernel k;
  k.name = "shapley";
  k.infinite_at_empty = true;
  k.infinite_at_full = true;
  k.weight_fn = [](int size, int d) {
    return (d - 1.0) / (binomial(d, size) * size * (d - size));
  };
  return k;
}

WeightingKernel WeightingKernel::banzhaf() {
  WeightingKernel k;
  k.name = "banzhaf";
  k.weight_fn = [](int, int) { return 1.0; };
  return k;
}

WeightingKernel WeightingKernel::include_individual() {
  WeightingKernel k;
  k.name = "include-individual";
  k.weight_fn = [](int size, int) { return size <= 1 ? 1.0 : 0.0; };
  return k;
}

WeightingKernel WeightingKernel::remove_individual() {
  WeightingKernel k;
  k.name = "remove-individual";
  k.weight_fn = [](int size, int d) { return size >= d - 1 ? 1.0 : 0.0; };
  return k;
}

WeightingKernel WeightingKernel::custom(std::function<double(int, int)> fn, bool inf_empty,
                                        bool inf_full, std::string name) {
  WeightingKernel k;
  k.weight_fn = std::move(fn);
  k.infinite_at_empty = inf_empty;
  k.infinite_at_full = inf_full;
  k.name = std::move(name);
  return k;
}

AttributionResult remove_individual(const Game& game) {
  require(game.d >= 1, Errc::dimension_mismatch, "need at least one player");
  AttributionResult out;
  out.method = "remove-individual";
  out.values.resize(game.d);
  const Mask full = Mask::full(game.d);
  const double u_full = game.value(full);
  for (int i = 0; i < game.d; ++i) out.values[i] = u_full - game.value(full.without(i));
  out.n_evaluations = static_cast<std::uint64_t>(game.d) + 1;
  return out;
}

AttributionResult include_individual(const Game& game) {
  require(game.d >= 1, Errc::dimension_mismatch, "need at least one player");
  AttributionResult out;
  out.method = "include-individual";
  out.values.resize(game.d);
  const Mask empty = Mask::empty(game.d);
  const double u_empty = game.value(empty);
  for (int i = 0; i < game.d; ++i) out.values[i] = game.value(empty.with(i)) - u_empty;
  out.n_evaluations = static_cast<std::uint64_t>(game.d) + 1;
  return out;
}

AttributionResult shapley_exact(const Game& game) {
  const int d = game.d;
  check_exhaustive_dim(d);
  const TabulatedGame tab = tabulate(game);
  AttributionResult out;
  out.method = "shapley-exact";
  out.values.resize(d);
  // φ_i = (1/d) Σ_{S ⊆ D∖{i}} C(d−1, |S|)^{-1} (u(S∪{i}) − u(S))
  std::vector<double> w(static_cast<std::size_t>(d), 0.0);
  for (int k = 0; k < d; ++k) w[static_cast<std::size_t>(k)] = 1.0 / (d * binomial(d - 1, k));
  const std::uint64_t n = std::uint64_t{1} << d;
  for (int i = 0; i < d; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    NeumaierSum acc;
    for (std::uint64_t b = 0; b < n; ++b) {
      if (b & bit) continue;
      const int size = std::popcount(b);
      acc.add(w[static_cast<std::size_t>(size)] * (tab.at(b | bit) - tab.at(b)));
    }
    out.values[i] = acc.total();
  }
  out.n_evaluations = n;
  return out;
}

AttributionResult banzhaf_exact(const Game& game) {
  const int d = game.d;
  check_exhaustive_dim(d);
  const TabulatedGame tab = tabulate(game);
  AttributionResult out;
  out.method = "banzhaf-exact";
  out.values.resize(d);
  const std::uint64_t n = std::uint64_t{1} << d;
  const double scale = std::ldexp(1.0, -(d - 1));
  for (int i = 0; i < d; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    NeumaierSum acc;
    for (std::uint64_t b = 0; b < n; ++b) {
      if (b & bit) continue;
      acc.add(tab.at(b | bit) - tab.at(b));
    }
    out.values[i] = scale * acc.total();
  }
  out.n_evaluations = n;
  return out;
}

AttributionResult mean_when_included_exact(const Game& game) {
  const int d = game.d;
  check_exhaustive_dim(d);
  require(d >= 1, Errc::dimension_mismatch, "need at least one player");
  const TabulatedGame tab = tabulate(game);
  AttributionResult out;
  out.method = "mean-when-included";
  out.values.resize(d);
  const std::uint64_t n = std::uint64_t{1} << d;
  const double scale = std::ldexp(1.0, -(d - 1));
  for (int i = 0; i < d; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    NeumaierSum acc;
    for (std::uint64_t b = 0; b < n; ++b) {
      if (b & bit) acc.add(tab.at(b));
    }
    out.values[i] = scale * acc.total();
  }
  out.n_evaluations = n;
  return out;
}

namespace {

struct WlsSystem {
  Eigen::MatrixXd normal;   // (d+1)×(d+1): Σ π z zᵀ with z = (1, 1{i∈S})
  Eigen::VectorXd rhs;      // Σ π u(S) z
  Eigen::MatrixXd cons;     // constraint rows C
  Eigen::VectorXd cons_rhs; // c
};

// Solve min ‖·‖ via the KKT system [A Cᵀ; C 0][β; ν] = [b; c].
Eigen::VectorXd solve_kkt(const WlsSystem& sys) {
  const int p = static_cast<int>(sys.normal.rows());
  const int m = static_cast<int>(sys.cons.rows());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(p + m, p + m);
  kkt.topLeftCorner(p, p) = sys.normal;
  if (m > 0) {
    kkt.topRightCorner(p, m) = sys.cons.transpose();
    kkt.bottomLeftCorner(m, p) = sys.cons;
  }
  Eigen::VectorXd rhs(p + m);
  rhs.head(p) = sys.rhs;
  if (m > 0) rhs.tail(m) = sys.cons_rhs;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  lu.setThreshold(1e-10);
  require(lu.isInvertible(), Errc::singular_system,
          "weighted least squares system is singular on the constrained subspace");
  const Eigen::VectorXd sol = lu.solve(rhs);
  return sol.head(p);
}

AttributionResult wls_from_values(const TabulatedGame& tab, const WeightingKernel& kernel,
                                  const Regularizer& reg) {
  const int d = tab.dim();
  const std::uint64_t n = std::uint64_t{1} << d;
  const double u_empty = tab.at(0);
  const double u_full = tab.at(n - 1);

  if (reg.kind == Regularizer::Kind::l1) {
    require(!kernel.infinite_at_full, Errc::unsupported,
            "l1 regularization does not support the full-set equality constraint");
    // Cyclic coordinate descent on b_i; b_0 closed-form (or pinned).
    std::vector<double> pi(n);
    for (std::uint64_t b = 0; b < n; ++b) {
      const int size = std::popcount(b);
      const bool skip = (size == 0 && kernel.infinite_at_empty);
      pi[b] = skip ? 0.0 : kernel.weight(size, d);
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    double b0 = kernel.infinite_at_empty ? u_empty : 0.0;
    std::vector<double> fit(n, 0.0);  // b0 + Σ_{i∈S} b_i
    for (std::uint64_t b = 0; b < n; ++b) fit[b] = b0;
    double pi_total = 0.0;
    for (std::uint64_t b = 0; b < n; ++b) pi_total += pi[b];
    require(pi_total > 0.0, Errc::singular_system, "kernel gives zero weight everywhere");

    const double tol = 1e-10;
    const int max_sweeps = 100000;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      double max_change = 0.0;
      if (!kernel.infinite_at_empty) {
        NeumaierSum acc;
        for (std::uint64_t b = 0; b < n; ++b) {
          if (pi[b] > 0.0) acc.add(pi[b] * (tab.at(b) - (fit[b] - b0)));
        }
        const double nb0 = acc.total() / pi_total;
        const double delta = nb0 - b0;
        if (delta != 0.0) {
          for (std::uint64_t b = 0; b < n; ++b) fit[b] += delta;
          b0 = nb0;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      for (int i = 0; i < d; ++i) {
        const std::uint64_t bit = std::uint64_t{1} << i;
        double denom = 0.0;
        NeumaierSum num;
        for (std::uint64_t b = 0; b < n; ++b) {
          if (!(b & bit) || pi[b] == 0.0) continue;
          denom += pi[b];
          num.add(pi[b] * (tab.at(b) - (fit[b] - beta[i])));
        }
        if (denom == 0.0) continue;
        const double rho = num.total();
        double nb;
        const double t = reg.lambda / 2.0;
        if (rho > t) {
          nb = (rho - t) / denom;
        } else if (rho < -t) {
          nb = (rho + t) / denom;
        } else {
          nb = 0.0;
        }
        const double delta = nb - beta[i];
        if (delta != 0.0) {
          for (std::uint64_t b = 0; b < n; ++b) {
            if (b & bit) fit[b] += delta;
          }
          beta[i] = nb;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      if (max_change < tol) {
        AttributionResult out;
        out.method = "wls-" + kernel.name;
        out.values = beta;
        out.intercept = b0;
        out.n_evaluations = n;
        return out;
      }
    }
    fail(Errc::non_convergence, "coordinate descent did not converge in 1e5 sweeps");
  }

  WlsSystem sys;
  sys.normal = Eigen::MatrixXd::Zero(d + 1, d + 1);
  sys.rhs = Eigen::VectorXd::Zero(d + 1);
  for (std::uint64_t b = 0; b < n; ++b) {
    const int size = std::popcount(b);
    if ((size == 0 && kernel.infinite_at_empty) || (size == d && kernel.infinite_at_full)) {
      continue;
    }
    const double w = kernel.weight(size, d);
    if (w == 0.0) continue;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(d + 1);
    z[0] = 1.0;
    for (int i = 0; i < d; ++i) {
      if (b & (std::uint64_t{1} << i)) z[i + 1] = 1.0;
    }
    sys.normal.noalias() += w * z * z.transpose();
    sys.rhs.noalias() += w * tab.at(b) * z;
  }
  if (reg.kind == Regularizer::Kind::l2) {
    for (int i = 1; i <= d; ++i) sys.normal(i, i) += reg.lambda;
  }
  int n_cons = (kernel.infinite_at_empty ? 1 : 0) + (kernel.infinite_at_full ? 1 : 0);
  sys.cons = Eigen::MatrixXd::Zero(n_cons, d + 1);
  sys.cons_rhs = Eigen::VectorXd::Zero(n_cons);
  int row = 0;
  if (kernel.infinite_at_empty) {
    sys.cons(row, 0) = 1.0;
    sys.cons_rhs[row] = u_empty;
    ++row;
  }
  if (kernel.infinite_at_full) {
    sys.cons.row(row).setOnes();
    sys.cons_rhs[row] = u_full;
    ++row;
  }
  const Eigen::VectorXd beta = solve_kkt(sys);
  AttributionResult out;
  out.method = "wls-" + kernel.name;
  out.values = beta.tail(d);
  out.intercept = beta[0];
  out.n_evaluations = n;
  return out;
}

}  // namespace

AttributionResult wls_fit(const Game& game, const WeightingKernel& kernel,
                          const Regularizer& reg) {
  check_exhaustive_dim(game.d);
  require(game.d >= 1, Errc::dimension_mismatch, "need at least one player");
  require(reg.lambda >= 0.0, Errc::config_error, "regularization strength must be >= 0");
  return wls_from_values(tabulate(game), kernel, reg);
}

AttributionResult normalize_attributions(const AttributionResult& a) {
  NeumaierSum total;
  bool any_negative = false;
  for (int i = 0; i < a.values.size(); ++i) {
    total.add(a.values[i]);
    if (a.values[i] < 0.0) any_negative = true;
  }
  const double z = total.total();
  require(z != 0.0, Errc::zero_sum, "attribution values sum to zero");
  AttributionResult out = a;
  out.values /= z;
  out.method = a.method + "-normalized";
  out.negative_input_warning = any_negative;
  return out;
}

namespace {

struct SelectionScan {
  // Minimizes `objective`; tie-break favors smaller cardinality, then the
  // smaller mask integer. tie_broken records whether an exact tie on the
  // objective value appeared.
  double best = std::numeric_limits<double>::infinity();
  Mask best_mask;
  bool tie_broken = false;
  bool any = false;

  void offer(Mask s, double objective) {
    if (!any) {
      best = objective;
      best_mask = s;
      any = true;
      return;
    }
    if (objective < best) {
      best = objective;
      best_mask = s;
    } else if (objective == best) {
      tie_broken = true;
      const bool better_card = s.count() < best_mask.count();
      const bool same_card_smaller = s.count() == best_mask.count() && s.bits() < best_mask.bits();
      if (better_card || same_card_smaller) best_mask = s;
    }
  }
};

}  // namespace

SelectionResult select_low_value(const Game& game, double lambda) {
  check_exhaustive_dim(game.d);
  require(lambda >= 0.0, Errc::config_error, "lambda must be >= 0");
  const TabulatedGame tab = tabulate(game);
  SelectionScan scan;
  for (const Mask& s : enumerate_subsets(game.d)) {
    scan.offer(s, tab.value(s.complement()) + lambda * s.count());
  }
  return {scan.best_mask, scan.best, scan.tie_broken, "select-low-value",
          std::uint64_t{1} << game.d};
}

SelectionResult select_min_size(const Game& game, double threshold) {
  check_exhaustive_dim(game.d);
  const TabulatedGame tab = tabulate(game);
  SelectionScan scan;
  for (const Mask& s : enumerate_subsets(game.d)) {
    if (tab.value(s) >= threshold) scan.offer(s, static_cast<double>(s.count()));
  }
  require(scan.any, Errc::infeasible,
          "no subset reaches the threshold " + std::to_string(threshold));
  return {scan.best_mask, scan.best, scan.tie_broken, "select-min-size",
          std::uint64_t{1} << game.d};
}

SelectionResult select_min_size_greedy(const Game& game, double threshold) {
  const int d = game.d;
  Mask s = Mask::full(d);
  std::uint64_t evals = 1;
  require(game.value(s) >= threshold, Errc::infeasible,
          "even the full set stays below the threshold");
  bool progress = true;
  while (progress && s.count() > 0) {
    progress = false;
    double best_value = -std::numeric_limits<double>::infinity();
    int best_drop = -1;
    for (int i : s.members()) {
      const double v = game.value(s.without(i));
      ++evals;
      // Drop the member whose removal keeps the value highest; ties fall
      // to the smallest index via iteration order.
      if (v >= threshold && v > best_value) {
        best_value = v;
        best_drop = i;
      }
    }
    if (best_drop >= 0) {
      s = s.without(best_drop);
      progress = true;
    }
  }
  return {s, static_cast<double>(s.count()), false, "select-min-size-greedy", evals};
}

SelectionResult select_fixed_size(const Game& game, int k) {
  check_exhaustive_dim(game.d);
  require(k >= 0 && k <= game.d, Errc::index_out_of_range, "k must be in [0, d]");
  const TabulatedGame tab = tabulate(game);
  SelectionScan scan;
  for (const Mask& s : enumerate_subsets(game.d)) {
    if (s.count() == k) scan.offer(s, -tab.value(s));
  }
  return {scan.best_mask, -scan.best, scan.tie_broken, "select-fixed-size",
          std::uint64_t{1} << game.d};
}

SelectionResult select_regularized(const Game& game, double lambda) {
  check_exhaustive_dim(game.d);
  const TabulatedGame tab = tabulate(game);
  SelectionScan scan;
  for (const Mask& s : enumerate_subsets(game.d)) {
    scan.offer(s, -(tab.value(s) - lambda * s.count()));
  }
  return {scan.best_mask, -scan.best, scan.tie_broken, "select-regularized",
          std::uint64_t{1} << game.d};
}

SelectionResult select_partition(const Game& game, double gamma, double lambda) {
  check_exhaustive_dim(game.d);
  const TabulatedGame tab = tabulate(game);
  SelectionScan scan;
  for (const Mask& s : enumerate_subsets(game.d)) {
    const double obj = tab.value(s) - gamma * tab.value(s.complement()) - lambda * s.count();
    scan.offer(s, -obj);
  }
  return {scan.best_mask, -scan.best, scan.tie_broken, "select-partition",
          std::uint64_t{1} << game.d};
}

SelectionResult selection_via_excess(const Game& game, ExcessForm form, double lambda,
                                     double gamma) {
  check_exhaustive_dim(game.d);
  const TabulatedGame tab = tabulate(game);
  const Game cached = tab.as_game();
  SelectionScan scan;
  std::string method;
  switch (form) {
    case ExcessForm::mp: {
      method = "select-excess-mp";
      const Allocation z = Allocation::Constant(game.d, lambda);
      for (const Mask& s : enumerate_subsets(game.d)) {
        scan.offer(s, excess(cached, s.complement(), z));
      }
      break;
    }
    case ExcessForm::invase: {
      method = "select-excess-invase";
      const Allocation z = Allocation::Constant(game.d, lambda);
      for (const Mask& s : enumerate_subsets(game.d)) {
        scan.offer(s, -excess(cached, s, z));
      }
      break;
    }
    case ExcessForm::mm: {
      method = "select-excess-mm";
      const Allocation z = Allocation::Constant(game.d, lambda / (1.0 + gamma));
      for (const Mask& s : enumerate_subsets(game.d)) {
        scan.offer(s, -(excess(cached, s, z) - gamma * excess(cached, s.complement(), z)));
      }
      break;
    }
  }
  const double objective = (form == ExcessForm::mp) ? scan.best : -scan.best;
  return {scan.best_mask, objective, scan.tie_broken, method, std::uint64_t{1} << game.d};
}

}  // namespace remex
