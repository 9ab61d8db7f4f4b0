#include "remex/removal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "remex/numeric.hpp"
#include "remex/rng.hpp"

namespace remex {

namespace {

// Per-call seed for Monte Carlo draws: depends on the master seed, the
// mask bits, and the kept coordinates only. Held-out coordinates must not
// enter, otherwise Definition-1 invariance would fail.
std::uint64_t call_seed(std::uint64_t master, const Eigen::VectorXd& x, Mask s) {
  std::uint64_t h = hash_u64(master, s.bits());
  h = hash_u64(h, static_cast<std::uint64_t>(s.dim()));
  for (int j : s.members()) h = hash_double(h, x[j]);
  return h;
}

// Replacement draws depend on all of x by construction.
std::uint64_t call_seed_full(std::uint64_t master, const Eigen::VectorXd& x, Mask s) {
  std::uint64_t h = hash_u64(master, s.bits());
  for (int j = 0; j < x.size(); ++j) h = hash_double(h, x[j]);
  return h;
}

struct WeightedMean {
  std::vector<NeumaierSum> acc;
  NeumaierSum weight;

  void add(const Eigen::VectorXd& v, double w) {
    if (acc.empty()) acc.resize(static_cast<std::size_t>(v.size()));
    for (int k = 0; k < v.size(); ++k) acc[static_cast<std::size_t>(k)].add(w * v[k]);
    weight.add(w);
  }

  Eigen::VectorXd mean() const {
    Eigen::VectorXd out(static_cast<int>(acc.size()));
    const double z = weight.total();
    for (std::size_t k = 0; k < acc.size(); ++k) out[static_cast<int>(k)] = acc[k].total() / z;
    return out;
  }
};

}  // namespace

SubsetFunction extend_default(const ModelPtr& model, const Eigen::VectorXd& reference) {
  const int d = model->input_dim();
  require(static_cast<int>(reference.size()) == d, Errc::dimension_mismatch,
          "reference vector length != model input dimension");
  SubsetFunction f;
  f.d = d;
  f.output_dim = model->output_dim();
  f.name = "default";
  Eigen::VectorXd r = reference;
  f.fn = [model, r](const Eigen::VectorXd& x, Mask s) {
    Eigen::VectorXd z = r;
    for (int j : s.members()) z[j] = x[j];
    return model->predict(z);
  };
  return f;
}

SubsetFunction extend_zeros(const ModelPtr& model, int d) {
  auto f = extend_default(model, Eigen::VectorXd::Zero(d));
  f.name = "zeros";
  return f;
}

SubsetFunction extend_monte_carlo(const ModelPtr& model, McStrategy strategy,
                                  const Dataset& background, const McOptions& options) {
  require(background.n() >= 1, Errc::empty_background, "background dataset is empty");
  require(options.n_samples >= 1, Errc::config_error, "n_samples must be >= 1");
  const int d = model->input_dim();
  require(background.d() == d, Errc::dimension_mismatch,
          "background feature count != model input dimension");

  SubsetFunction f;
  f.d = d;
  f.output_dim = model->output_dim();

  // Shared precomputation per strategy.
  auto bg = std::make_shared<const Dataset>(background);

  switch (strategy) {
    case McStrategy::marginal_joint: {
      f.name = "marginal-joint";
      const auto opt = options;
      f.fn = [model, bg, opt, d](const Eigen::VectorXd& x, Mask s) {
        if (s.all()) return model->predict(x);
        Eigen::VectorXd z(d);
        WeightedMean out;
        if (opt.exact) {
          for (int i = 0; i < bg->n(); ++i) {
            z = bg->x.row(i).transpose();
            for (int j : s.members()) z[j] = x[j];
            out.add(model->predict(z), bg->weight(i));
          }
        } else {
          Rng rng(call_seed(opt.seed, x, s));
          // Weighted backgrounds sample rows proportionally to weight.
          const bool weighted = bg->weights.size() > 0;
          std::vector<double> cum;
          if (weighted) {
            cum.resize(static_cast<std::size_t>(bg->n()));
            double acc = 0;
            for (int i = 0; i < bg->n(); ++i) {
              acc += bg->weight(i);
              cum[static_cast<std::size_t>(i)] = acc;
            }
          }
          for (int k = 0; k < opt.n_samples; ++k) {
            int row;
            if (weighted) {
              const double u = rng.unit() * cum.back();
              row = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
              row = std::min(row, bg->n() - 1);
            } else {
              row = static_cast<int>(rng.index(static_cast<std::uint64_t>(bg->n())));
            }
            z = bg->x.row(row).transpose();
            for (int j : s.members()) z[j] = x[j];
            out.add(model->predict(z), 1.0);
          }
        }
        return out.mean();
      };
      return f;
    }

    case McStrategy::product_of_marginals: {
      f.name = "product-of-marginals";
      auto supports = std::make_shared<std::vector<ValueSupport>>();
      for (int j = 0; j < d; ++j) supports->push_back(feature_support(background, j));
      const auto opt = options;
      f.fn = [model, supports, opt, d](const Eigen::VectorXd& x, Mask s) {
        if (s.all()) return model->predict(x);
        const auto held = s.complement().members();
        if (opt.exact) {
          std::size_t cells = 1;
          for (int j : held) {
            cells *= (*supports)[static_cast<std::size_t>(j)].values.size();
            require(cells <= opt.support_cap, Errc::support_too_large,
                    "product-of-marginals exact support exceeds cap");
          }
          Eigen::VectorXd z = x;
          WeightedMean out;
          std::vector<std::size_t> idx(held.size(), 0);
          while (true) {
            double w = 1.0;
            for (std::size_t t = 0; t < held.size(); ++t) {
              const auto& sup = (*supports)[static_cast<std::size_t>(held[t])];
              z[held[t]] = sup.values[idx[t]];
              w *= sup.weights[idx[t]];
            }
            out.add(model->predict(z), w);
            std::size_t t = 0;
            for (; t < held.size(); ++t) {
              if (++idx[t] < (*supports)[static_cast<std::size_t>(held[t])].values.size()) break;
              idx[t] = 0;
            }
            if (t == held.size()) break;
          }
          return out.mean();
        }
        Rng rng(call_seed(opt.seed, x, s));
        Eigen::VectorXd z = x;
        WeightedMean out;
        for (int k = 0; k < opt.n_samples; ++k) {
          for (int j : held) {
            const auto& sup = (*supports)[static_cast<std::size_t>(j)];
            const double u = rng.unit();
            double acc = 0;
            std::size_t pick = sup.values.size() - 1;
            for (std::size_t t = 0; t < sup.values.size(); ++t) {
              acc += sup.weights[t];
              if (u < acc) {
                pick = t;
                break;
              }
            }
            z[j] = sup.values[pick];
          }
          out.add(model->predict(z), 1.0);
        }
        return out.mean();
      };
      return f;
    }

    case McStrategy::uniform: {
      f.name = "uniform";
      struct Bound {
        bool categorical;
        int card;
        double lo, hi;
      };
      auto bounds = std::make_shared<std::vector<Bound>>();
      for (int j = 0; j < d; ++j) {
        const auto kind = background.kind(j);
        if (kind.type == FeatureType::categorical) {
          bounds->push_back({true, kind.cardinality, 0, 0});
        } else {
          const auto [lo, hi] = feature_range(background, j);
          bounds->push_back({false, 0, lo, hi});
        }
      }
      const auto opt = options;
      f.fn = [model, bounds, opt, d](const Eigen::VectorXd& x, Mask s) {
        if (s.all()) return model->predict(x);
        const auto held = s.complement().members();
        if (opt.exact) {
          std::size_t cells = 1;
          for (int j : held) {
            require((*bounds)[static_cast<std::size_t>(j)].categorical, Errc::support_too_large,
                    "uniform exact mode requires categorical held-out features");
            cells *= static_cast<std::size_t>((*bounds)[static_cast<std::size_t>(j)].card);
            require(cells <= opt.support_cap, Errc::support_too_large,
                    "uniform exact support exceeds cap");
          }
          Eigen::VectorXd z = x;
          WeightedMean out;
          std::vector<int> idx(held.size(), 0);
          while (true) {
            for (std::size_t t = 0; t < held.size(); ++t) z[held[t]] = idx[t];
            out.add(model->predict(z), 1.0);
            std::size_t t = 0;
            for (; t < held.size(); ++t) {
              if (++idx[t] < (*bounds)[static_cast<std::size_t>(held[t])].card) break;
              idx[t] = 0;
            }
            if (t == held.size()) break;
          }
          return out.mean();
        }
        Rng rng(call_seed(opt.seed, x, s));
        Eigen::VectorXd z = x;
        WeightedMean out;
        for (int k = 0; k < opt.n_samples; ++k) {
          for (int j : held) {
            const auto& b = (*bounds)[static_cast<std::size_t>(j)];
            z[j] = b.categorical
                       ? static_cast<double>(rng.index(static_cast<std::uint64_t>(b.card)))
                       : rng.uniform(b.lo, b.hi);
          }
          out.add(model->predict(z), 1.0);
        }
        return out.mean();
      };
      return f;
    }

    case McStrategy::replacement_categorical: {
      f.name = "replacement-categorical";
      f.invariant = false;  // depends on held-out x_i through q_{x_i}
      for (int j = 0; j < d; ++j) {
        require(background.kind(j).type == FeatureType::categorical, Errc::kind_mismatch,
                "replacement distributions are implemented for categorical features only");
      }
      auto supports = std::make_shared<std::vector<ValueSupport>>();
      for (int j = 0; j < d; ++j) supports->push_back(feature_support(background, j));
      const auto opt = options;
      f.fn = [model, supports, opt, d](const Eigen::VectorXd& x, Mask s) {
        if (s.all()) return model->predict(x);
        const auto held = s.complement().members();
        // Per held-out feature: renormalized support excluding x_i.
        std::vector<ValueSupport> repl(held.size());
        for (std::size_t t = 0; t < held.size(); ++t) {
          const auto& sup = (*supports)[static_cast<std::size_t>(held[t])];
          double z = 0;
          for (std::size_t v = 0; v < sup.values.size(); ++v) {
            if (sup.values[v] != x[held[t]]) z += sup.weights[v];
          }
          require(z > 0.0, Errc::empty_background,
                  "replacement distribution has empty support for feature " +
                      std::to_string(held[t] + 1));
          for (std::size_t v = 0; v < sup.values.size(); ++v) {
            if (sup.values[v] == x[held[t]]) continue;
            repl[t].values.push_back(sup.values[v]);
            repl[t].weights.push_back(sup.weights[v] / z);
          }
        }
        if (opt.exact) {
          std::size_t cells = 1;
          for (const auto& r : repl) {
            cells *= r.values.size();
            require(cells <= opt.support_cap, Errc::support_too_large,
                    "replacement exact support exceeds cap");
          }
          Eigen::VectorXd z = x;
          WeightedMean out;
          std::vector<std::size_t> idx(held.size(), 0);
          while (true) {
            double w = 1.0;
            for (std::size_t t = 0; t < held.size(); ++t) {
              z[held[t]] = repl[t].values[idx[t]];
              w *= repl[t].weights[idx[t]];
            }
            out.add(model->predict(z), w);
            std::size_t t = 0;
            for (; t < held.size(); ++t) {
              if (++idx[t] < repl[t].values.size()) break;
              idx[t] = 0;
            }
            if (t == held.size()) break;
          }
          return out.mean();
        }
        Rng rng(call_seed_full(opt.seed, x, s));
        Eigen::VectorXd z = x;
        WeightedMean out;
        for (int k = 0; k < opt.n_samples; ++k) {
          for (std::size_t t = 0; t < held.size(); ++t) {
            const double u = rng.unit();
            double acc = 0;
            std::size_t pick = repl[t].values.size() - 1;
            for (std::size_t v = 0; v < repl[t].values.size(); ++v) {
              acc += repl[t].weights[v];
              if (u < acc) {
                pick = v;
                break;
              }
            }
            z[held[t]] = repl[t].values[pick];
          }
          out.add(model->predict(z), 1.0);
        }
        return out.mean();
      };
      return f;
    }
  }
  fail(Errc::config_error, "unknown Monte Carlo strategy");
}

SubsetFunction extend_conditional_empirical(const ModelPtr& model, const Dataset& background,
                                            MatchFallback fallback) {
  require(background.n() >= 1, Errc::empty_background, "background dataset is empty");
  const int d = model->input_dim();
  require(background.d() == d, Errc::dimension_mismatch,
          "background feature count != model input dimension");
  auto bg = std::make_shared<const Dataset>(background);
  SubsetFunction f;
  f.d = d;
  f.output_dim = model->output_dim();
  f.name = "conditional-empirical";
  f.fn = [model, bg, fallback, d](const Eigen::VectorXd& x, Mask s) {
    if (s.all()) return model->predict(x);
    Eigen::VectorXd z(d);
    WeightedMean out;
    for (int i = 0; i < bg->n(); ++i) {
      bool match = true;
      for (int j : s.members()) {
        if (bg->x(i, j) != x[j]) {
          match = false;
          break;
        }
      }
      if (!match) continue;
      z = bg->x.row(i).transpose();
      for (int j : s.members()) z[j] = x[j];
      out.add(model->predict(z), bg->weight(i));
    }
    if (out.weight.total() <= 0.0) {
      if (fallback == MatchFallback::error) {
        fail(Errc::no_matching_rows, "no background rows agree with x on " + s.to_string());
      }
      for (int i = 0; i < bg->n(); ++i) {
        z = bg->x.row(i).transpose();
        for (int j : s.members()) z[j] = x[j];
        out.add(model->predict(z), bg->weight(i));
      }
    }
    return out.mean();
  };
  return f;
}

SubsetFunction extend_conditional_exact(const ModelPtr& model, const DiscreteJoint& joint) {
  const int d = joint.d();
  require(model->input_dim() == d, Errc::dimension_mismatch,
          "model input dimension != joint dimension");
  SubsetFunction f;
  f.d = d;
  f.output_dim = model->output_dim();
  f.name = "conditional-exact";
  auto j = std::make_shared<const DiscreteJoint>(joint);
  f.fn = [model, j](const Eigen::VectorXd& x, Mask s) {
    if (s.all()) return model->predict(x);
    return j->conditional_expectation(x, s,
                                      [&](const Eigen::VectorXd& z) { return model->predict(z); });
  };
  return f;
}

SubsetFunction bayes_subset_predictor(const DiscreteJoint& joint) {
  SubsetFunction f;
  f.d = joint.d();
  f.output_dim = joint.classes();
  f.name = "bayes-subset";
  auto j = std::make_shared<const DiscreteJoint>(joint);
  f.fn = [j](const Eigen::VectorXd& x, Mask s) { return j->class_given_subset(x, s); };
  return f;
}

SubsetFunction bayes_subset_regressor(const DiscreteJoint& joint) {
  SubsetFunction f;
  f.d = joint.d();
  f.output_dim = 1;
  f.name = "bayes-subset-regression";
  auto j = std::make_shared<const DiscreteJoint>(joint);
  f.fn = [j](const Eigen::VectorXd& x, Mask s) {
    const Eigen::VectorXd cond = j->class_given_subset(x, s);
    Eigen::VectorXd out(1);
    double e = 0.0;
    for (int y = 0; y < j->classes(); ++y) e += static_cast<double>(y) * cond[y];
    out[0] = e;
    return out;
  };
  return f;
}

SubsetFunction extend_separate_models(const SeparateModelsTrainer& trainer, const Dataset& data) {
  const int d = data.d();
  check_exhaustive_dim(d, 12);
  require(data.has_labels(), Errc::kind_mismatch, "separate models need labeled data");

  auto models = std::make_shared<std::vector<ModelPtr>>();
  models->resize(std::size_t{1} << d);
  for (const Mask& s : enumerate_subsets(d)) {
    Dataset sub;
    const auto cols = s.members();
    sub.x.resize(data.n(), static_cast<int>(cols.size()));
    for (std::size_t t = 0; t < cols.size(); ++t) sub.x.col(static_cast<int>(t)) = data.x.col(cols[t]);
    sub.y_reg = data.y_reg;
    sub.y_class = data.y_class;
    sub.classes = data.classes;
    sub.weights = data.weights;
    for (int j : cols) {
      if (!data.kinds.empty()) sub.kinds.push_back(data.kinds[static_cast<std::size_t>(j)]);
    }
    ModelPtr m;
    if (trainer.kind == SeparateModelsTrainer::Kind::linear) {
      m = train_linear(sub, trainer.ridge);
    } else {
      m = train_logistic(sub, trainer.logistic);
    }
    (*models)[s.bits()] = m;
  }

  SubsetFunction f;
  f.d = d;
  f.output_dim = (*models)[0]->output_dim();
  f.name = "separate-models";
  f.fn = [models](const Eigen::VectorXd& x, Mask s) {
    const auto cols = s.members();
    Eigen::VectorXd z(static_cast<int>(cols.size()));
    for (std::size_t t = 0; t < cols.size(); ++t) z[static_cast<int>(t)] = x[cols[t]];
    return (*models)[s.bits()]->predict(z);
  };
  return f;
}

SubsetFunction wrap_masked(const MaskedPtr& predictor) {
  SubsetFunction f;
  f.d = predictor->features();
  f.output_dim = predictor->output_dim();
  f.name = "masked";
  f.fn = [predictor](const Eigen::VectorXd& x, Mask s) { return predictor->predict_masked(x, s); };
  return f;
}

}  // namespace remex
