#include "remex/behavior.hpp"

#include <cmath>

#include "remex/numeric.hpp"

namespace remex {

double LossFn::operator()(const Eigen::VectorXd& prediction, const Target& target) const {
  if (kind == Kind::cross_entropy) {
    if (const int* label = std::get_if<int>(&target)) {
      require(*label >= 0 && *label < prediction.size(), Errc::index_out_of_range,
              "class label outside prediction range");
      return -std::log(clip_low(prediction[*label]));
    }
    if (const Eigen::VectorXd* soft = std::get_if<Eigen::VectorXd>(&target)) {
      require(soft->size() == prediction.size(), Errc::dimension_mismatch,
              "soft target length != prediction length");
      NeumaierSum s;
      for (int k = 0; k < prediction.size(); ++k) {
        if ((*soft)[k] != 0.0) s.add(-(*soft)[k] * std::log(clip_low(prediction[k])));
      }
      return s.total();
    }
    fail(Errc::kind_mismatch, "cross entropy needs a class label or probability vector");
  }
  // MSE
  if (const double* yv = std::get_if<double>(&target)) {
    require(prediction.size() == 1, Errc::kind_mismatch,
            "scalar MSE target against vector prediction");
    const double diff = prediction[0] - *yv;
    return diff * diff;
  }
  if (const Eigen::VectorXd* vec = std::get_if<Eigen::VectorXd>(&target)) {
    require(vec->size() == prediction.size(), Errc::dimension_mismatch,
            "MSE target length != prediction length");
    return (prediction - *vec).squaredNorm();
  }
  if (const int* label = std::get_if<int>(&target)) {
    // Treat a hard label as a one-hot target.
    require(*label >= 0 && *label < prediction.size(), Errc::index_out_of_range,
            "class label outside prediction range");
    Eigen::VectorXd t = Eigen::VectorXd::Zero(prediction.size());
    t[*label] = 1.0;
    return (prediction - t).squaredNorm();
  }
  fail(Errc::kind_mismatch, "unsupported MSE target");
}

double LinkFn::apply(double v) const {
  if (kind == Kind::identity) return v;
  const double p = clip_unit(v);
  return std::log(p) - std::log(1.0 - p);
}

namespace {

double select_output(const Eigen::VectorXd& out, const std::optional<int>& cls, LinkFn link) {
  if (out.size() == 1 && !cls.has_value()) return link.apply(out[0]);
  require(cls.has_value(), Errc::kind_mismatch,
          "multi-output prediction behavior needs an explicit class index");
  require(*cls >= 0 && *cls < out.size(), Errc::index_out_of_range, "class index out of range");
  return link.apply(out[*cls]);
}

Target row_target(const Dataset& data, int row) {
  if (data.classification()) return Target{data.y_class[static_cast<std::size_t>(row)]};
  return Target{data.y_reg[row]};
}

void check_loss_kind(const SubsetFunction& f, LossFn loss) {
  if (loss.kind == LossFn::Kind::cross_entropy) {
    require(f.output_dim >= 2, Errc::kind_mismatch,
            "cross entropy requires a probability-vector output");
  }
}

}  // namespace

double dataset_loss_value(const SubsetFunction& f, const Dataset& data, LossFn loss, Mask s) {
  require(data.n() >= 1, Errc::empty_dataset, "dataset loss over an empty dataset");
  require(data.has_labels(), Errc::kind_mismatch, "dataset loss needs labels");
  NeumaierSum acc;
  NeumaierSum wsum;
  for (int i = 0; i < data.n(); ++i) {
    const double w = data.weight(i);
    if (w == 0.0) continue;
    const Eigen::VectorXd pred = f.eval(data.x.row(i).transpose(), s);
    acc.add(-w * loss(pred, row_target(data, i)));
    wsum.add(w);
  }
  const double value = acc.total() / wsum.total();
  require(std::isfinite(value), Errc::non_finite_value, "dataset loss is not finite");
  return value;
}

Game make_game(const SubsetFunction& f, const BehaviorSpec& spec) {
  const int d = f.d;
  if (const auto* b = std::get_if<PredictionBehavior>(&spec)) {
    require(static_cast<int>(b->x.size()) == d, Errc::dimension_mismatch,
            "behavior input dimension != subset function dimension");
    if (f.output_dim > 1) {
      require(b->cls.has_value(), Errc::kind_mismatch,
              "multi-output prediction behavior needs an explicit class index");
    }
    auto fcopy = f;
    auto bb = *b;
    return Game{d, [fcopy, bb](Mask s) {
                  return select_output(fcopy.eval(bb.x, s), bb.cls, bb.link);
                }};
  }
  if (const auto* b = std::get_if<PredictionLossBehavior>(&spec)) {
    check_loss_kind(f, b->loss);
    auto fcopy = f;
    auto bb = *b;
    return Game{d, [fcopy, bb](Mask s) { return -bb.loss(fcopy.eval(bb.x, s), bb.y); }};
  }
  if (const auto* b = std::get_if<PredictionMeanLossBehavior>(&spec)) {
    check_loss_kind(f, b->loss);
    auto fcopy = f;
    auto bb = *b;
    return Game{d, [fcopy, bb](Mask s) {
                  const Eigen::VectorXd pred = fcopy.eval(bb.x, s);
                  NeumaierSum acc;
                  for (int y = 0; y < bb.label_dist.size(); ++y) {
                    if (bb.label_dist[y] == 0.0) continue;
                    acc.add(-bb.label_dist[y] * bb.loss(pred, Target{y}));
                  }
                  return acc.total();
                }};
  }
  if (const auto* b = std::get_if<DatasetLossBehavior>(&spec)) {
    check_loss_kind(f, b->loss);
    require(b->data && b->data->n() >= 1, Errc::empty_dataset, "dataset behavior without rows");
    require(b->data->d() == d, Errc::dimension_mismatch, "dataset dimension mismatch");
    auto fcopy = f;
    auto bb = *b;
    return Game{d, [fcopy, bb](Mask s) { return dataset_loss_value(fcopy, *bb.data, bb.loss, s); }};
  }
  if (const auto* b = std::get_if<OutputLossBehavior>(&spec)) {
    auto fcopy = f;
    auto bb = *b;
    const Eigen::VectorXd full = f.eval(bb.x, Mask::full(d));
    return Game{d, [fcopy, bb, full](Mask s) {
                  return -bb.loss(fcopy.eval(bb.x, s), Target{full});
                }};
  }
  if (const auto* b = std::get_if<DatasetOutputLossBehavior>(&spec)) {
    require(b->data && b->data->n() >= 1, Errc::empty_dataset, "dataset behavior without rows");
    require(b->data->d() == d, Errc::dimension_mismatch, "dataset dimension mismatch");
    auto fcopy = f;
    auto bb = *b;
    // Full-mask outputs are fixed per row; cache them once.
    auto full = std::make_shared<std::vector<Eigen::VectorXd>>();
    for (int i = 0; i < bb.data->n(); ++i) {
      full->push_back(fcopy.eval(bb.data->x.row(i).transpose(), Mask::full(d)));
    }
    return Game{d, [fcopy, bb, full](Mask s) {
                  NeumaierSum acc;
                  NeumaierSum wsum;
                  for (int i = 0; i < bb.data->n(); ++i) {
                    const double w = bb.data->weight(i);
                    if (w == 0.0) continue;
                    const Eigen::VectorXd pred = fcopy.eval(bb.data->x.row(i).transpose(), s);
                    acc.add(-w * bb.loss(pred, Target{(*full)[static_cast<std::size_t>(i)]}));
                    wsum.add(w);
                  }
                  return acc.total() / wsum.total();
                }};
  }
  fail(Errc::config_error, "unknown behavior spec");
}

double RelationReport::worst() const {
  double w = 0.0;
  for (const auto& [k, v] : max_violation) w = std::max(w, v);
  return w;
}

RelationReport relationship_check(const SubsetFunction& f, const RelationshipInputs& in) {
  RelationReport report;
  const int d = f.d;
  check_exhaustive_dim(d);
  const auto subsets = enumerate_subsets(d);

  // v_xy(S) = −ℓ(u_x(S), y) on raw outputs.
  if (in.y.has_value()) {
    Game vxy = make_game(f, PredictionLossBehavior{in.x, *in.y, in.loss});
    double worst = 0.0;
    for (const Mask& s : subsets) {
      const double direct = vxy.value(s);
      const double recomposed = -in.loss(f.eval(in.x, s), *in.y);
      worst = std::max(worst, std::abs(direct - recomposed));
    }
    report.max_violation["v_xy = -loss(u_x, y)"] = worst;
  }

  // w_x(S) = −ℓ(u_x(S), u_x(D)).
  {
    Game wx = make_game(f, OutputLossBehavior{in.x, in.loss});
    const Eigen::VectorXd full = f.eval(in.x, Mask::full(d));
    double worst = 0.0;
    for (const Mask& s : subsets) {
      const double direct = wx.value(s);
      const double recomposed = -in.loss(f.eval(in.x, s), Target{full});
      worst = std::max(worst, std::abs(direct - recomposed));
    }
    report.max_violation["w_x = -loss(u_x, u_x(D))"] = worst;
  }

  // v_x(S) = E_{q(Y|x)}[v_{xY}(S)].
  if (in.label_dist.has_value()) {
    Game vx = make_game(f, PredictionMeanLossBehavior{in.x, *in.label_dist, in.loss});
    std::vector<Game> per_label;
    for (int y = 0; y < in.label_dist->size(); ++y) {
      per_label.push_back(make_game(f, PredictionLossBehavior{in.x, Target{y}, in.loss}));
    }
    double worst = 0.0;
    for (const Mask& s : subsets) {
      NeumaierSum acc;
      for (int y = 0; y < in.label_dist->size(); ++y) {
        if ((*in.label_dist)[y] == 0.0) continue;
        acc.add((*in.label_dist)[y] * per_label[static_cast<std::size_t>(y)].value(s));
      }
      worst = std::max(worst, std::abs(vx.value(s) - acc.total()));
    }
    report.max_violation["v_x = E_Y[v_xY]"] = worst;
  }

  if (in.data) {
    // v(S) = E_XY[v_XY(S)].
    {
      Game v = make_game(f, DatasetLossBehavior{in.data, in.loss});
      double worst = 0.0;
      for (const Mask& s : subsets) {
        NeumaierSum acc;
        NeumaierSum wsum;
        for (int i = 0; i < in.data->n(); ++i) {
          const double w = in.data->weight(i);
          if (w == 0.0) continue;
          Game vxy = make_game(
              f, PredictionLossBehavior{in.data->x.row(i).transpose(), row_target(*in.data, i),
                                        in.loss});
          acc.add(w * vxy.value(s));
          wsum.add(w);
        }
        worst = std::max(worst, std::abs(v.value(s) - acc.total() / wsum.total()));
      }
      report.max_violation["v = E_XY[v_XY]"] = worst;
    }
    // w(S) = E_X[w_X(S)].
    {
      Game w = make_game(f, DatasetOutputLossBehavior{in.data, in.loss});
      double worst = 0.0;
      for (const Mask& s : subsets) {
        NeumaierSum acc;
        NeumaierSum wsum;
        for (int i = 0; i < in.data->n(); ++i) {
          const double wt = in.data->weight(i);
          if (wt == 0.0) continue;
          Game wx = make_game(f, OutputLossBehavior{in.data->x.row(i).transpose(), in.loss});
          acc.add(wt * wx.value(s));
          wsum.add(wt);
        }
        worst = std::max(worst, std::abs(w.value(s) - acc.total() / wsum.total()));
      }
      report.max_violation["w = E_X[w_X]"] = worst;
    }
  }
  return report;
}

Game variance_explained_game(const SubsetFunction& f, const Dataset& data) {
  require(f.output_dim == 1, Errc::kind_mismatch,
          "variance-explained game needs a scalar output (regression or one probability)");
  auto dd = std::make_shared<const Dataset>(data);
  return make_game(f, DatasetOutputLossBehavior{dd, LossFn::mse()});
}

}  // namespace remex
