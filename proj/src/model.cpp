#include "remex/model.hpp"

#include <cmath>

#include "remex/numeric.hpp"
#include "remex/rng.hpp"

namespace remex {

Eigen::VectorXd LogisticModel::predict(const Eigen::VectorXd& x) const {
  require(x.size() == w_.cols(), Errc::dimension_mismatch, "logistic model input dimension");
  Eigen::VectorXd logits = w_ * x + b_;
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

TableModel::TableModel(std::vector<int> cards, Eigen::MatrixXd outputs, bool classifier)
    : cards_(std::move(cards)), outputs_(std::move(outputs)), classifier_(classifier) {
  std::size_t cells = 1;
  for (int c : cards_) cells *= static_cast<std::size_t>(c);
  require(static_cast<std::size_t>(outputs_.rows()) == cells, Errc::dimension_mismatch,
          "table rows != prod(cards)");
}

Eigen::VectorXd TableModel::predict(const Eigen::VectorXd& x) const {
  require(x.size() == static_cast<int>(cards_.size()), Errc::dimension_mismatch,
          "table model input dimension");
  std::size_t idx = 0;
  for (std::size_t j = 0; j < cards_.size(); ++j) {
    const double v = x[static_cast<int>(j)];
    require(v == std::floor(v) && v >= 0 && v < cards_[j], Errc::index_out_of_range,
            "table model input outside cell range");
    idx = idx * static_cast<std::size_t>(cards_[j]) + static_cast<std::size_t>(v);
  }
  return outputs_.row(static_cast<int>(idx)).transpose();
}

Eigen::VectorXd BayesModel::predict(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd cond = joint_.class_given_subset(x, Mask::full(joint_.d()));
  if (!regression_) return cond;
  Eigen::VectorXd out(1);
  double e = 0.0;
  for (int y = 0; y < joint_.classes(); ++y) e += static_cast<double>(y) * cond[y];
  out[0] = e;
  return out;
}

ModelPtr train_linear(const Dataset& data, double ridge) {
  require(data.n() >= 1, Errc::empty_dataset, "train_linear needs at least one row");
  require(!data.classification() && data.y_reg.size() == data.x.rows(), Errc::kind_mismatch,
          "train_linear needs regression labels");
  require(ridge >= 0.0, Errc::config_error, "ridge must be nonnegative");
  const int n = data.n(), d = data.d();
  Eigen::MatrixXd xa(n, d + 1);
  xa.leftCols(d) = data.x;
  xa.col(d).setOnes();
  if (data.weights.size() > 0) {
    // Weighted least squares: scale rows by sqrt(w).
    for (int i = 0; i < n; ++i) xa.row(i) *= std::sqrt(data.weight(i));
  }
  Eigen::VectorXd y = data.y_reg;
  if (data.weights.size() > 0) {
    for (int i = 0; i < n; ++i) y[i] *= std::sqrt(data.weight(i));
  }
  Eigen::MatrixXd normal = xa.transpose() * xa;
  normal.diagonal().array() += ridge;
  if (ridge == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    lu.setThreshold(1e-10);
    require(lu.isInvertible(), Errc::singular_system,
            "normal matrix is rank-deficient and ridge = 0");
    Eigen::VectorXd w = lu.solve(xa.transpose() * y);
    return std::make_shared<LinearModel>(w.head(d), w[d]);
  }
  Eigen::VectorXd w = normal.ldlt().solve(xa.transpose() * y);
  return std::make_shared<LinearModel>(w.head(d), w[d]);
}

double logistic_stable_lr(const Dataset& data, double l2) {
  require(data.n() >= 1, Errc::empty_dataset, "empty dataset");
  Eigen::MatrixXd xa(data.n(), data.d() + 1);
  xa.leftCols(data.d()) = data.x;
  xa.col(data.d()).setOnes();
  const double lips = 0.5 * xa.squaredNorm() / data.total_weight() + l2;
  return 2.0 / lips;
}

namespace {

double softmax_ce_epoch(const Eigen::MatrixXd& xa, const std::vector<int>& labels,
                        int classes, double l2, const Eigen::VectorXd& row_w, double total_w,
                        const Eigen::MatrixXd& wmat, Eigen::MatrixXd& grad) {
  const int n = static_cast<int>(xa.rows());
  grad.setZero();
  NeumaierSum loss;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd logits = wmat * xa.row(i).transpose();
    const double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    const double z = e.sum();
    Eigen::VectorXd p = e / z;
    const double wi = row_w[i];
    loss.add(-wi * (std::log(clip_low(p[labels[static_cast<std::size_t>(i)]]))));
    p[labels[static_cast<std::size_t>(i)]] -= 1.0;
    grad += (wi / total_w) * p * xa.row(i);
  }
  // l2 applies to the feature weights only, not the bias column.
  for (int c = 0; c < classes; ++c) {
    for (int j = 0; j + 1 < static_cast<int>(xa.cols()); ++j) {
      grad(c, j) += l2 * wmat(c, j);
    }
  }
  return loss.total() / total_w;
}

}  // namespace

ModelPtr train_logistic(const Dataset& data, const LogisticTrainConfig& config) {
  require(data.n() >= 1, Errc::empty_dataset, "train_logistic needs at least one row");
  require(data.classification() && !data.y_class.empty(), Errc::kind_mismatch,
          "train_logistic needs classification labels");
  const int n = data.n(), d = data.d(), c = data.classes;
  Eigen::MatrixXd xa(n, d + 1);
  xa.leftCols(d) = data.x;
  xa.col(d).setOnes();
  Eigen::VectorXd row_w(n);
  for (int i = 0; i < n; ++i) row_w[i] = data.weight(i);
  const double total_w = row_w.sum();

  Eigen::MatrixXd wmat(c, d + 1);
  Rng rng(hash_u64(config.seed, 0x1091u));
  for (int i = 0; i < wmat.size(); ++i) wmat.data()[i] = 0.01 * rng.normal();

  Eigen::MatrixXd grad(c, d + 1);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss =
        softmax_ce_epoch(xa, data.y_class, c, config.l2, row_w, total_w, wmat, grad);
    require(std::isfinite(loss), Errc::non_finite_loss,
            "logistic training diverged at epoch " + std::to_string(epoch));
    wmat -= config.lr * grad;
  }
  return std::make_shared<LogisticModel>(wmat.leftCols(d), wmat.col(d));
}

ModelPtr bayes_predictor(const DiscreteJoint& joint) {
  return std::make_shared<BayesModel>(joint, false);
}

ModelPtr bayes_regressor(const DiscreteJoint& joint) {
  return std::make_shared<BayesModel>(joint, true);
}

}  // namespace remex
