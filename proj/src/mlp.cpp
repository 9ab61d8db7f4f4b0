#include "remex/mlp.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "remex/numeric.hpp"

namespace remex {

MaskedMlp::MaskedMlp(int d, int out, bool classifier, Eigen::MatrixXd w1, Eigen::VectorXd b1,
                     Eigen::MatrixXd w2, Eigen::VectorXd b2, Eigen::MatrixXd w3,
                     Eigen::VectorXd b3)
    : d_(d),
      out_(out),
      classifier_(classifier),
      w1_(std::move(w1)),
      w2_(std::move(w2)),
      w3_(std::move(w3)),
      b1_(std::move(b1)),
      b2_(std::move(b2)),
      b3_(std::move(b3)) {
  require(w1_.cols() == 2 * d_, Errc::dimension_mismatch, "masked mlp input width");
  require(w3_.rows() == out_, Errc::dimension_mismatch, "masked mlp output width");
}

Eigen::VectorXd MaskedMlp::predict(const Eigen::VectorXd& z) const {
  require(z.size() == 2 * d_, Errc::dimension_mismatch,
          "masked mlp expects (x ⊙ m, m) of length 2d");
  Eigen::VectorXd h1 = (w1_ * z + b1_).array().tanh();
  Eigen::VectorXd h2 = (w2_ * h1 + b2_).array().tanh();
  Eigen::VectorXd out = w3_ * h2 + b3_;
  if (!classifier_) return out;
  const double m = out.maxCoeff();
  Eigen::VectorXd e = (out.array() - m).exp();
  return e / e.sum();
}

Eigen::VectorXd MaskedMlp::predict_masked(const Eigen::VectorXd& x, Mask m) const {
  require(static_cast<int>(x.size()) == d_, Errc::dimension_mismatch, "input dimension");
  require(m.dim() == d_, Errc::dimension_mismatch, "mask dimension");
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * d_);
  for (int j = 0; j < d_; ++j) {
    if (m.contains(j)) {
      z[j] = x[j];
      z[d_ + j] = 1.0;
    }
  }
  return predict(z);
}

namespace {

struct TrainSample {
  Eigen::VectorXd z;       // (x ⊙ m, m)
  Eigen::VectorXd target;  // probability vector or regression value
  double weight;
};

Eigen::VectorXd masked_input(const Eigen::VectorXd& x, Mask m) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * d);
  for (int j = 0; j < d; ++j) {
    if (m.contains(j)) {
      z[j] = x[j];
      z[d + j] = 1.0;
    }
  }
  return z;
}

struct Adam {
  Eigen::MatrixXd m, v;
  explicit Adam(const Eigen::MatrixXd& shape)
      : m(Eigen::MatrixXd::Zero(shape.rows(), shape.cols())),
        v(Eigen::MatrixXd::Zero(shape.rows(), shape.cols())) {}

  template <typename W, typename G>
  void step(W& w, const G& g, double lr, int t) {
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    const Eigen::MatrixXd upd = (lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps)).matrix();
    w -= upd;
  }
};

MaskedPtr train_masked_mlp(const std::vector<TrainSample>& samples, int d, int out,
                           bool classifier, const MlpTrainConfig& config) {
  require(!samples.empty(), Errc::empty_dataset, "no training samples");
  const int h = config.hidden;
  Rng rng(hash_u64(config.seed, 0x3517a9d2u));
  auto init = [&](int rows, int cols) {
    Eigen::MatrixXd w(rows, cols);
    const double scale = std::sqrt(2.0 / static_cast<double>(rows + cols));
    for (int i = 0; i < w.size(); ++i) w.data()[i] = scale * rng.normal();
    return w;
  };
  Eigen::MatrixXd w1 = init(h, 2 * d), w2 = init(h, h), w3 = init(out, h);
  Eigen::VectorXd b1 = Eigen::VectorXd::Zero(h), b2 = Eigen::VectorXd::Zero(h),
                  b3 = Eigen::VectorXd::Zero(out);

  double total_w = 0.0;
  for (const auto& s : samples) total_w += s.weight;
  require(total_w > 0.0, Errc::empty_dataset, "training weights sum to zero");

  Adam a1(w1), a2(w2), a3(w3);
  Adam ab1(b1), ab2(b2), ab3(b3);
  Eigen::MatrixXd g1(h, 2 * d), g2(h, h), g3(out, h);
  Eigen::VectorXd gb1(h), gb2(h), gb3(out);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    g1.setZero();
    g2.setZero();
    g3.setZero();
    gb1.setZero();
    gb2.setZero();
    gb3.setZero();
    double loss = 0.0;
    for (const auto& s : samples) {
      Eigen::VectorXd a1v = w1 * s.z + b1;
      Eigen::VectorXd h1 = a1v.array().tanh();
      Eigen::VectorXd a2v = w2 * h1 + b2;
      Eigen::VectorXd h2 = a2v.array().tanh();
      Eigen::VectorXd o = w3 * h2 + b3;
      const double wi = s.weight / total_w;
      Eigen::VectorXd dout(out);
      if (classifier) {
        const double mx = o.maxCoeff();
        Eigen::VectorXd e = (o.array() - mx).exp();
        Eigen::VectorXd p = e / e.sum();
        for (int k = 0; k < out; ++k) {
          if (s.target[k] > 0.0) loss -= wi * s.target[k] * std::log(clip_low(p[k]));
        }
        dout = wi * (p - s.target);
      } else {
        Eigen::VectorXd diff = o - s.target;
        loss += wi * diff.squaredNorm();
        dout = 2.0 * wi * diff;
      }
      g3 += dout * h2.transpose();
      gb3 += dout;
      Eigen::VectorXd dh2 = (w3.transpose() * dout).array() * (1.0 - h2.array().square());
      g2 += dh2 * h1.transpose();
      gb2 += dh2;
      Eigen::VectorXd dh1 = (w2.transpose() * dh2).array() * (1.0 - h1.array().square());
      g1 += dh1 * s.z.transpose();
      gb1 += dh1;
    }
    require(std::isfinite(loss), Errc::non_finite_loss,
            "masked mlp training diverged at epoch " + std::to_string(epoch));
    a1.step(w1, g1, config.lr, epoch);
    a2.step(w2, g2, config.lr, epoch);
    a3.step(w3, g3, config.lr, epoch);
    ab1.step(b1, gb1, config.lr, epoch);
    ab2.step(b2, gb2, config.lr, epoch);
    ab3.step(b3, gb3, config.lr, epoch);
  }
  return std::make_shared<MaskedMlp>(d, out, classifier, std::move(w1), Eigen::VectorXd(b1),
                                     std::move(w2), Eigen::VectorXd(b2), std::move(w3),
                                     Eigen::VectorXd(b3));
}

std::vector<Mask> row_masks(int d, const MaskSampler& sampler, const MlpTrainConfig& config,
                            std::uint64_t row_seed, std::vector<double>* probs) {
  std::vector<Mask> masks;
  if (d <= config.exact_mask_cap) {
    masks = enumerate_subsets(d);
    probs->clear();
    for (const Mask& m : masks) probs->push_back(sampler.prob(m));
  } else {
    Rng rng(row_seed);
    for (int k = 0; k < config.mask_draws_per_row; ++k) masks.push_back(sampler.sample(d, rng));
    probs->assign(masks.size(), 1.0 / static_cast<double>(masks.size()));
  }
  return masks;
}

std::vector<TrainSample> build_samples(const Dataset& data, const MaskSampler& sampler,
                                       const MlpTrainConfig& config,
                                       const std::function<Eigen::VectorXd(int)>& target_for_row) {
  std::vector<TrainSample> samples;
  const int d = data.d();
  for (int i = 0; i < data.n(); ++i) {
    const double rw = data.weight(i);
    if (rw <= 0.0) continue;
    std::vector<double> probs;
    const auto masks =
        row_masks(d, sampler, config, hash_u64(config.seed, 0x5a11u + static_cast<std::uint64_t>(i)),
                  &probs);
    const Eigen::VectorXd target = target_for_row(i);
    const Eigen::VectorXd x = data.x.row(i).transpose();
    for (std::size_t k = 0; k < masks.size(); ++k) {
      const double w = rw * probs[k];
      if (w <= 0.0) continue;
      samples.push_back({masked_input(x, masks[k]), target, w});
    }
  }
  return samples;
}

}  // namespace

MaskedPtr train_masked_surrogate(const ModelPtr& teacher, const Dataset& data,
                                 const MaskSampler& sampler, const MlpTrainConfig& config) {
  require(data.n() >= 1, Errc::empty_dataset, "surrogate training needs data");
  require(teacher->input_dim() == data.d(), Errc::dimension_mismatch,
          "teacher input dimension != dataset feature count");
  const bool classifier = teacher->classification();
  const int out = teacher->output_dim();
  auto samples = build_samples(data, sampler, config, [&](int i) {
    return teacher->predict(data.x.row(i).transpose());
  });
  return train_masked_mlp(samples, data.d(), out, classifier, config);
}

MaskedPtr train_with_missingness(const Dataset& data, const MaskSampler& sampler,
                                 const MlpTrainConfig& config) {
  require(data.n() >= 1, Errc::empty_dataset, "missingness training needs data");
  require(data.has_labels(), Errc::kind_mismatch, "missingness training needs labels");
  const bool classifier = data.classification();
  const int out = classifier ? data.classes : 1;
  auto samples = build_samples(data, sampler, config, [&](int i) {
    if (classifier) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(out);
      t[data.y_class[static_cast<std::size_t>(i)]] = 1.0;
      return t;
    }
    Eigen::VectorXd t(1);
    t[0] = data.y_reg[i];
    return t;
  });
  return train_masked_mlp(samples, data.d(), out, classifier, config);
}

}  // namespace remex
