#pragma once

#include <Eigen/Dense>
#include <memory>

#include "remex/mask_sampler.hpp"
#include "remex/model.hpp"

namespace remex {

struct MlpTrainConfig {
  int hidden = 64;
  double lr = 5e-3;
  int epochs = 4000;
  std::uint64_t seed = 1;
  /// Enumerate all 2^d masks with sampler probabilities as weights when
  /// d <= exact_mask_cap (the exact population objective); otherwise a
  /// fixed set of sampler draws per row is generated up front.
  int exact_mask_cap = 12;
  int mask_draws_per_row = 8;
};

/// Feed-forward network on the masked input (x ⊙ m, m): two tanh hidden
/// layers, linear head for regression or softmax for classification. The
/// zeroed coordinates plus the mask channel make the output structurally
/// invariant to features outside the mask.
class MaskedMlp final : public PredictModel {
 public:
  MaskedMlp(int d, int out, bool classifier, Eigen::MatrixXd w1, Eigen::VectorXd b1,
            Eigen::MatrixXd w2, Eigen::VectorXd b2, Eigen::MatrixXd w3, Eigen::VectorXd b3);

  int input_dim() const override { return 2 * d_; }
  int output_dim() const override { return out_; }
  bool classification() const override { return classifier_; }
  std::string kind() const override { return "masked-mlp"; }

  /// z is the concatenation (x ⊙ m, m) of length 2d.
  Eigen::VectorXd predict(const Eigen::VectorXd& z) const override;

  Eigen::VectorXd predict_masked(const Eigen::VectorXd& x, Mask m) const;

  int features() const { return d_; }
  const Eigen::MatrixXd& w1() const { return w1_; }
  const Eigen::VectorXd& b1() const { return b1_; }
  const Eigen::MatrixXd& w2() const { return w2_; }
  const Eigen::VectorXd& b2() const { return b2_; }
  const Eigen::MatrixXd& w3() const { return w3_; }
  const Eigen::VectorXd& b3() const { return b3_; }

 private:
  int d_, out_;
  bool classifier_;
  Eigen::MatrixXd w1_, w2_, w3_;
  Eigen::VectorXd b1_, b2_, b3_;
};

using MaskedPtr = std::shared_ptr<const MaskedMlp>;

/// Train g to match the teacher's predictions under held-out features:
/// min_g E_{M,X} [ loss(g(X ⊙ M, M), f(X)) ] with soft cross entropy for
/// classifiers and MSE for regressors. Masks come from `sampler`, which
/// must not depend on the inputs.
MaskedPtr train_masked_surrogate(const ModelPtr& teacher, const Dataset& data,
                                 const MaskSampler& sampler, const MlpTrainConfig& config);

/// Same architecture and objective shape, but targets are the labels:
/// min_f E_{M,X,Y} [ loss(f(X ⊙ M, M), Y) ].
MaskedPtr train_with_missingness(const Dataset& data, const MaskSampler& sampler,
                                 const MlpTrainConfig& config);

}  // namespace remex
