#include "remex/joint.hpp"

#include <cmath>

#include "remex/numeric.hpp"

namespace remex {

DiscreteJoint::DiscreteJoint(std::vector<int> cards, int classes, std::vector<double> probs)
    : cards_(std::move(cards)), classes_(classes), probs_(std::move(probs)) {
  validate();
}

std::size_t DiscreteJoint::n_cells() const {
  std::size_t n = 1;
  for (int c : cards_) n *= static_cast<std::size_t>(c);
  return n;
}

std::size_t DiscreteJoint::cell_index(const std::vector<int>& xs) const {
  require(xs.size() == cards_.size(), Errc::dimension_mismatch, "cell has wrong arity");
  std::size_t idx = 0;
  for (std::size_t j = 0; j < cards_.size(); ++j) {
    require(xs[j] >= 0 && xs[j] < cards_[j], Errc::index_out_of_range,
            "feature value outside cardinality");
    idx = idx * static_cast<std::size_t>(cards_[j]) + static_cast<std::size_t>(xs[j]);
  }
  return idx;
}

std::vector<int> DiscreteJoint::cell_values(std::size_t index) const {
  std::vector<int> xs(cards_.size());
  for (std::size_t j = cards_.size(); j-- > 0;) {
    xs[j] = static_cast<int>(index % static_cast<std::size_t>(cards_[j]));
    index /= static_cast<std::size_t>(cards_[j]);
  }
  return xs;
}

double DiscreteJoint::p_xy(const std::vector<int>& xs, int y) const {
  require(y >= 0 && y < classes_, Errc::index_out_of_range, "class out of range");
  return probs_[cell_index(xs) * static_cast<std::size_t>(classes_) + static_cast<std::size_t>(y)];
}

double DiscreteJoint::p_x(const std::vector<int>& xs) const {
  const std::size_t base = cell_index(xs) * static_cast<std::size_t>(classes_);
  NeumaierSum s;
  for (int y = 0; y < classes_; ++y) s.add(probs_[base + static_cast<std::size_t>(y)]);
  return s.total();
}

Eigen::VectorXd DiscreteJoint::class_marginal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(classes_);
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    out[static_cast<int>(i % static_cast<std::size_t>(classes_))] += probs_[i];
  }
  return out;
}

std::vector<int> DiscreteJoint::coerce(const Eigen::VectorXd& x) const {
  require(static_cast<int>(x.size()) == d(), Errc::dimension_mismatch,
          "input has wrong dimension for joint");
  std::vector<int> xs(cards_.size());
  for (int j = 0; j < d(); ++j) {
    const double v = x[j];
    require(v == std::floor(v), Errc::kind_mismatch, "joint features must be integer-valued");
    const int iv = static_cast<int>(v);
    require(iv >= 0 && iv < cards_[j], Errc::index_out_of_range,
            "feature value outside cardinality");
    xs[j] = iv;
  }
  return xs;
}

Eigen::VectorXd DiscreteJoint::cell_vector(std::size_t index) const {
  const auto xs = cell_values(index);
  Eigen::VectorXd v(d());
  for (int j = 0; j < d(); ++j) v[j] = static_cast<double>(xs[j]);
  return v;
}

double DiscreteJoint::subset_marginal(const Eigen::VectorXd& x, Mask s) const {
  require(s.dim() == d(), Errc::dimension_mismatch, "mask dimension != joint dimension");
  const auto want = coerce(x);
  NeumaierSum total;
  const std::size_t cells = n_cells();
  for (std::size_t c = 0; c < cells; ++c) {
    const auto xs = cell_values(c);
    bool match = true;
    for (int j : s.members()) {
      if (xs[j] != want[j]) {
        match = false;
        break;
      }
    }
    if (match) total.add(p_x(xs));
  }
  return total.total();
}

Eigen::VectorXd DiscreteJoint::class_given_subset(const Eigen::VectorXd& x, Mask s) const {
  require(s.dim() == d(), Errc::dimension_mismatch, "mask dimension != joint dimension");
  const auto want = coerce(x);
  std::vector<NeumaierSum> acc(static_cast<std::size_t>(classes_));
  NeumaierSum total;
  const std::size_t cells = n_cells();
  for (std::size_t c = 0; c < cells; ++c) {
    const auto xs = cell_values(c);
    bool match = true;
    for (int j : s.members()) {
      if (xs[j] != want[j]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    for (int y = 0; y < classes_; ++y) {
      const double p = p_xy(xs, y);
      acc[static_cast<std::size_t>(y)].add(p);
      total.add(p);
    }
  }
  const double z = total.total();
  require(z > 0.0, Errc::zero_probability_input,
          "p(x_S) = 0 for S=" + s.to_string());
  Eigen::VectorXd out(classes_);
  for (int y = 0; y < classes_; ++y) out[y] = acc[static_cast<std::size_t>(y)].total() / z;
  return out;
}

Eigen::VectorXd DiscreteJoint::conditional_expectation(
    const Eigen::VectorXd& x, Mask s,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g) const {
  require(s.dim() == d(), Errc::dimension_mismatch, "mask dimension != joint dimension");
  const auto want = coerce(x);
  std::vector<NeumaierSum> acc;
  NeumaierSum total;
  const std::size_t cells = n_cells();
  for (std::size_t c = 0; c < cells; ++c) {
    const auto xs = cell_values(c);
    bool match = true;
    for (int j : s.members()) {
      if (xs[j] != want[j]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    const double p = p_x(xs);
    total.add(p);
    if (p == 0.0) continue;
    const Eigen::VectorXd gx = g(cell_vector(c));
    if (acc.empty()) acc.resize(static_cast<std::size_t>(gx.size()));
    require(acc.size() == static_cast<std::size_t>(gx.size()), Errc::dimension_mismatch,
            "g output dimension changed across cells");
    for (int k = 0; k < gx.size(); ++k) acc[static_cast<std::size_t>(k)].add(p * gx[k]);
  }
  const double z = total.total();
  require(z > 0.0, Errc::zero_probability_input, "p(x_S) = 0 for S=" + s.to_string());
  Eigen::VectorXd out(static_cast<int>(acc.size()));
  for (std::size_t k = 0; k < acc.size(); ++k) out[static_cast<int>(k)] = acc[k].total() / z;
  return out;
}

double DiscreteJoint::mutual_information(Mask s) const {
  require(s.dim() == d(), Errc::dimension_mismatch, "mask dimension != joint dimension");
  // Group cells by their projection onto S and accumulate p(x_S, y).
  const std::size_t cells = n_cells();
  std::vector<std::size_t> group(cells);
  std::size_t n_groups = 1;
  {
    std::vector<std::size_t> stride(cards_.size(), 0);
    for (int j : s.members()) {
      stride[static_cast<std::size_t>(j)] = n_groups;
      n_groups *= static_cast<std::size_t>(cards_[static_cast<std::size_t>(j)]);
    }
    for (std::size_t c = 0; c < cells; ++c) {
      const auto xs = cell_values(c);
      std::size_t g = 0;
      for (int j : s.members()) {
        g += stride[static_cast<std::size_t>(j)] * static_cast<std::size_t>(xs[static_cast<std::size_t>(j)]);
      }
      group[c] = g;
    }
  }
  std::vector<double> pxy(n_groups * static_cast<std::size_t>(classes_), 0.0);
  std::vector<double> px(n_groups, 0.0);
  Eigen::VectorXd py = class_marginal();
  for (std::size_t c = 0; c < cells; ++c) {
    const auto xs = cell_values(c);
    for (int y = 0; y < classes_; ++y) {
      const double p = p_xy(xs, y);
      pxy[group[c] * static_cast<std::size_t>(classes_) + static_cast<std::size_t>(y)] += p;
      px[group[c]] += p;
    }
  }
  NeumaierSum mi;
  for (std::size_t g = 0; g < n_groups; ++g) {
    for (int y = 0; y < classes_; ++y) {
      const double p = pxy[g * static_cast<std::size_t>(classes_) + static_cast<std::size_t>(y)];
      if (p <= 0.0) continue;
      mi.add(p * std::log(p / (px[g] * py[y])));
    }
  }
  return mi.total();
}

double DiscreteJoint::entropy_y() const {
  const Eigen::VectorXd py = class_marginal();
  NeumaierSum h;
  for (int y = 0; y < classes_; ++y) {
    if (py[y] > 0.0) h.add(-py[y] * std::log(py[y]));
  }
  return h.total();
}

Dataset DiscreteJoint::to_dataset() const {
  Dataset out;
  const std::size_t cells = n_cells();
  std::vector<Eigen::VectorXd> rows;
  std::vector<int> labels;
  std::vector<double> ws;
  for (std::size_t c = 0; c < cells; ++c) {
    for (int y = 0; y < classes_; ++y) {
      const double p = p_xy(cell_values(c), y);
      if (p <= 0.0) continue;
      rows.push_back(cell_vector(c));
      labels.push_back(y);
      ws.push_back(p);
    }
  }
  out.x.resize(static_cast<int>(rows.size()), d());
  out.weights.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<int>(i)) = rows[i].transpose();
    out.weights[static_cast<int>(i)] = ws[i];
  }
  out.y_class = std::move(labels);
  out.classes = classes_;
  for (int c : cards_) out.kinds.push_back(FeatureKind::cat(c));
  out.validate();
  return out;
}

Dataset DiscreteJoint::to_regression_dataset() const {
  Dataset d = to_dataset();
  d.y_reg.resize(static_cast<int>(d.y_class.size()));
  for (std::size_t i = 0; i < d.y_class.size(); ++i) {
    d.y_reg[static_cast<int>(i)] = static_cast<double>(d.y_class[i]);
  }
  d.y_class.clear();
  d.classes = 0;
  d.validate();
  return d;
}

void DiscreteJoint::validate(double tol) const {
  require(classes_ >= 1, Errc::config_error, "joint needs at least one class");
  for (int c : cards_) require(c >= 1, Errc::config_error, "cardinalities must be >= 1");
  require(probs_.size() == n_cells() * static_cast<std::size_t>(classes_),
          Errc::dimension_mismatch, "prob table size != prod(cards) * classes");
  NeumaierSum total;
  for (double p : probs_) {
    require(p >= 0.0, Errc::config_error, "negative probability in joint");
    total.add(p);
  }
  require(std::abs(total.total() - 1.0) <= tol, Errc::config_error,
          "joint probabilities sum to " + std::to_string(total.total()));
}

DiscreteJoint DiscreteJoint::random(std::vector<int> cards, int classes, Rng& rng,
                                    double min_prob) {
  std::size_t n = static_cast<std::size_t>(classes);
  for (int c : cards) n *= static_cast<std::size_t>(c);
  std::vector<double> probs(n);
  double total = 0.0;
  for (double& p : probs) {
    p = rng.uniform(min_prob, 1.0);
    total += p;
  }
  for (double& p : probs) p /= total;
  return DiscreteJoint(std::move(cards), classes, std::move(probs));
}

DiscreteJoint DiscreteJoint::independent(const std::vector<Eigen::VectorXd>& feature_marginals,
                                         const Eigen::VectorXd& class_marginal) {
  std::vector<int> cards;
  for (const auto& m : feature_marginals) cards.push_back(static_cast<int>(m.size()));
  const int classes = static_cast<int>(class_marginal.size());
  DiscreteJoint out;
  out.cards_ = cards;
  out.classes_ = classes;
  out.probs_.assign(out.n_cells() * static_cast<std::size_t>(classes), 0.0);
  for (std::size_t c = 0; c < out.n_cells(); ++c) {
    const auto xs = out.cell_values(c);
    double px = 1.0;
    for (std::size_t j = 0; j < xs.size(); ++j) px *= feature_marginals[j][xs[j]];
    for (int y = 0; y < classes; ++y) {
      out.probs_[c * static_cast<std::size_t>(classes) + static_cast<std::size_t>(y)] =
          px * class_marginal[y];
    }
  }
  out.validate(1e-9);
  return out;
}

DiscreteJoint noisy_copy_joint(double agreement, int extra_features) {
  require(agreement >= 0.0 && agreement <= 1.0, Errc::config_error,
          "agreement must be a probability");
  const int d = 1 + extra_features;
  std::vector<int> cards(static_cast<std::size_t>(d), 2);
  const int classes = 2;
  std::size_t cells = std::size_t{1} << d;
  std::vector<double> probs(cells * 2, 0.0);
  const double px = 1.0 / static_cast<double>(cells);  // uniform over feature cells
  DiscreteJoint tmp;  // for index math
  tmp = DiscreteJoint(cards, classes,
                      std::vector<double>(cells * 2, 1.0 / static_cast<double>(cells * 2)));
  for (std::size_t c = 0; c < cells; ++c) {
    const auto xs = tmp.cell_values(c);
    const int x1 = xs[0];
    probs[c * 2 + static_cast<std::size_t>(x1)] = px * agreement;
    probs[c * 2 + static_cast<std::size_t>(1 - x1)] = px * (1.0 - agreement);
  }
  return DiscreteJoint(std::move(cards), classes, std::move(probs));
}

}  // namespace remex
