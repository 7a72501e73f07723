#pragma once

// A small multilayer perceptron (input -> ReLU hidden -> softmax output) with
// hand-written backprop. Parameters live in one flat vector so gradients,
// aggregation and finite-difference probes all work on the same layout:
//   [ W1 (hidden x input, col-major) | b1 | W2 (classes x hidden) | b2 ]

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "goalrba/errors.hpp"
#include "goalrba/random.hpp"

namespace goalrba {

struct MlpShape {
  int input = 784;
  int hidden = 64;
  int classes = 10;

  Eigen::Index num_params() const {
    return Eigen::Index{hidden} * input + hidden + Eigen::Index{classes} * hidden + classes;
  }
};

// Samples are stored column-wise: x.col(i) is sample i.
struct Dataset {
  Eigen::MatrixXd x;
  std::vector<int> y;

  Eigen::Index size() const { return x.cols(); }
  bool empty() const { return x.cols() == 0; }

  Dataset subset(std::span<const Eigen::Index> idx) const {
    Dataset out;
    out.x.resize(x.rows(), static_cast<Eigen::Index>(idx.size()));
    out.y.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.x.col(static_cast<Eigen::Index>(i)) = x.col(idx[i]);
      out.y.push_back(y[static_cast<std::size_t>(idx[i])]);
    }
    return out;
  }

  void append(const Dataset& other) {
    if (other.empty()) return;
    if (empty()) {
      *this = other;
      return;
    }
    if (other.x.rows() != x.rows()) throw std::invalid_argument("Dataset::append: dimension mismatch");
    const Eigen::Index n = x.cols();
    x.conservativeResize(Eigen::NoChange, n + other.x.cols());
    x.rightCols(other.x.cols()) = other.x;
    y.insert(y.end(), other.y.begin(), other.y.end());
  }
};

struct LabeledSample {
  Eigen::VectorXd x;
  int y = 0;
  int owner = 0;  // ed_id
  int index = 0;  // d within the owner's data
};

class Mlp {
 public:
  Mlp() : Mlp(MlpShape{}) {}
  explicit Mlp(const MlpShape& shape) : shape_(shape), params_(Eigen::VectorXd::Zero(shape.num_params())) {
    if (shape.input < 1 || shape.hidden < 1 || shape.classes < 2) {
      throw std::invalid_argument("Mlp: bad shape");
    }
  }

  // Glorot-uniform weights, zero biases.
  static Mlp initialized(const MlpShape& shape, std::uint64_t seed) {
    Mlp m(shape);
    Rng rng(seed);
    const double a1 = std::sqrt(6.0 / (shape.input + shape.hidden));
    const double a2 = std::sqrt(6.0 / (shape.hidden + shape.classes));
    auto w1 = m.w1();
    for (Eigen::Index i = 0; i < w1.size(); ++i) w1.data()[i] = uniform(rng, -a1, a1);
    auto w2 = m.w2();
    for (Eigen::Index i = 0; i < w2.size(); ++i) w2.data()[i] = uniform(rng, -a2, a2);
    return m;
  }

  const MlpShape& shape() const { return shape_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using CMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using CVecMap = Eigen::Map<const Eigen::VectorXd>;

  MatMap w1() { return {params_.data(), shape_.hidden, shape_.input}; }
  CMatMap w1() const { return {params_.data(), shape_.hidden, shape_.input}; }
  VecMap b1() { return {params_.data() + off_b1(), shape_.hidden}; }
  CVecMap b1() const { return {params_.data() + off_b1(), shape_.hidden}; }
  MatMap w2() { return {params_.data() + off_w2(), shape_.classes, shape_.hidden}; }
  CMatMap w2() const { return {params_.data() + off_w2(), shape_.classes, shape_.hidden}; }
  VecMap b2() { return {params_.data() + off_b2(), shape_.classes}; }
  CVecMap b2() const { return {params_.data() + off_b2(), shape_.classes}; }

  struct Activations {
    Eigen::MatrixXd hidden;  // post-ReLU
    Eigen::MatrixXd logits;
    Eigen::MatrixXd probs;   // column-wise softmax
  };

  Activations forward(const Eigen::MatrixXd& x) const {
    check_input(x);
    Activations a;
    a.hidden = ((w1() * x).colwise() + b1()).cwiseMax(0.0);
    a.logits = (w2() * a.hidden).colwise() + b2();
    a.probs.resize(a.logits.rows(), a.logits.cols());
    for (Eigen::Index i = 0; i < a.logits.cols(); ++i) {
      const double m = a.logits.col(i).maxCoeff();
      auto e = (a.logits.col(i).array() - m).exp();
      a.probs.col(i) = e / e.sum();
    }
    return a;
  }

  std::vector<int> predict(const Eigen::MatrixXd& x) const {
    const auto a = forward(x);
    std::vector<int> out(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      Eigen::Index arg = 0;
      a.logits.col(i).maxCoeff(&arg);
      out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    return out;
  }

  void check_input(const Eigen::MatrixXd& x) const {
    if (x.rows() != shape_.input) {
      throw std::invalid_argument("Mlp: feature dimension " + std::to_string(x.rows()) +
                                  " does not match input " + std::to_string(shape_.input));
    }
  }

  void check_labels(std::span<const int> y, Eigen::Index n) const {
    if (static_cast<Eigen::Index>(y.size()) != n) throw std::invalid_argument("Mlp: label count mismatch");
    for (int c : y) {
      if (c < 0 || c >= shape_.classes) throw std::invalid_argument("Mlp: label out of range");
    }
  }

 private:
  Eigen::Index off_b1() const { return Eigen::Index{shape_.hidden} * shape_.input; }
  Eigen::Index off_w2() const { return off_b1() + shape_.hidden; }
  Eigen::Index off_b2() const { return off_w2() + Eigen::Index{shape_.classes} * shape_.hidden; }

  MlpShape shape_;
  Eigen::VectorXd params_;
};

// Cross-entropy of each sample, computed from logits via log-sum-exp.
inline Eigen::VectorXd per_sample_losses(const Mlp& model, const Dataset& data) {
  model.check_labels(data.y, data.size());
  const auto a = model.forward(data.x);
  Eigen::VectorXd out(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const auto col = a.logits.col(i);
    const double m = col.maxCoeff();
    const double lse = m + std::log((col.array() - m).exp().sum());
    out(i) = lse - col(data.y[static_cast<std::size_t>(i)]);
  }
  return out;
}

inline double loss(const Mlp& model, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("loss: empty sample set");
  return per_sample_losses(model, data).mean();
}

inline double accuracy(const Mlp& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  const auto pred = model.predict(data.x);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == data.y[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

// Mean cross-entropy gradient over `data`, in the flat parameter layout.
inline Eigen::VectorXd loss_gradient(const Mlp& model, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("loss_gradient: empty sample set");
  model.check_labels(data.y, data.size());
  const auto& s = model.shape();
  const auto a = model.forward(data.x);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  Eigen::MatrixXd dz = a.probs;
  for (Eigen::Index i = 0; i < data.size(); ++i) dz(data.y[static_cast<std::size_t>(i)], i) -= 1.0;
  dz *= inv_n;
  Eigen::MatrixXd dh = (model.w2().transpose() * dz).cwiseProduct(
      (a.hidden.array() > 0.0).cast<double>().matrix());

  Mlp grad(s);
  grad.w2().noalias() = dz * a.hidden.transpose();
  grad.b2() = dz.rowwise().sum();
  grad.w1().noalias() = dh * data.x.transpose();
  grad.b1() = dh.rowwise().sum();
  return std::move(grad.params());
}

struct SgdOptions {
  int epochs = 20;
  int batch = 512;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

// Mini-batch SGD with heavy-ball momentum; reshuffles every epoch.
inline void sgd_train(Mlp& model, const Dataset& data, const SgdOptions& opt) {
  if (data.empty()) throw std::invalid_argument("sgd_train: empty dataset");
  if (opt.batch < 1) throw std::invalid_argument("sgd_train: batch < 1");
  if (opt.epochs <= 0) return;
  Rng rng(opt.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(model.params().size());
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle_in_place(order, rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(opt.batch));
      const Dataset batch = data.subset(std::span(order).subspan(start, stop - start));
      const Eigen::VectorXd g = loss_gradient(model, batch);
      if (!g.allFinite()) throw DivergenceError("sgd_train: divergence (non-finite gradient)");
      velocity = opt.momentum * velocity - opt.learning_rate * g;
      model.params() += velocity;
    }
  }
  if (!model.params().allFinite()) throw DivergenceError("sgd_train: divergence (non-finite weights)");
}

// Loss of the current model on one candidate sample: the sample's standalone
// value to the learner.
inline double edge_marginal_utility(const Mlp& model, const LabeledSample& sample) {
  Dataset one;
  one.x = sample.x;
  one.y = {sample.y};
  return per_sample_losses(model, one)(0);
}

}  // namespace goalrba
