#pragma once

// Learning workloads built on the MLP: edge learning (EDs upload raw samples,
// valued by the current model's loss on them) and federated learning (EDs
// upload gradients, valued by their weighted norm), plus the descent algebra
// used to certify partial aggregation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "goalrba/dataset.hpp"
#include "goalrba/errors.hpp"
#include "goalrba/mlp.hpp"
#include "goalrba/random.hpp"
#include "goalrba/workload.hpp"

namespace goalrba {

// ---------------------------------------------------------------------------
// Gradient aggregation and its descent guarantees.

struct WeightedGradient {
  Eigen::VectorXd gradient;
  double samples = 1.0;  // D_j
};

// Sample-weighted mean gradient over `parts`.
inline Eigen::VectorXd weighted_mean_gradient(std::span<const WeightedGradient> parts) {
  if (parts.empty()) throw std::invalid_argument("weighted_mean_gradient: empty selection");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(parts.front().gradient.size());
  double total = 0.0;
  for (const auto& p : parts) {
    if (!(p.samples >= 1)) throw std::invalid_argument("weighted_mean_gradient: D_j < 1");
    sum += p.samples * p.gradient;
    total += p.samples;
  }
  return sum / total;
}

// theta_k = theta_{k-1} - eta * (sum_sel D_j g_j / sum_sel D_j). An empty
// selection leaves the model where it is.
inline Eigen::VectorXd aggregate_step(const Eigen::VectorXd& theta,
                                      std::span<const WeightedGradient> selected, double eta) {
  if (selected.empty()) return theta;
  return theta - eta * weighted_mean_gradient(selected);
}

// eta (1 - kappa eta / 2) || D_j g_j / sum_D ||^2, with sum_D over all EDs.
inline double federated_marginal_utility(const Eigen::VectorXd& gradient, double samples,
                                         double total_samples, double eta, double kappa) {
  if (!(eta > 0) || !(kappa > 0) || !(eta < 2.0 / kappa)) {
    throw std::invalid_argument("federated_marginal_utility: need 0 < eta < 2/kappa");
  }
  if (!(total_samples > 0)) throw std::invalid_argument("federated_marginal_utility: total samples <= 0");
  const double scale = samples / total_samples;
  return eta * (1.0 - kappa * eta / 2.0) * scale * scale * gradient.squaredNorm();
}

struct DescentCheck {
  double change = 0.0;  // L_after - L_before
  double bound = 0.0;   // right-hand side of the partial-update descent bound
  double inner = 0.0;   // <g - g_sel, g_sel>
  bool holds = false;
};

// L_after - L_before <= -eta (1 - kappa eta/2) ||g_sel||^2 - eta <g - g_sel, g_sel>.
// With g_sel == g this is the full-participation bound.
inline DescentCheck descent_bound_check(double loss_before, double loss_after,
                                        const Eigen::VectorXd& selected_gradient,
                                        const Eigen::VectorXd& full_gradient, double eta,
                                        double kappa, double tolerance = 1e-10) {
  DescentCheck c;
  c.change = loss_after - loss_before;
  c.inner = (full_gradient - selected_gradient).dot(selected_gradient);
  c.bound = -eta * (1.0 - kappa * eta / 2.0) * selected_gradient.squaredNorm() - eta * c.inner;
  c.holds = c.change <= c.bound + tolerance;
  return c;
}

// Quadratic surrogate with exact smoothness kappa: ED j holds
// L_j(theta) = kappa/2 ||theta - c_j||^2 and the global loss is the
// D-weighted mean. Used where the descent bounds must hold to round-off.
class QuadraticSurrogate {
 public:
  QuadraticSurrogate(std::vector<Eigen::VectorXd> centers, std::vector<double> samples, double kappa)
      : centers_(std::move(centers)), samples_(std::move(samples)), kappa_(kappa) {
    if (centers_.empty() || centers_.size() != samples_.size()) {
      throw std::invalid_argument("QuadraticSurrogate: bad ED data");
    }
    if (!(kappa > 0)) throw std::invalid_argument("QuadraticSurrogate: kappa <= 0");
  }

  double kappa() const { return kappa_; }
  std::size_t num_eds() const { return centers_.size(); }

  double ed_loss(std::size_t j, const Eigen::VectorXd& theta) const {
    return 0.5 * kappa_ * (theta - centers_[j]).squaredNorm();
  }
  Eigen::VectorXd ed_gradient(std::size_t j, const Eigen::VectorXd& theta) const {
    return kappa_ * (theta - centers_[j]);
  }
  double loss(const Eigen::VectorXd& theta) const {
    double s = 0.0, total = 0.0;
    for (std::size_t j = 0; j < centers_.size(); ++j) {
      s += samples_[j] * ed_loss(j, theta);
      total += samples_[j];
    }
    return s / total;
  }
  std::vector<WeightedGradient> gradients(const Eigen::VectorXd& theta) const {
    std::vector<WeightedGradient> out;
    for (std::size_t j = 0; j < centers_.size(); ++j) out.push_back({ed_gradient(j, theta), samples_[j]});
    return out;
  }

 private:
  std::vector<Eigen::VectorXd> centers_;
  std::vector<double> samples_;
  double kappa_;
};

// Mini-batch mean gradient of ED data at `model`; batch drawn without
// replacement from `batch_seed` (whole set when batch >= size).
inline Eigen::VectorXd local_gradient(const Mlp& model, const Dataset& ed_data, int batch,
                                      std::uint64_t batch_seed) {
  if (ed_data.empty()) throw std::invalid_argument("local_gradient: empty ED dataset");
  if (batch <= 0 || batch >= ed_data.size()) return loss_gradient(model, ed_data);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(ed_data.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng(batch_seed);
  shuffle_in_place(idx, rng);
  idx.resize(static_cast<std::size_t>(batch));
  std::sort(idx.begin(), idx.end());
  return loss_gradient(model, ed_data.subset(idx));
}

// ---------------------------------------------------------------------------
// Shared data setup.

struct LearningDataParams {
  int num_eds = 10;
  int samples_per_ed = 300;
  int test_size = 1000;
  MixtureSpec mixture{};
  double concentration = 0.95;
  std::vector<int> designated_classes{6, 9};
  std::string mnist_dir;  // optional; synthetic data when empty
};

struct LearningData {
  std::vector<Dataset> eds;
  Dataset test;
  MlpShape shape;
};

inline LearningData make_learning_data(const LearningDataParams& p, std::uint64_t seed) {
  if (p.num_eds < 1 || p.samples_per_ed < 1 || p.test_size < 1) {
    throw std::invalid_argument("learning data: num_eds, samples_per_ed, test_size must be >= 1");
  }
  LearningData out;
  Dataset pool;
  const int pool_size = p.num_eds * p.samples_per_ed;
  if (!p.mnist_dir.empty()) {
    Dataset all = load_mnist_train(p.mnist_dir, pool_size + p.test_size);
    if (all.size() < pool_size + p.test_size) throw Error("mnist: not enough samples");
    std::vector<Eigen::Index> a(static_cast<std::size_t>(pool_size)), b(static_cast<std::size_t>(p.test_size));
    std::iota(a.begin(), a.end(), Eigen::Index{0});
    std::iota(b.begin(), b.end(), Eigen::Index{pool_size});
    pool = all.subset(a);
    out.test = all.subset(b);
    out.shape = MlpShape{static_cast<int>(all.x.rows()), 64, 10};
  } else {
    GaussianMixture mix(p.mixture, derive_seed(seed, kStreamWorkload, 0));
    Rng rng(derive_seed(seed, kStreamWorkload, 1));
    pool = mix.sample(pool_size, rng);
    out.test = mix.sample(p.test_size, rng);
    out.shape = MlpShape{p.mixture.dim, 64, p.mixture.classes};
  }
  Rng split_rng(derive_seed(seed, kStreamWorkload, 2));
  out.eds = non_iid_split(pool, SplitSpec{p.num_eds, p.designated_classes, p.concentration}, split_rng);
  return out;
}

inline Dataset concat(std::span<const Dataset> parts) {
  Dataset all;
  for (const auto& d : parts) all.append(d);
  return all;
}

// ---------------------------------------------------------------------------
// Edge learning: each interval every ED offers a batch of raw samples; the
// operator pulls the selected batches and fine-tunes the model on everything
// collected so far. Goal = mean loss over all ED samples.

struct EdgeLearningParams {
  LearningDataParams data{};
  int offer_size = 32;        // samples offered per ED per interval
  int epochs_per_round = 5;   // fine-tuning budget after each ingest
  int batch = 512;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int bytes_per_sample = 785; // 784 pixel bytes + label byte
};

class EdgeLearningWorkload final : public Workload {
 public:
  EdgeLearningWorkload(const EdgeLearningParams& params, std::uint64_t seed)
      : params_(params), seed_(seed), data_(make_learning_data(params.data, seed)) {
    if (params.offer_size < 1) throw std::invalid_argument("edge_learning: offer_size < 1");
    model_ = Mlp::initialized(data_.shape, derive_seed(seed, kStreamInit));
    all_ = concat(data_.eds);
    cursor_.assign(data_.eds.size(), 0);
    refresh_goal();
    begin_round(0);
  }

  std::string_view kind() const override { return "edge_learning"; }
  int num_eds() const override { return static_cast<int>(data_.eds.size()); }

  void begin_round(int round) override {
    round_ = round;
    offered_.assign(data_.eds.size(), Dataset{});
    offered_delta_.assign(data_.eds.size(), 0.0);
    for (std::size_t j = 0; j < data_.eds.size(); ++j) {
      const Eigen::Index begin = cursor_[j];
      const Eigen::Index end = std::min<Eigen::Index>(data_.eds[j].size(), begin + params_.offer_size);
      if (end <= begin) continue;
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(end - begin));
      std::iota(idx.begin(), idx.end(), begin);
      offered_[j] = data_.eds[j].subset(idx);
      offered_delta_[j] = per_sample_losses(model_, offered_[j]).sum();
    }
  }

  // Per-ED value: summed per-sample loss of the offered batch.
  std::vector<EdUtility> marginal_utilities() const override {
    std::vector<EdUtility> out;
    for (std::size_t j = 0; j < offered_.size(); ++j) out.push_back({static_cast<int>(j), offered_delta_[j]});
    return out;
  }

  void ingest(std::span<const int> selected) override {
    bool any = false;
    for (int id : selected) {
      const auto j = static_cast<std::size_t>(id);
      if (offered_.at(j).empty()) continue;
      collected_.append(offered_[j]);
      cursor_[j] += offered_[j].size();
      offered_[j] = Dataset{};
      offered_delta_[j] = 0.0;
      any = true;
    }
    if (!any) return;
    SgdOptions opt;
    opt.epochs = params_.epochs_per_round;
    opt.batch = params_.batch;
    opt.learning_rate = params_.learning_rate;
    opt.momentum = params_.momentum;
    opt.seed = derive_seed(seed_, kStreamBatch, static_cast<std::uint64_t>(round_));
    sgd_train(model_, collected_, opt);
    refresh_goal();
  }

  double goal_value() const override { return goal_; }

  double payload_bits(int ed_id) const override {
    return 8.0 * params_.bytes_per_sample * static_cast<double>(offered_.at(static_cast<std::size_t>(ed_id)).size());
  }

  std::int64_t transmitted_units(std::span<const int> selected) const override {
    std::int64_t n = 0;
    for (int id : selected) n += offered_.at(static_cast<std::size_t>(id)).size();
    return n;
  }

  double progress() const override { return test_accuracy_; }

  const Mlp& model() const { return model_; }
  const Dataset& collected() const { return collected_; }
  const LearningData& data() const { return data_; }

 private:
  void refresh_goal() {
    goal_ = loss(model_, all_);
    test_accuracy_ = accuracy(model_, data_.test);
  }

  EdgeLearningParams params_;
  std::uint64_t seed_;
  LearningData data_;
  Dataset all_;
  Mlp model_;
  Dataset collected_;
  std::vector<Eigen::Index> cursor_;
  std::vector<Dataset> offered_;
  std::vector<double> offered_delta_;
  int round_ = 0;
  double goal_ = 0.0;
  double test_accuracy_ = 0.0;
};

// ---------------------------------------------------------------------------
// Federated learning: every ED computes one mini-batch gradient at the
// broadcast model; only the selected gradients are aggregated.

struct FederatedParams {
  LearningDataParams data{};
  int batch = 512;
  double learning_rate = 0.01;
  double kappa = 1.0;           // smoothness constant used for ranking
  int bits_per_weight = 32;
};

class FederatedWorkload final : public Workload {
 public:
  FederatedWorkload(const FederatedParams& params, std::uint64_t seed)
      : params_(params), seed_(seed), data_(make_learning_data(params.data, seed)) {
    if (!(params.learning_rate > 0 && params.learning_rate < 2.0 / params.kappa)) {
      throw std::invalid_argument("federated: need 0 < learning_rate < 2/kappa");
    }
    model_ = Mlp::initialized(data_.shape, derive_seed(seed, kStreamInit));
    all_ = concat(data_.eds);
    for (const auto& d : data_.eds) total_samples_ += static_cast<double>(d.size());
    refresh_goal();
    begin_round(0);
  }

  std::string_view kind() const override { return "federated"; }
  int num_eds() const override { return static_cast<int>(data_.eds.size()); }

  void begin_round(int round) override {
    round_ = round;
    gradients_.clear();
    for (std::size_t j = 0; j < data_.eds.size(); ++j) {
      const auto seed = derive_seed(seed_, kStreamBatch, (static_cast<std::uint64_t>(round) << 16) + j);
      gradients_.push_back({local_gradient(model_, data_.eds[j], params_.batch, seed),
                            static_cast<double>(data_.eds[j].size())});
    }
  }

  std::vector<EdUtility> marginal_utilities() const override {
    std::vector<EdUtility> out;
    for (std::size_t j = 0; j < gradients_.size(); ++j) {
      out.push_back({static_cast<int>(j),
                     federated_marginal_utility(gradients_[j].gradient, gradients_[j].samples, total_samples_,
                                                params_.learning_rate, params_.kappa)});
    }
    return out;
  }

  void ingest(std::span<const int> selected) override {
    std::vector<WeightedGradient> chosen;
    for (int id : selected) chosen.push_back(gradients_.at(static_cast<std::size_t>(id)));
    if (chosen.empty()) {
      last_inner_ = 0.0;
      return;
    }
    const Eigen::VectorXd partial = weighted_mean_gradient(chosen);
    const Eigen::VectorXd full = weighted_mean_gradient(gradients_);
    last_inner_ = (full - partial).dot(partial);
    model_.params() = aggregate_step(model_.params(), chosen, params_.learning_rate);
    if (!model_.params().allFinite()) throw DivergenceError("federated: divergence");
    refresh_goal();
  }

  double goal_value() const override { return goal_; }

  double payload_bits(int) const override {
    return static_cast<double>(model_.params().size()) * params_.bits_per_weight;
  }

  double progress() const override { return test_accuracy_; }

  // <g - g_sel, g_sel> of the last aggregation; non-negative values mean the
  // partial step is guaranteed to descend.
  double last_partial_inner_product() const { return last_inner_; }

  const Mlp& model() const { return model_; }
  const std::vector<WeightedGradient>& gradients() const { return gradients_; }

 private:
  void refresh_goal() {
    goal_ = loss(model_, all_);
    test_accuracy_ = accuracy(model_, data_.test);
  }

  FederatedParams params_;
  std::uint64_t seed_;
  LearningData data_;
  Dataset all_;
  Mlp model_;
  double total_samples_ = 0.0;
  std::vector<WeightedGradient> gradients_;
  int round_ = 0;
  double goal_ = 0.0;
  double test_accuracy_ = 0.0;
  double last_inner_ = 0.0;
};

}  // namespace goalrba
