#pragma once

// Consensus ADMM for distributed sparse system identification with partial
// participation. ED j holds (Y_j, X_j) with Y_j = theta X_j + N_j and the local
// loss L_j(theta) = 1/2 ||Y_j - theta X_j||_F^2 + rho_s ||theta||_1.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "goalrba/errors.hpp"
#include "goalrba/random.hpp"
#include "goalrba/workload.hpp"

namespace goalrba {

using Eigen::MatrixXd;

struct EdLocalProblem {
  MatrixXd y;          // outputs x samples
  MatrixXd x;          // states x samples
  double noise_variance = 0.0;
  MatrixXd gram;       // X X^T
  MatrixXd yxt;        // Y X^T
  double kappa = 0.0;  // largest eigenvalue of X X^T

  EdLocalProblem() = default;
  EdLocalProblem(MatrixXd y_in, MatrixXd x_in, double noise_var = 0.0)
      : y(std::move(y_in)), x(std::move(x_in)), noise_variance(noise_var) {
    if (y.cols() != x.cols()) throw std::invalid_argument("EdLocalProblem: Y and X sample counts differ");
    gram = x * x.transpose();
    yxt = y * x.transpose();
    kappa = gram.rows() == 0 ? 0.0 : Eigen::SelfAdjointEigenSolver<MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  }

  double smooth_loss(const MatrixXd& theta) const { return 0.5 * (y - theta * x).squaredNorm(); }
  MatrixXd smooth_gradient(const MatrixXd& theta) const { return theta * gram - yxt; }
};

struct AdmmState {
  MatrixXd theta0;
  std::vector<MatrixXd> thetas;
  std::vector<MatrixXd> lambdas;
  double rho = 0.1;       // penalty
  double sparsity = 0.0;  // l1 weight

  std::size_t num_eds() const { return thetas.size(); }

  void validate() const {
    if (thetas.empty() || thetas.size() != lambdas.size()) throw std::invalid_argument("AdmmState: bad ED count");
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      if (thetas[j].rows() != theta0.rows() || thetas[j].cols() != theta0.cols() ||
          lambdas[j].rows() != theta0.rows() || lambdas[j].cols() != theta0.cols()) {
        throw std::invalid_argument("AdmmState: shape mismatch at ed " + std::to_string(j));
      }
    }
  }
};

inline double soft_threshold(double v, double tau) {
  if (tau < 0) throw std::invalid_argument("soft_threshold: tau < 0");
  if (v > tau) return v - tau;
  if (v < -tau) return v + tau;
  return 0.0;
}

inline MatrixXd soft_threshold(const MatrixXd& v, double tau) {
  if (tau < 0) throw std::invalid_argument("soft_threshold: tau < 0");
  return v.unaryExpr([tau](double e) { return soft_threshold(e, tau); });
}

inline double local_loss(const EdLocalProblem& p, const MatrixXd& theta, double sparsity) {
  return p.smooth_loss(theta) + sparsity * theta.cwiseAbs().sum();
}

// argmin over theta0 of the augmented Lagrangian.
inline MatrixXd update_consensus(const AdmmState& s) {
  if (!(s.rho > 0)) throw std::invalid_argument("update_consensus: rho must be positive");
  if (s.thetas.empty()) throw std::invalid_argument("update_consensus: no EDs");
  MatrixXd sum = MatrixXd::Zero(s.theta0.rows(), s.theta0.cols());
  for (std::size_t j = 0; j < s.thetas.size(); ++j) sum += s.thetas[j] + s.lambdas[j] / s.rho;
  return sum / static_cast<double>(s.thetas.size());
}

struct LocalSolveOptions {
  double tolerance = 1e-8;
  int max_iterations = 500;
};

struct LocalSolve {
  MatrixXd theta;
  int iterations = 0;
  double residual = 0.0;  // ||prox-gradient mapping||_F at exit
  bool converged = false;
};

// ISTA on L_j(theta) + <lambda, theta - theta0> + rho/2 ||theta - theta0||^2,
// warm-started from `start`.
inline LocalSolve update_local(const EdLocalProblem& p, const MatrixXd& start, const MatrixXd& lambda,
                               const MatrixXd& theta0, double rho, double sparsity,
                               const LocalSolveOptions& opt = {}) {
  if (!(rho > 0)) throw std::invalid_argument("update_local: rho must be positive");
  const double step = 1.0 / (p.kappa + rho);
  LocalSolve out;
  out.theta = start;
  for (out.iterations = 0; out.iterations < opt.max_iterations; ++out.iterations) {
    const MatrixXd grad = p.smooth_gradient(out.theta) + lambda + rho * (out.theta - theta0);
    MatrixXd next = soft_threshold(out.theta - step * grad, step * sparsity);
    out.residual = (out.theta - next).norm() / step;
    out.theta = std::move(next);
    if (out.residual <= opt.tolerance) {
      out.converged = true;
      ++out.iterations;
      break;
    }
  }
  return out;
}

inline MatrixXd update_dual(const MatrixXd& lambda, const MatrixXd& theta, const MatrixXd& theta0, double rho) {
  return lambda + rho * (theta - theta0);
}

inline double augmented_lagrangian(const AdmmState& s, std::span<const EdLocalProblem> problems) {
  if (problems.size() != s.thetas.size()) throw std::invalid_argument("augmented_lagrangian: ED count mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < s.thetas.size(); ++j) {
    const MatrixXd r = s.thetas[j] - s.theta0;
    total += local_loss(problems[j], s.thetas[j], s.sparsity) + (s.lambdas[j].array() * r.array()).sum() +
             0.5 * s.rho * r.squaredNorm();
  }
  return total;
}

inline double admm_marginal_utility(const MatrixXd& theta_new, const MatrixXd& theta_old, double alpha = 1.0) {
  if (!(alpha > 0)) throw std::invalid_argument("admm_marginal_utility: alpha must be positive");
  return alpha * (theta_new - theta_old).squaredNorm();
}

// One synchronous round with partial participation: consensus from all EDs,
// then local and dual updates for the selected EDs only.
inline AdmmState admm_round(const AdmmState& s, std::span<const EdLocalProblem> problems,
                            std::span<const int> selected, const LocalSolveOptions& opt = {}) {
  AdmmState next = s;
  next.theta0 = update_consensus(s);
  for (int id : selected) {
    const auto j = static_cast<std::size_t>(id);
    next.thetas[j] = update_local(problems[j], s.thetas[j], s.lambdas[j], next.theta0, s.rho, s.sparsity, opt).theta;
    next.lambdas[j] = update_dual(s.lambdas[j], next.thetas[j], next.theta0, s.rho);
  }
  return next;
}

enum class CertificateConstant {
  kLinear,     // rho/2 - kappa_j/rho
  kQuadratic,  // rho/2 - kappa_j^2/rho, implied by the dual-update bound
};

struct CertificateCheck {
  double decrease = 0.0;  // L_k - L_{k+1}
  double bound = 0.0;
  bool holds = false;
};

inline double certificate_coefficient(double kappa, double rho, CertificateConstant c) {
  return rho / 2.0 - (c == CertificateConstant::kLinear ? kappa : kappa * kappa) / rho;
}

inline void require_certificate_regime(const AdmmState& s, std::span<const EdLocalProblem> problems,
                                       CertificateConstant c = CertificateConstant::kLinear) {
  if (s.sparsity != 0.0) throw CertificateRegimeError("descent certificate requires smooth mode (sparsity 0)");
  for (std::size_t j = 0; j < problems.size(); ++j) {
    if (certificate_coefficient(problems[j].kappa, s.rho, c) <= 0.0) {
      throw CertificateRegimeError("penalty below certificate regime at ed " + std::to_string(j) +
                                   " (kappa " + std::to_string(problems[j].kappa) + ", rho " +
                                   std::to_string(s.rho) + ")");
    }
  }
}

inline CertificateCheck descent_certificate(const AdmmState& before, const AdmmState& after,
                                            std::span<const EdLocalProblem> problems,
                                            std::span<const int> selected, double tolerance = 1e-9,
                                            CertificateConstant c = CertificateConstant::kLinear) {
  require_certificate_regime(before, problems, c);
  CertificateCheck out;
  out.decrease = augmented_lagrangian(before, problems) - augmented_lagrangian(after, problems);
  for (int id : selected) {
    const auto j = static_cast<std::size_t>(id);
    out.bound += certificate_coefficient(problems[j].kappa, before.rho, c) *
                 (after.thetas[j] - before.thetas[j]).squaredNorm();
  }
  out.bound += 0.5 * before.rho * (after.theta0 - before.theta0).squaredNorm();
  out.holds = out.decrease >= out.bound - tolerance;
  return out;
}

struct DualBoundCheck {
  double dual_change = 0.0;    // ||lambda_{k+1} - lambda_k||
  double primal_change = 0.0;  // ||theta_{k+1} - theta_k||
  double kappa = 0.0;
  bool holds = true;
};

// ||d lambda_j|| <= kappa_j ||d theta_j|| for every ED in `selected`; reports
// the tightest ED.
inline DualBoundCheck dual_bound_check(const AdmmState& before, const AdmmState& after,
                                       std::span<const EdLocalProblem> problems, std::span<const int> selected,
                                       double tolerance = 1e-8) {
  DualBoundCheck worst;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (int id : selected) {
    const auto j = static_cast<std::size_t>(id);
    DualBoundCheck c;
    c.dual_change = (after.lambdas[j] - before.lambdas[j]).norm();
    c.primal_change = (after.thetas[j] - before.thetas[j]).norm();
    c.kappa = problems[j].kappa;
    const double slack = c.kappa * c.primal_change + tolerance - c.dual_change;
    c.holds = slack >= 0.0;
    if (slack < worst_slack) {
      worst_slack = slack;
      worst = c;
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Instance generation.

enum class DualInit {
  kZero,
  kGradient,  // lambda_j = -grad of the smooth local loss at theta_j
};

struct AdmmInstanceParams {
  int dim = 100;
  int num_eds = 10;
  int samples = 30;
  double zero_fraction = 0.5;
  double noise_variance_step = 0.015;  // ED j (1-based) has variance step * j
  double sparsity = 0.1;
  double rho = 0.1;
  double kappa_target = 0.0;  // > 0 rescales each X_j so that kappa_j equals it
  DualInit dual_init = DualInit::kZero;

  void validate() const {
    if (dim < 1 || num_eds < 1 || samples < 1) throw std::invalid_argument("admm instance: sizes must be >= 1");
    if (!(zero_fraction >= 0 && zero_fraction <= 1)) throw std::invalid_argument("admm instance: zero_fraction");
    if (!(rho > 0)) throw std::invalid_argument("admm instance: rho must be positive");
    if (sparsity < 0 || noise_variance_step < 0 || kappa_target < 0) {
      throw std::invalid_argument("admm instance: negative parameter");
    }
  }
};

struct AdmmInstance {
  MatrixXd theta_true;
  std::vector<EdLocalProblem> problems;
  AdmmState initial;
};

inline AdmmInstance make_admm_instance(const AdmmInstanceParams& p, std::uint64_t seed) {
  p.validate();
  Rng rng(seed);
  AdmmInstance inst;
  inst.theta_true.resize(p.dim, p.dim);
  for (Eigen::Index i = 0; i < inst.theta_true.size(); ++i) {
    const double v = standard_normal(rng);
    inst.theta_true.data()[i] = uniform01(rng) < p.zero_fraction ? 0.0 : v;
  }
  const double x_scale = 1.0 / std::sqrt(static_cast<double>(p.dim));
  for (int j = 0; j < p.num_eds; ++j) {
    MatrixXd x(p.dim, p.samples);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = x_scale * standard_normal(rng);
    if (p.kappa_target > 0) {
      const double k = Eigen::SelfAdjointEigenSolver<MatrixXd>(x * x.transpose(), Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .maxCoeff();
      if (k > 0) x *= std::sqrt(p.kappa_target / k);
    }
    const double var = p.noise_variance_step * (j + 1);
    MatrixXd noise(p.dim, p.samples);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = std::sqrt(var) * standard_normal(rng);
    inst.problems.emplace_back(inst.theta_true * x + noise, std::move(x), var);
  }
  auto& s = inst.initial;
  s.rho = p.rho;
  s.sparsity = p.sparsity;
  s.theta0 = MatrixXd::Zero(p.dim, p.dim);
  for (const auto& prob : inst.problems) {
    s.thetas.push_back(MatrixXd::Zero(p.dim, p.dim));
    s.lambdas.push_back(p.dual_init == DualInit::kGradient ? MatrixXd(-prob.smooth_gradient(s.thetas.back()))
                                                            : MatrixXd::Zero(p.dim, p.dim));
  }
  return inst;
}

// Minimizer of sum_j 1/2 ||Y_j - theta X_j||^2 + J * sparsity * ||theta||_1,
// the problem the consensus iteration converges to. FISTA with restart.
inline MatrixXd centralized_solution(std::span<const EdLocalProblem> problems, double sparsity,
                                     double tolerance = 1e-12, int max_iterations = 200000) {
  if (problems.empty()) throw std::invalid_argument("centralized_solution: no EDs");
  MatrixXd gram = MatrixXd::Zero(problems[0].gram.rows(), problems[0].gram.cols());
  MatrixXd yxt = MatrixXd::Zero(problems[0].yxt.rows(), problems[0].yxt.cols());
  for (const auto& p : problems) {
    gram += p.gram;
    yxt += p.yxt;
  }
  const double lip = Eigen::SelfAdjointEigenSolver<MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double step = 1.0 / lip;
  const double tau = step * sparsity * static_cast<double>(problems.size());
  MatrixXd theta = MatrixXd::Zero(yxt.rows(), gram.rows());
  MatrixXd z = theta;
  double t = 1.0;
  for (int it = 0; it < max_iterations; ++it) {
    MatrixXd next = soft_threshold(z - step * (z * gram - yxt), tau);
    const double change = (next - theta).norm();
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    MatrixXd momentum = next + ((t - 1.0) / t_next) * (next - theta);
    // Restart when the momentum direction opposes the last step.
    if (((z - next).array() * (next - theta).array()).sum() > 0) {
      t = 1.0;
      z = next;
    } else {
      t = t_next;
      z = std::move(momentum);
    }
    theta = std::move(next);
    if (change <= tolerance * std::max(1.0, theta.norm())) break;
  }
  return theta;
}

// ---------------------------------------------------------------------------

struct AdmmWorkloadParams {
  AdmmInstanceParams instance{};
  LocalSolveOptions local{};
  double alpha = 1.0;
  int bits_per_entry = 32;
};

// Per round: the server forms theta0_{k+1} from the committed state, every ED
// computes its candidate local update against it (Delta_j = alpha ||change||^2),
// and only the selected EDs commit their primal and dual updates.
class AdmmWorkload final : public Workload {
 public:
  AdmmWorkload(const AdmmWorkloadParams& params, std::uint64_t seed)
      : params_(params), inst_(make_admm_instance(params.instance, derive_seed(seed, kStreamWorkload))),
        state_(inst_.initial) {
    reference_ = centralized_solution(inst_.problems, state_.sparsity);
    refresh_goal();
    begin_round(0);
  }

  std::string_view kind() const override { return "admm"; }
  int num_eds() const override { return static_cast<int>(state_.num_eds()); }

  void begin_round(int) override {
    pending_theta0_ = update_consensus(state_);
    candidates_.clear();
    for (std::size_t j = 0; j < state_.num_eds(); ++j) {
      candidates_.push_back(update_local(inst_.problems[j], state_.thetas[j], state_.lambdas[j], pending_theta0_,
                                         state_.rho, state_.sparsity, params_.local)
                                .theta);
    }
  }

  std::vector<EdUtility> marginal_utilities() const override {
    std::vector<EdUtility> out;
    for (std::size_t j = 0; j < candidates_.size(); ++j) {
      out.push_back({static_cast<int>(j), admm_marginal_utility(candidates_[j], state_.thetas[j], params_.alpha)});
    }
    return out;
  }

  void ingest(std::span<const int> selected) override {
    state_.theta0 = pending_theta0_;
    for (int id : selected) {
      const auto j = static_cast<std::size_t>(id);
      state_.thetas[j] = candidates_.at(j);
      state_.lambdas[j] = update_dual(state_.lambdas[j], state_.thetas[j], state_.theta0, state_.rho);
    }
    if (!state_.theta0.allFinite()) throw DivergenceError("admm: non-finite consensus");
    refresh_goal();
  }

  double goal_value() const override { return goal_; }

  double payload_bits(int) const override {
    return 2.0 * static_cast<double>(state_.theta0.size()) * params_.bits_per_entry;
  }

  // Relative distance of the consensus to the centralized optimum.
  double progress() const override { return relative_gap(); }

  double relative_gap() const {
    const double ref = reference_.norm();
    return (state_.theta0 - reference_).norm() / (ref > 0 ? ref : 1.0);
  }

  const AdmmState& state() const { return state_; }
  const AdmmInstance& instance() const { return inst_; }
  const MatrixXd& reference() const { return reference_; }

 private:
  void refresh_goal() { goal_ = augmented_lagrangian(state_, inst_.problems); }

  AdmmWorkloadParams params_;
  AdmmInstance inst_;
  AdmmState state_;
  MatrixXd reference_;
  MatrixXd pending_theta0_;
  std::vector<MatrixXd> candidates_;
  double goal_ = 0.0;
};

}  // namespace goalrba
