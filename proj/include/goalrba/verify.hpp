#pragma once

// Property and oracle suites runnable from the command line: greedy against
// the DP optimum, the submodular bound on demand-response instances, the
// federated descent bound on its quadratic surrogate and the ADMM descent
// certificate in its smooth regime.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "goalrba/admm.hpp"
#include "goalrba/allocator.hpp"
#include "goalrba/decision.hpp"
#include "goalrba/learning.hpp"
#include "goalrba/random.hpp"
#include "goalrba/workload.hpp"

namespace goalrba {

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

struct SuiteResult {
  std::string name;
  bool passed = true;
  int cases = 0;
  std::string detail;  // worst case or first failure
};

// Random knapsack instances with every w_j <= eta * capacity; the halt-mode
// greedy must reach 1 - eta of the DP optimum.
inline SuiteResult verify_greedy_guarantee(int instances, double eta, std::uint64_t seed) {
  SuiteResult r{"greedy-vs-dp", true, 0, ""};
  Rng rng(seed);
  double worst = 1.0;
  for (int t = 0; t < instances; ++t) {
    const std::int64_t cap = 40 + static_cast<std::int64_t>(uniform_index(rng, 400));
    const int n = 5 + static_cast<int>(uniform_index(rng, 60));
    const auto wmax = std::max<std::int64_t>(1, static_cast<std::int64_t>(eta * static_cast<double>(cap)));
    std::vector<UtilityReport> items;
    for (int i = 0; i < n; ++i) {
      items.push_back({i, uniform(rng, 0.0, 10.0),
                       1 + static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(wmax)))});
    }
    const auto g = greedy_allocate(items, cap);
    const auto opt = exact_knapsack(items, cap, std::int64_t{1} << 40);
    const double ratio = suboptimality_ratio(g.value, opt.value);
    worst = std::min(worst, ratio);
    ++r.cases;
    if (ratio < 1.0 - eta) {
      r.passed = false;
      r.detail = "instance " + std::to_string(t) + " ratio " + detail::sci(ratio);
      return r;
    }
  }
  r.detail = "worst ratio " + detail::sci(worst);
  return r;
}

// Every subset of `subset_size` EDs of `instances` seeded demand-response
// scenarios satisfies C(old) - C(old U S) <= sum_j Delta_j.
inline SuiteResult verify_submodularity(int instances, int num_eds, int subset_size, std::uint64_t seed) {
  SuiteResult r{"submodularity", true, 0, ""};
  double worst_slack = std::numeric_limits<double>::infinity();
  for (int t = 0; t < instances; ++t) {
    DemandResponseParams p;
    p.num_eds = num_eds;
    DemandResponseWorkload w(p, derive_seed(seed, kStreamWorkload, static_cast<std::uint64_t>(t)));
    // Enumerate subsets of the first `subset_size` EDs.
    const int k = std::min(subset_size, num_eds);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      std::vector<int> s;
      for (int j = 0; j < k; ++j) {
        if (mask >> j & 1) s.push_back(j);
      }
      const auto c = submodular_bound_check(w, s);
      ++r.cases;
      worst_slack = std::min(worst_slack, c.rhs - c.lhs);
      if (!c.holds) {
        r.passed = false;
        r.detail = "instance " + std::to_string(t) + " mask " + std::to_string(mask);
        return r;
      }
    }
  }
  r.detail = "min slack " + detail::sci(worst_slack);
  return r;
}

// Full-participation descent bound on random quadratic surrogates.
inline SuiteResult verify_federated_descent(int draws, std::uint64_t seed, double tolerance = 1e-10) {
  SuiteResult r{"federated-descent", true, 0, ""};
  Rng rng(seed);
  double worst_gap = 0.0;
  for (int d = 0; d < draws; ++d) {
    const double kappa = uniform(rng, 0.1, 10.0);
    const double eta = (2.0 / kappa) * (1.0 - uniform01(rng));
    const int dim = 2 + static_cast<int>(uniform_index(rng, 8));
    const int eds = 1 + static_cast<int>(uniform_index(rng, 6));
    std::vector<Eigen::VectorXd> centers;
    std::vector<double> samples;
    for (int j = 0; j < eds; ++j) {
      Eigen::VectorXd c(dim);
      for (int i = 0; i < dim; ++i) c(i) = standard_normal(rng);
      centers.push_back(c);
      samples.push_back(1.0 + static_cast<double>(uniform_index(rng, 100)));
    }
    const QuadraticSurrogate q(centers, samples, kappa);
    Eigen::VectorXd theta(dim);
    for (int i = 0; i < dim; ++i) theta(i) = 2.0 * standard_normal(rng);
    const auto grads = q.gradients(theta);
    const Eigen::VectorXd g = weighted_mean_gradient(grads);
    const auto c = descent_bound_check(q.loss(theta), q.loss(aggregate_step(theta, grads, eta)), g, g, eta, kappa,
                                       tolerance * std::max(1.0, std::abs(q.loss(theta))));
    ++r.cases;
    worst_gap = std::max(worst_gap, std::abs(c.change - c.bound));
    if (!c.holds) {
      r.passed = false;
      r.detail = "draw " + std::to_string(d);
      return r;
    }
  }
  r.detail = "max |change - bound| " + detail::sci(worst_gap);
  return r;
}

struct AdmmCertificateSummary {
  SuiteResult certificate{"admm-certificate", true, 0, ""};
  SuiteResult dual_bound{"admm-dual-bound", true, 0, ""};
};

// Smooth-mode runs with random partial participation in the certificate
// regime (kappa_j = 1, rho = 2, gradient-consistent duals).
inline AdmmCertificateSummary verify_admm_certificate(int runs, int rounds, std::uint64_t seed, int dim = 8,
                                                      int num_eds = 4) {
  AdmmCertificateSummary out;
  AdmmInstanceParams p;
  p.dim = dim;
  p.num_eds = num_eds;
  p.samples = 30;
  p.sparsity = 0.0;
  p.rho = 2.0;
  p.kappa_target = 1.0;
  p.dual_init = DualInit::kGradient;
  const LocalSolveOptions local{1e-12, 5000};
  double min_margin = std::numeric_limits<double>::infinity();
  for (int run = 0; run < runs; ++run) {
    const auto inst = make_admm_instance(p, derive_seed(seed, kStreamWorkload, static_cast<std::uint64_t>(run)));
    AdmmState s = inst.initial;
    Rng rng(derive_seed(seed, kStreamBatch, static_cast<std::uint64_t>(run)));
    for (int k = 0; k < rounds; ++k) {
      std::vector<int> sel;
      for (int j = 0; j < num_eds; ++j) {
        if (uniform01(rng) < 0.5) sel.push_back(j);
      }
      const AdmmState next = admm_round(s, inst.problems, sel, local);
      const auto c = descent_certificate(s, next, inst.problems, sel);
      const auto d = dual_bound_check(s, next, inst.problems, sel);
      ++out.certificate.cases;
      ++out.dual_bound.cases;
      min_margin = std::min(min_margin, c.decrease - c.bound);
      if (!c.holds && out.certificate.passed) {
        out.certificate.passed = false;
        out.certificate.detail = "run " + std::to_string(run) + " round " + std::to_string(k);
      }
      if (!d.holds && out.dual_bound.passed) {
        out.dual_bound.passed = false;
        out.dual_bound.detail = "run " + std::to_string(run) + " round " + std::to_string(k);
      }
      s = next;
    }
  }
  if (out.certificate.passed) out.certificate.detail = "min decrease - bound " + detail::sci(min_margin);
  return out;
}

}  // namespace goalrba
