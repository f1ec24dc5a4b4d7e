#pragma once

// Scheduling-level stand-ins for the three comparison schemes: throughput
// (interference-free water-filling), max-min fairness (common SINR target),
// and information-only greedy selection. Deterministic simplifications of
// the cited schemes; each output passes the same feasibility certifier as
// the solver's repaired allocation.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sttgs/jcspc.hpp"
#include "sttgs/powerctl.hpp"

namespace sttgs {

namespace detail {

inline Allocation finalize_baseline(const JcspcProblem& problem,
                                    const std::vector<bool>& selected,
                                    const Eigen::VectorXd& p) {
  const int K = problem.clients();
  Allocation alloc;
  alloc.x.assign(static_cast<std::size_t>(K), 0.0);
  alloc.p.assign(static_cast<std::size_t>(K), 0.0);
  alloc.xi.assign(static_cast<std::size_t>(K), 0.0);
  for (int k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (selected[ku]) {
      alloc.x[ku] = 1.0;
      alloc.p[ku] = p(k);
      alloc.xi[ku] = p(k);
    }
  }
  alloc.feasible = certify_allocation(problem, alloc).ok;
  alloc.objective = allocation_objective(problem, alloc);
  return alloc;
}

// log2(1 + SINR_k) with the given active powers.
inline double spectral_efficiency(const JcspcProblem& problem,
                                  const Eigen::VectorXd& p, int k) {
  double interference = 0.0;
  for (int j = 0; j < problem.clients(); ++j)
    if (j != k) interference += p(j) * problem.H.H(k, j);
  return std::log2(1.0 +
                   p(k) * problem.H.H(k, k) / (interference + problem.sigma2));
}

}  // namespace detail

// Water-filling on the interference-free rates sum_k B_k log2(1 + g_k p_k),
// then one selection pass against the deadlines with interference included,
// then unselected powers zeroed (one fixed re-check pass).
inline Allocation max_rate_baseline(const JcspcProblem& problem,
                                    const Eigen::VectorXd& B) {
  const int K = problem.clients();
  Eigen::VectorXd g(K);
  for (int k = 0; k < K; ++k) g(k) = problem.H.H(k, k) / problem.sigma2;

  const auto powers_at = [&](double nu) {
    Eigen::VectorXd p(K);
    for (int k = 0; k < K; ++k)
      p(k) = std::clamp(B(k) / (nu * M_LN2) - 1.0 / g(k), 0.0, problem.P_max);
    return p;
  };

  Eigen::VectorXd p;
  if (K * problem.P_max <= problem.P_sum) {
    p = Eigen::VectorXd::Constant(K, problem.P_max);
  } else {
    double lo = 0.0, hi = 0.0;  // sum(lo) > P_sum, sum(hi) <= P_sum
    for (int k = 0; k < K; ++k) hi = std::max(hi, B(k) * g(k) / M_LN2);
    for (int it = 0; it < 200; ++it) {
      const double nu = 0.5 * (lo + hi);
      if (powers_at(nu).sum() > problem.P_sum)
        lo = nu;
      else
        hi = nu;
    }
    p = powers_at(hi);
  }

  std::vector<bool> selected(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    selected[static_cast<std::size_t>(k)] =
        detail::spectral_efficiency(problem, p, k) >= problem.eta(k) - 1e-9;
  Eigen::VectorXd p_final = p;
  for (int k = 0; k < K; ++k)
    if (!selected[static_cast<std::size_t>(k)]) p_final(k) = 0.0;
  return detail::finalize_baseline(problem, selected, p_final);
}

// Largest common SINR target supportable by min-power control within both
// budgets; clients whose deadline the shared rate meets are selected.
inline Allocation fairness_baseline(const JcspcProblem& problem) {
  const int K = problem.clients();
  double hi = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k)
    hi = std::min(hi, problem.P_max * problem.H.H(k, k) / problem.sigma2);
  hi *= 1.0 + 1e-9;  // p_k >= gamma sigma2 / H_kk makes larger gamma impossible

  const auto feasible_powers =
      [&](double gamma_t) -> std::optional<Eigen::VectorXd> {
    SinrTargets targets;
    targets.gamma = Eigen::VectorXd::Constant(K, gamma_t);
    auto p = min_power(problem.H, targets, problem.sigma2, problem.P_max);
    if (!p || p->sum() > problem.P_sum + 1e-9) return std::nullopt;
    return p;
  };

  double lo = 0.0;
  Eigen::VectorXd p_best = Eigen::VectorXd::Zero(K);
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (auto p = feasible_powers(mid)) {
      lo = mid;
      p_best = *p;
    } else {
      hi = mid;
    }
  }

  const double common_rate = std::log2(1.0 + lo);
  std::vector<bool> selected(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    selected[static_cast<std::size_t>(k)] = common_rate >= problem.eta(k) - 1e-9;
  Eigen::VectorXd p_final = p_best;
  for (int k = 0; k < K; ++k)
    if (!selected[static_cast<std::size_t>(k)]) p_final(k) = 0.0;
  return detail::finalize_baseline(problem, selected, p_final);
}

// Greedy by predicted loss, ignoring channel quality: split the power budget
// equally over the tentative set and stop at the first deadline violation.
inline Allocation active_learning_baseline(const JcspcProblem& problem) {
  const int K = problem.clients();
  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return problem.pi_tilde(a) > problem.pi_tilde(b);
  });

  std::vector<bool> selected(static_cast<std::size_t>(K), false);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(K);
  int m = 0;
  for (const int cand : order) {
    selected[static_cast<std::size_t>(cand)] = true;
    ++m;
    const double p_eq = std::min(problem.P_max, problem.P_sum / m);
    Eigen::VectorXd p_try = Eigen::VectorXd::Zero(K);
    for (int k = 0; k < K; ++k)
      if (selected[static_cast<std::size_t>(k)]) p_try(k) = p_eq;
    bool ok = true;
    for (int k = 0; k < K && ok; ++k)
      if (selected[static_cast<std::size_t>(k)])
        ok = detail::spectral_efficiency(problem, p_try, k) >=
             problem.eta(k) - 1e-9;
    if (!ok) {
      selected[static_cast<std::size_t>(cand)] = false;
      break;  // first violation stops the greedy pass
    }
    p = p_try;
  }
  return detail::finalize_baseline(problem, selected, p);
}

}  // namespace sttgs
