#pragma once

// Exact brute-force solver for the selection problem at small K. For a fixed
// binary selection the objective is constant, so feasibility reduces to
// min-power power control among the selected clients (unselected ones are
// silent and cause no interference).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sttgs/jcspc.hpp"
#include "sttgs/powerctl.hpp"

namespace sttgs {

struct SubsetRecord {
  std::uint32_t mask = 0;
  bool feasible = false;
  double objective = 0.0;
  Eigen::VectorXd p;  // empty when infeasible
};

struct OracleResult {
  Allocation best;
  std::vector<SubsetRecord> table;  // all 2^K subsets, by mask
};

inline OracleResult brute_force_p2(const JcspcProblem& problem) {
  const int K = problem.clients();
  if (K > 20) throw std::invalid_argument("brute_force_p2: K must be <= 20");
  problem.validate();

  OracleResult res;
  res.table.reserve(1u << K);
  int best_mask = -1;
  double best_obj = -1.0;
  int best_size = K + 1;

  for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
    SubsetRecord rec;
    rec.mask = mask;
    SinrTargets targets;
    targets.gamma = Eigen::VectorXd::Zero(K);
    for (int k = 0; k < K; ++k)
      if (mask & (1u << k)) {
        rec.objective += problem.pi_tilde(k);
        targets.gamma(k) = std::exp2(problem.eta(k)) - 1.0;
      }
    auto p = min_power(problem.H, targets, problem.sigma2, problem.P_max);
    if (p && check_sum_budget(*p, problem.P_sum + 1e-9)) {
      rec.feasible = true;
      rec.p = *p;
      const int size = __builtin_popcount(mask);
      // maximize; ties toward the smaller set, then the smaller mask
      const bool better =
          rec.objective > best_obj + 1e-12 ||
          (std::abs(rec.objective - best_obj) <= 1e-12 &&
           (size < best_size ||
            (size == best_size && static_cast<int>(mask) < best_mask)));
      if (best_mask < 0 || better) {
        best_mask = static_cast<int>(mask);
        best_obj = rec.objective;
        best_size = size;
      }
    }
    res.table.push_back(std::move(rec));
  }

  res.best.x.assign(static_cast<std::size_t>(K), 0.0);
  res.best.p.assign(static_cast<std::size_t>(K), 0.0);
  res.best.xi.assign(static_cast<std::size_t>(K), 0.0);
  if (best_mask >= 0) {
    const auto& rec = res.table[static_cast<std::size_t>(best_mask)];
    for (int k = 0; k < K; ++k)
      if (best_mask & (1 << k)) {
        res.best.x[static_cast<std::size_t>(k)] = 1.0;
        res.best.p[static_cast<std::size_t>(k)] = rec.p(k);
        res.best.xi[static_cast<std::size_t>(k)] = rec.p(k);
      }
    res.best.feasible = true;
    res.best.objective = rec.objective;
  }
  return res;
}

// Long-run projected gradient on the P3b objective over the box-and-simplex
// region; test-only independent check for the dual-bisection solver.
inline Eigen::VectorXd projected_gradient_qp(const Eigen::VectorXd& xi,
                                             const Eigen::VectorXd& x,
                                             double P_max, double P_sum,
                                             int steps = 100000) {
  const int K = static_cast<int>(xi.size());

  // Exact projection onto the box-and-halfspace region: p = clip(y - nu)
  // with nu = 0 when the budget is slack, else from bisection on the
  // original (unclipped) point.
  const auto project = [&](Eigen::VectorXd y) {
    Eigen::VectorXd q(K);
    for (int k = 0; k < K; ++k) q(k) = std::clamp(y(k), 0.0, P_max);
    if (q.sum() <= P_sum) return q;
    double lo = 0.0, hi = y.maxCoeff();
    for (int it = 0; it < 200; ++it) {
      const double nu = 0.5 * (lo + hi);
      double s = 0.0;
      for (int k = 0; k < K; ++k)
        s += std::clamp(y(k) - nu, 0.0, P_max);
      if (s > P_sum)
        lo = nu;
      else
        hi = nu;
    }
    for (int k = 0; k < K; ++k) q(k) = std::clamp(y(k) - hi, 0.0, P_max);
    return q;
  };

  double lipschitz = 0.0;
  for (int k = 0; k < K; ++k)
    lipschitz = std::max(lipschitz, 2.0 * x(k) * x(k));
  lipschitz = std::max(lipschitz, 1e-12);

  Eigen::VectorXd p = Eigen::VectorXd::Zero(K);
  for (int t = 0; t < steps; ++t) {
    Eigen::VectorXd grad(K);
    for (int k = 0; k < K; ++k)
      grad(k) = -2.0 * x(k) * (xi(k) - x(k) * p(k));
    const double step = (1.0 / lipschitz) / (1.0 + t / 5e4);
    p = project(p - step * grad);
  }
  return p;
}

}  // namespace sttgs
