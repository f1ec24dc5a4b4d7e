#pragma once

// Minimum-power SINR feasibility kernel. At the optimum of the power
// minimization problem every SINR constraint is tight, so the Pareto-minimal
// point solves the linear system (I - D F) p = sigma^2 D 1 directly; the
// monotone fixed-point iteration is kept as an independent cross-check.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sttgs/channel.hpp"

namespace sttgs {

struct SinrTargets {
  Eigen::VectorXd gamma;  // required linear SINR per client, >= 0
};

inline bool check_sum_budget(const Eigen::VectorXd& p, double P_sum) {
  return p.sum() <= P_sum;  // constraint is closed
}

// Componentwise-minimal power vector meeting all targets with equality, or
// nullopt when the targets are unsupportable within P_max. Clients with a
// zero target transmit nothing and cause no interference.
inline std::optional<Eigen::VectorXd> min_power(const GainMatrix& g,
                                                const SinrTargets& targets,
                                                double sigma2, double P_max) {
  const int K = g.clients();
  if (targets.gamma.size() != K)
    throw std::invalid_argument("min_power: target dimension mismatch");
  for (int k = 0; k < K; ++k)
    if (!(targets.gamma(k) >= 0.0) || !std::isfinite(targets.gamma(k)))
      throw std::invalid_argument("min_power: targets must be finite and >= 0");

  std::vector<int> active;
  for (int k = 0; k < K; ++k)
    if (targets.gamma(k) > 0.0) active.push_back(k);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(K);
  if (active.empty()) return p;

  const int n = static_cast<int>(active.size());
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const int k = active[static_cast<std::size_t>(i)];
    const double scale = targets.gamma(k) / g.H(k, k);
    for (int j = 0; j < n; ++j) {
      const int l = active[static_cast<std::size_t>(j)];
      A(i, j) = (i == j) ? 1.0 : -scale * g.H(k, l);
    }
    b(i) = scale * sigma2;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::VectorXd sol = lu.solve(b);
  if (!sol.allFinite()) return std::nullopt;
  if ((A * sol - b).lpNorm<Eigen::Infinity>() >
      1e-9 * std::max(1.0, b.lpNorm<Eigen::Infinity>()))
    return std::nullopt;  // singular or badly conditioned system
  for (int i = 0; i < n; ++i) {
    if (sol(i) <= 0.0) return std::nullopt;
    if (sol(i) > P_max * (1.0 + 1e-12)) return std::nullopt;
  }
  for (int i = 0; i < n; ++i)
    p(active[static_cast<std::size_t>(i)]) = std::min(sol(i), P_max);
  return p;
}

// Monotone fixed-point iteration from p = 0. Independent oracle for
// min_power: converges to the same minimal point when feasible.
inline std::optional<Eigen::VectorXd> min_power_iterative(
    const GainMatrix& g, const SinrTargets& targets, double sigma2,
    double P_max, double tol = 1e-12, int max_iter = 10000) {
  const int K = g.clients();
  if (targets.gamma.size() != K)
    throw std::invalid_argument("min_power_iterative: dimension mismatch");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(K);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next(K);
    for (int k = 0; k < K; ++k) {
      if (targets.gamma(k) <= 0.0) {
        next(k) = 0.0;
        continue;
      }
      double interference = 0.0;
      for (int j = 0; j < K; ++j)
        if (j != k) interference += g.H(k, j) * p(j);
      next(k) = targets.gamma(k) * (interference + sigma2) / g.H(k, k);
      if (next(k) > P_max * (1.0 + 1e-12)) return std::nullopt;
    }
    const double delta = (next - p).lpNorm<Eigen::Infinity>();
    p = next;
    if (delta < tol) {
      for (int k = 0; k < K; ++k) p(k) = std::min(p(k), P_max);
      return p;
    }
  }
  return std::nullopt;  // no convergence: treat as unsupportable
}

// Max over clients of the relative SINR shortfall; ~0 at the minimal point.
inline double sinr_equality_residual(const GainMatrix& g,
                                     const SinrTargets& targets,
                                     const Eigen::VectorXd& p, double sigma2) {
  double worst = 0.0;
  for (int k = 0; k < g.clients(); ++k) {
    if (targets.gamma(k) <= 0.0) continue;
    double interference = 0.0;
    for (int j = 0; j < g.clients(); ++j)
      if (j != k) interference += g.H(k, j) * p(j);
    const double sinr = p(k) * g.H(k, k) / (interference + sigma2);
    worst = std::max(worst,
                     std::abs(sinr - targets.gamma(k)) / targets.gamma(k));
  }
  return worst;
}

}  // namespace sttgs
