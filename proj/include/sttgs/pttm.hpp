#pragma once

// Pilot transmission time minimization: bisection over the pilot deadline T0
// with min-power feasibility checks. Feasibility is monotone in T0, so the
// bisection brackets the minimal supportable deadline.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "sttgs/channel.hpp"
#include "sttgs/powerctl.hpp"
#include "sttgs/scenario.hpp"

namespace sttgs {

struct BisectionRecord {
  double kappa = 0.0;
  bool feasible = false;
};

struct PttmResult {
  bool feasible = false;   // false: pilots cannot fit even at T0 = T
  double T0_star = 0.0;    // minimal pilot time (upper bracket end)
  Eigen::VectorXd p_pilot; // min-power vector at T0_star
  std::vector<BisectionRecord> trace;
};

// gamma_k = 2^{V_k |pilot_k| / (T0 B_k)} - 1; empty pilots need no rate.
inline SinrTargets pilot_sinr_targets(double T0, const std::vector<double>& V,
                                      const std::vector<int>& pilot_sizes,
                                      const std::vector<double>& B) {
  if (!(T0 > 0.0)) throw std::invalid_argument("pilot_sinr_targets: T0 <= 0");
  const auto K = V.size();
  SinrTargets t;
  t.gamma.resize(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    const double bits = V[k] * pilot_sizes[k];
    t.gamma(static_cast<Eigen::Index>(k)) =
        bits > 0.0 ? std::exp2(bits / (T0 * B[k])) - 1.0 : 0.0;
  }
  return t;
}

namespace detail {

// All K clients transmit during the pilot stage; feasible iff the minimal
// powers exist within P_max and their sum fits the budget (1e-9 slack for
// floating-point noise on the closed constraints).
inline std::optional<Eigen::VectorXd> pilot_feasible_powers(
    const GainMatrix& g, const ScenarioConfig& config,
    const std::vector<int>& pilot_sizes, double T0) {
  const auto targets = pilot_sinr_targets(T0, config.V, pilot_sizes, config.B);
  if (!targets.gamma.allFinite()) return std::nullopt;  // 2^x overflow
  auto p = min_power(g, targets, config.sigma2, config.P_max * (1.0 + 1e-9));
  if (!p) return std::nullopt;
  if (p->sum() > config.P_sum + 1e-9) return std::nullopt;
  return p;
}

}  // namespace detail

inline PttmResult pttm_bisect(const GainMatrix& g,
                              const ScenarioConfig& config,
                              const std::vector<int>& pilot_sizes) {
  PttmResult res;
  const double eps = config.T_epsilon;

  auto p_at_T = detail::pilot_feasible_powers(g, config, pilot_sizes, config.T);
  res.trace.push_back({config.T, p_at_T.has_value()});
  if (!p_at_T) return res;  // infeasible even with the whole budget

  double t_min = 0.0;
  double t_max = config.T;
  Eigen::VectorXd best_p = *p_at_T;
  while (t_max - t_min > eps) {
    const double kappa = 0.5 * (t_min + t_max);
    auto p = detail::pilot_feasible_powers(g, config, pilot_sizes, kappa);
    res.trace.push_back({kappa, p.has_value()});
    if (p) {
      t_max = kappa;
      best_p = *p;
    } else {
      t_min = kappa;
    }
  }

  res.feasible = true;
  res.T0_star = t_max;
  res.p_pilot = best_p;
  return res;
}

// Naive first-stage baseline: every client transmits at min(P_max, P_sum/K)
// and the pilot stage lasts until the slowest client finishes.
inline double equal_power_pilot_time(const GainMatrix& g,
                                     const ScenarioConfig& config,
                                     const std::vector<int>& pilot_sizes) {
  const int K = g.clients();
  const double p_eq = std::min(config.P_max, config.P_sum / K);
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(K, p_eq);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(K);
  Eigen::VectorXd B(K);
  for (int k = 0; k < K; ++k) B(k) = config.B[static_cast<std::size_t>(k)];
  const Eigen::VectorXd r = rate(g, p, x, B, config.sigma2);
  double t = 0.0;
  for (int k = 0; k < K; ++k) {
    const double bits =
        config.V[static_cast<std::size_t>(k)] * pilot_sizes[static_cast<std::size_t>(k)];
    if (bits <= 0.0) continue;
    if (r(k) <= 0.0) return std::numeric_limits<double>::infinity();
    t = std::max(t, bits / r(k));
  }
  return t;
}

}  // namespace sttgs
