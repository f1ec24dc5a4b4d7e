#pragma once

// Joint client selection / power control problem data, the penalty functions
// of the reformulation, their MM surrogates, and the feasibility certifier
// shared by the solver, the oracle, and the baselines.
//
// Notation: A_k(xi) = sum_l H_{k,l} xi_l / sigma^2 + 1 (all l),
//           B_k(xi) = same sum without l = k. The rate constraint is
//           Phi_k = eta_k x_k - log2(A_k/B_k) <= 0, and its surrogate
//           linearizes ln B_k at the expansion point.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sttgs/channel.hpp"
#include "sttgs/scenario.hpp"

namespace sttgs {

struct JcspcProblem {
  GainMatrix H;
  Eigen::VectorXd pi_tilde;  // predicted per-client loss, >= 0
  Eigen::VectorXd eta;       // rate target (bit/s/Hz), >= 0
  double P_max = 0.0;
  double P_sum = 0.0;
  double sigma2 = 0.0;
  double beta = 0.1;
  double gamma = 0.0;
  int I_max = 60;
  int J_max = 20;
  double conv_tol = 1e-6;  // outer early-exit on ||dx||, ||dp||

  int clients() const { return H.clients(); }

  void validate() const {
    const int K = clients();
    if (pi_tilde.size() != K || eta.size() != K)
      throw std::invalid_argument("jcspc: dimension mismatch");
    for (int k = 0; k < K; ++k) {
      if (!(pi_tilde(k) >= 0.0))
        throw std::invalid_argument("jcspc: pi_tilde must be >= 0");
      if (!(eta(k) >= 0.0) || !std::isfinite(eta(k)))
        throw std::invalid_argument("jcspc: eta must be finite and >= 0");
    }
    if (!(P_max > 0.0 && P_sum > 0.0 && sigma2 > 0.0))
      throw std::invalid_argument("jcspc: budgets and sigma2 must be > 0");
    if (!(beta > 0.0 && gamma > 0.0))
      throw std::invalid_argument("jcspc: penalties must be > 0");
  }
};

// eta_k = V_k (|D_k| - |pilot_k|) / ((T - T0) B_k)
inline Eigen::VectorXd eta_targets(const ScenarioConfig& config, double T0,
                                   const std::vector<int>& pilot_sizes) {
  if (!(config.T > T0))
    throw std::invalid_argument("eta_targets: requires T > T0");
  Eigen::VectorXd eta(config.K);
  for (int k = 0; k < config.K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const int remaining = config.D_sizes[ku] - pilot_sizes[ku];
    eta(k) = config.V[ku] * remaining / ((config.T - T0) * config.B[ku]);
  }
  return eta;
}

inline double zero_one_loss(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (int k = 0; k < x.size(); ++k) s += std::min(x(k), 1.0 - x(k));
  return s;
}

// ---------------------------------------------------------------------------
// Binary-promotion penalty and its linear majorizer.

inline double phi1(const Eigen::VectorXd& x, double beta) {
  double s = 0.0;
  for (int k = 0; k < x.size(); ++k) s += x(k) * (1.0 - x(k));
  return s / beta;
}

inline double phi1_surrogate(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& x_star, double beta) {
  double s = 0.0;
  for (int k = 0; k < x.size(); ++k)
    s += x(k) / beta - 2.0 * x_star(k) * x(k) / beta +
         x_star(k) * x_star(k) / beta;
  return s;
}

inline Eigen::VectorXd phi1_grad(const Eigen::VectorXd& x, double beta) {
  return (Eigen::VectorXd::Ones(x.size()) - 2.0 * x) / beta;
}

inline Eigen::VectorXd phi1_surrogate_grad(const Eigen::VectorXd& x_star,
                                           double beta) {
  return (Eigen::VectorXd::Ones(x_star.size()) - 2.0 * x_star) / beta;
}

// ---------------------------------------------------------------------------
// Rate constraint function Phi_k and its convex majorizer.

namespace detail {

// sum_{j != k} H_{k,j} xi_j, i.e. B_k(xi)*sigma2 - sigma2.
inline double cross_power(const GainMatrix& H, int k,
                          const Eigen::VectorXd& xi) {
  double s = 0.0;
  for (int j = 0; j < xi.size(); ++j)
    if (j != k) s += H.H(k, j) * xi(j);
  return s;
}

}  // namespace detail

inline double phi_k(const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                    const GainMatrix& H, double sigma2,
                    const Eigen::VectorXd& eta, int k) {
  const double denom = detail::cross_power(H, k, xi) + sigma2;
  const double sinr = xi(k) * H.H(k, k) / denom;
  if (denom <= 0.0 || sinr <= -1.0)
    throw std::domain_error("phi_k: log argument not positive");
  return eta(k) * x(k) - std::log1p(sinr) / M_LN2;
}

// Computed in long double: the barrier solver divides by margins as small
// as ~1e-10, where double-precision cancellation between the log terms
// would dominate the multiplier.
inline double phi_k_surrogate(const Eigen::VectorXd& x,
                              const Eigen::VectorXd& xi,
                              const Eigen::VectorXd& xi_star,
                              const GainMatrix& H, double sigma2,
                              const Eigen::VectorXd& eta, int k) {
  // B*_k in units of sigma2, and the deltas A(xi)-B* and B(xi)-B*.
  long double cross = 0.0L, cross_star = 0.0L;
  for (int j = 0; j < xi.size(); ++j) {
    if (j == k) continue;
    cross += static_cast<long double>(H.H(k, j)) * xi(j);
    cross_star += static_cast<long double>(H.H(k, j)) * xi_star(j);
  }
  const long double b_star = cross_star / sigma2 + 1.0L;
  const long double db = (cross - cross_star) / sigma2;
  const long double da =
      static_cast<long double>(H.H(k, k)) * xi(k) / sigma2 + db;
  const long double log_arg = da / b_star;
  if (log_arg <= -1.0L)
    throw std::domain_error("phi_k_surrogate: log argument not positive");
  return static_cast<double>(
      static_cast<long double>(eta(k)) * x(k) -
      (std::log1p(log_arg) - db / b_star) / static_cast<long double>(M_LN2));
}

// Gradient of Phi_k in (x, xi); the x block is eta_k e_k.
inline void phi_k_grad(const Eigen::VectorXd& xi, const GainMatrix& H,
                       double sigma2, const Eigen::VectorXd& eta, int k,
                       Eigen::VectorXd& gx, Eigen::VectorXd& gxi) {
  const int K = static_cast<int>(xi.size());
  gx = Eigen::VectorXd::Zero(K);
  gx(k) = eta(k);
  const double b = detail::cross_power(H, k, xi) + sigma2;
  const double a = b + H.H(k, k) * xi(k);
  gxi.resize(K);
  for (int l = 0; l < K; ++l) {
    const double al = H.H(k, l);
    const double bl = (l == k) ? 0.0 : H.H(k, l);
    gxi(l) = -(al / a - bl / b) / M_LN2;
  }
}

// Gradient of the surrogate; the linearized term makes the xi block depend
// on xi only through A_k.
inline void phi_k_surrogate_grad(const Eigen::VectorXd& xi,
                                 const Eigen::VectorXd& xi_star,
                                 const GainMatrix& H, double sigma2,
                                 const Eigen::VectorXd& eta, int k,
                                 Eigen::VectorXd& gx, Eigen::VectorXd& gxi) {
  const int K = static_cast<int>(xi.size());
  gx = Eigen::VectorXd::Zero(K);
  gx(k) = eta(k);
  const double b_star = detail::cross_power(H, k, xi_star) + sigma2;
  const double a =
      detail::cross_power(H, k, xi) + sigma2 + H.H(k, k) * xi(k);
  gxi.resize(K);
  for (int l = 0; l < K; ++l) {
    const double al = H.H(k, l);
    const double bl = (l == k) ? 0.0 : H.H(k, l);
    gxi(l) = -(al / a - bl / b_star) / M_LN2;
  }
}

// ---------------------------------------------------------------------------
// Feasibility certifier for the final (binary) allocations. Checks the
// deadline-rate, power-box, sum-power, and binary constraints directly, with
// non-strict inequalities and 1e-9 absolute slack. Unselected clients must
// be silent.

struct Certificate {
  bool ok = false;
  double rate_slack = 0.0;   // min over selected of log2(1+SINR) - eta
  double power_slack = 0.0;  // min of P_max - p_k and P_sum - sum p
  std::string violation;     // empty when ok
};

inline Certificate certify_allocation(const JcspcProblem& problem,
                                      const Allocation& alloc,
                                      double slack = 1e-9) {
  const int K = problem.clients();
  Certificate cert;
  cert.rate_slack = std::numeric_limits<double>::infinity();
  cert.power_slack = std::numeric_limits<double>::infinity();
  if (static_cast<int>(alloc.x.size()) != K ||
      static_cast<int>(alloc.p.size()) != K) {
    cert.violation = "dimension mismatch";
    return cert;
  }
  double psum = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (alloc.x[ku] != 0.0 && alloc.x[ku] != 1.0) {
      cert.violation = "x not binary at client " + std::to_string(k);
      return cert;
    }
    if (alloc.p[ku] < -slack || alloc.p[ku] > problem.P_max + slack) {
      cert.violation = "power box violated at client " + std::to_string(k);
      return cert;
    }
    if (alloc.x[ku] == 0.0 && alloc.p[ku] > 1e-12) {
      cert.violation = "unselected client " + std::to_string(k) + " transmits";
      return cert;
    }
    cert.power_slack = std::min(cert.power_slack, problem.P_max - alloc.p[ku]);
    psum += alloc.p[ku];
  }
  if (psum > problem.P_sum + slack) {
    cert.violation = "sum power exceeds budget";
    return cert;
  }
  cert.power_slack = std::min(cert.power_slack, problem.P_sum - psum);
  for (int k = 0; k < K; ++k) {
    if (alloc.x[static_cast<std::size_t>(k)] != 1.0) continue;
    double interference = 0.0;
    for (int j = 0; j < K; ++j)
      if (j != k)
        interference += alloc.x[static_cast<std::size_t>(j)] *
                        alloc.p[static_cast<std::size_t>(j)] * problem.H.H(k, j);
    const double sinr = alloc.p[static_cast<std::size_t>(k)] *
                        problem.H.H(k, k) / (interference + problem.sigma2);
    const double margin = std::log2(1.0 + sinr) - problem.eta(k);
    cert.rate_slack = std::min(cert.rate_slack, margin);
    if (margin < -slack) {
      cert.violation = "deadline rate violated at client " + std::to_string(k);
      return cert;
    }
  }
  cert.ok = true;
  return cert;
}

inline double allocation_objective(const JcspcProblem& problem,
                                   const Allocation& alloc) {
  double s = 0.0;
  for (int k = 0; k < problem.clients(); ++k)
    s += alloc.x[static_cast<std::size_t>(k)] * problem.pi_tilde(k);
  return s;
}

}  // namespace sttgs
