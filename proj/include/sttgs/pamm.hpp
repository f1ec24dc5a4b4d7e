#pragma once

// Penalty alternating majorization minimization for the joint selection /
// power-control problem. Outer loop alternates the (x, xi) block against the
// power block; the (x, xi) subproblem is convexified with MM surrogates and
// solved by a damped-Newton log-barrier method; the power subproblem is a
// box-and-simplex least squares solved exactly by dual bisection.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sttgs/jcspc.hpp"
#include "sttgs/powerctl.hpp"

namespace sttgs {

class NoStrictInterior : public std::runtime_error {
 public:
  NoStrictInterior(const std::string& what, int constraint)
      : std::runtime_error(what), constraint_index(constraint) {}
  int constraint_index;
};

struct PammIterRecord {
  int outer = 0;
  double dx_norm = 0.0;       // ||x_{i+1} - x_i||_2
  double dp_norm = 0.0;       // ||p_{i+1} - p_i||_2
  double zero_one = 0.0;      // sum_k min(x_k, 1 - x_k)
  double objective = 0.0;     // penalized P3 objective (minimized)
  double penalty_residual = 0.0;  // ||xi - x .* p||_inf
};

struct PammTrace {
  std::vector<PammIterRecord> iters;
  int gamma_escalations = 0;
};

struct P3aResult {
  Eigen::VectorXd x;
  Eigen::VectorXd xi;
  double kkt_residual = 0.0;    // gradient norm of the final barrier stage
  double max_constraint = 0.0;  // max_k surrogate constraint value
  int newton_iterations = 0;
};

// ---------------------------------------------------------------------------
// P3b: exact minimizer of sum_k (xi_k - x_k p_k)^2 over the power box and
// sum budget. KKT: p_k(mu) = clip(xi_k/x_k - mu/(2 x_k^2), 0, P_max) with
// mu = 0 if the unconstrained point fits the budget, else mu from bisection
// on the (monotone) budget equation.

inline Eigen::VectorXd solve_p3b(const Eigen::VectorXd& xi,
                                 const Eigen::VectorXd& x, double P_max,
                                 double P_sum) {
  const int K = static_cast<int>(xi.size());
  if (x.size() != K) throw std::invalid_argument("solve_p3b: size mismatch");
  for (int k = 0; k < K; ++k) {
    if (xi(k) < 0.0) throw std::invalid_argument("solve_p3b: xi must be >= 0");
    if (x(k) < 0.0 || x(k) > 1.0)
      throw std::invalid_argument("solve_p3b: x must be in [0,1]");
  }

  const auto powers_at = [&](double mu) {
    Eigen::VectorXd p(K);
    for (int k = 0; k < K; ++k) {
      if (x(k) <= 1e-12) {
        p(k) = 0.0;
        continue;
      }
      p(k) = std::clamp(xi(k) / x(k) - mu / (2.0 * x(k) * x(k)), 0.0, P_max);
    }
    return p;
  };

  Eigen::VectorXd p = powers_at(0.0);
  if (p.sum() <= P_sum) return p;

  double lo = 0.0;  // sum(lo) > P_sum
  double hi = 0.0;
  for (int k = 0; k < K; ++k) hi = std::max(hi, 2.0 * x(k) * xi(k));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (powers_at(mid).sum() > P_sum)
      lo = mid;
    else
      hi = mid;
  }
  return powers_at(hi);
}

// ---------------------------------------------------------------------------
// P3a[n+1]: log-barrier solver for the convex surrogate subproblem. Internal
// arithmetic runs in long double: at the final barrier weight (m/t < 1e-8)
// active margins shrink to ~1e-12, and the double-precision Hessian's own
// rounding, amplified by its condition number, caps the reachable gradient
// norm above the 1e-6 stationarity target.

namespace detail {

using BarVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using BarMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

struct BarrierWorkspace {
  int K;
  BarMat H;
  BarVec pi_tilde, eta, x_star, xi_star, p_fixed;
  long double sigma2, beta, gamma, P_max;
  BarVec b_star;  // B_k(xi*) in units of sigma2

  BarrierWorkspace(const JcspcProblem& p, const Eigen::VectorXd& xs,
                   const Eigen::VectorXd& xis, const Eigen::VectorXd& pf)
      : K(p.clients()),
        H(p.H.H.cast<long double>()),
        pi_tilde(p.pi_tilde.cast<long double>()),
        eta(p.eta.cast<long double>()),
        x_star(xs.cast<long double>()),
        xi_star(xis.cast<long double>()),
        p_fixed(pf.cast<long double>()),
        sigma2(p.sigma2),
        beta(p.beta),
        gamma(p.gamma),
        P_max(p.P_max) {
    b_star.resize(K);
    for (int k = 0; k < K; ++k) {
      long double cross = 0.0L;
      for (int j = 0; j < K; ++j)
        if (j != k) cross += H(k, j) * xi_star(j);
      b_star(k) = cross / sigma2 + 1.0L;
    }
  }

  // Smooth objective of P3a (without barrier terms).
  long double objective(const BarVec& x, const BarVec& xi) const {
    long double f = 0.0L;
    for (int k = 0; k < K; ++k) {
      f += -pi_tilde(k) * x(k) + x(k) / beta -
           2.0L * x_star(k) * x(k) / beta + x_star(k) * x_star(k) / beta;
      const long double r = xi(k) - x(k) * p_fixed(k);
      f += gamma * r * r;
    }
    return f;
  }

  long double constraint(const BarVec& x, const BarVec& xi, int k) const {
    long double cross = 0.0L, cross_star = 0.0L;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      cross += H(k, j) * xi(j);
      cross_star += H(k, j) * xi_star(j);
    }
    const long double db = (cross - cross_star) / sigma2;
    const long double da = H(k, k) * xi(k) / sigma2 + db;
    const long double log_arg = da / b_star(k);
    if (log_arg <= -1.0L)
      throw std::domain_error("p3a barrier: log argument not positive");
    return eta(k) * x(k) -
           (std::log1p(log_arg) - db / b_star(k)) / static_cast<long double>(M_LN2);
  }

  bool in_domain(const BarVec& x, const BarVec& xi) const {
    for (int k = 0; k < K; ++k) {
      if (!(x(k) > 0.0L && x(k) < 1.0L)) return false;
      if (!(xi(k) > 0.0L && xi(k) < P_max)) return false;
    }
    for (int k = 0; k < K; ++k)
      if (!(constraint(x, xi, k) < 0.0L)) return false;
    return true;
  }

  // Barrier-augmented value F_t = f + (1/t) * sum of -log terms.
  long double value(const BarVec& x, const BarVec& xi, long double t) const {
    long double v = objective(x, xi);
    long double logs = 0.0L;
    for (int k = 0; k < K; ++k) {
      logs -= std::log(-constraint(x, xi, k));
      logs -= std::log(x(k)) + std::log(1.0L - x(k));
      logs -= std::log(xi(k)) + std::log(P_max - xi(k));
    }
    return v + logs / t;
  }

  // Gradient and Hessian of F_t over z = [x; xi].
  void derivatives(const BarVec& x, const BarVec& xi, long double t,
                   BarVec& grad, BarMat& hess) const {
    const int n = 2 * K;
    grad.setZero(n);
    hess.setZero(n, n);

    for (int k = 0; k < K; ++k) {
      const long double c = p_fixed(k);
      const long double r = xi(k) - x(k) * c;
      grad(k) += -pi_tilde(k) + (1.0L - 2.0L * x_star(k)) / beta -
                 2.0L * gamma * c * r;
      grad(K + k) += 2.0L * gamma * r;
      hess(k, k) += 2.0L * gamma * c * c;
      hess(K + k, K + k) += 2.0L * gamma;
      hess(k, K + k) += -2.0L * gamma * c;
      hess(K + k, k) += -2.0L * gamma * c;
    }

    BarVec cg(n);
    for (int k = 0; k < K; ++k) {
      const long double g = constraint(x, xi, k);
      long double a_val = H(k, k) * xi(k) + sigma2;
      for (int j = 0; j < K; ++j)
        if (j != k) a_val += H(k, j) * xi(j);
      cg.setZero();
      cg(k) = eta(k);
      for (int l = 0; l < K; ++l) {
        const long double al = H(k, l);
        const long double bl = (l == k) ? 0.0L : H(k, l);
        cg(K + l) = -(al / a_val - bl / (b_star(k) * sigma2)) /
                    static_cast<long double>(M_LN2);
      }
      grad += cg / (t * (-g));
      hess += cg * cg.transpose() / (t * g * g);
      // curvature of the surrogate itself: (1/ln2) a a^T / A^2 in xi
      for (int l = 0; l < K; ++l)
        for (int m = 0; m < K; ++m)
          hess(K + l, K + m) +=
              H(k, l) * H(k, m) /
              (static_cast<long double>(M_LN2) * a_val * a_val * t * (-g));
    }

    for (int k = 0; k < K; ++k) {
      grad(k) += (-1.0L / x(k) + 1.0L / (1.0L - x(k))) / t;
      hess(k, k) +=
          (1.0L / (x(k) * x(k)) + 1.0L / ((1.0L - x(k)) * (1.0L - x(k)))) / t;
      const long double hi_gap = P_max - xi(k);
      grad(K + k) += (-1.0L / xi(k) + 1.0L / hi_gap) / t;
      hess(K + k, K + k) +=
          (1.0L / (xi(k) * xi(k)) + 1.0L / (hi_gap * hi_gap)) / t;
    }
  }
};

}  // namespace detail

// Solves the inner convex surrogate problem from a strictly feasible start.
// t increases geometrically from 1 until m/t < 1e-8 (m = 5K constraints).
inline P3aResult solve_p3a_inner(const JcspcProblem& problem,
                                 const Eigen::VectorXd& x_n,
                                 const Eigen::VectorXd& xi_n,
                                 const Eigen::VectorXd& p_fixed) {
  const int K = problem.clients();
  detail::BarrierWorkspace ws(problem, x_n, xi_n, p_fixed);

  detail::BarVec x = x_n.cast<long double>();
  detail::BarVec xi = xi_n.cast<long double>();
  if (!ws.in_domain(x, xi)) {
    for (int k = 0; k < K; ++k)
      if (!(ws.constraint(x, xi, k) < 0.0L))
        throw NoStrictInterior(
            "solve_p3a_inner: start violates surrogate constraint " +
                std::to_string(k),
            k);
    throw NoStrictInterior("solve_p3a_inner: start not strictly inside box",
                           -1);
  }

  P3aResult res;
  const long double m_constraints = 5.0L * K;
  long double t = 1.0L;
  detail::BarVec grad;
  detail::BarMat hess;
  detail::BarVec best_x, best_xi;
  for (;;) {
    const bool last_stage = (m_constraints / t < 1e-8L);
    long double best_grad = std::numeric_limits<long double>::infinity();
    for (int it = 0; it < 80; ++it) {
      ws.derivatives(x, xi, t, grad, hess);
      const long double gnorm = grad.lpNorm<Eigen::Infinity>();
      if (last_stage && gnorm < best_grad) {
        best_grad = gnorm;
        best_x = x;
        best_xi = xi;
      }
      if (last_stage && gnorm < 1e-9L) break;

      Eigen::LDLT<detail::BarMat> ldlt(hess);
      detail::BarVec step = -ldlt.solve(grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        detail::BarMat reg = hess;
        reg.diagonal().array() += 1e-12L * hess.diagonal().maxCoeff();
        step = -Eigen::LDLT<detail::BarMat>(reg).solve(grad);
      } else {
        step -= ldlt.solve(hess * step + grad);  // iterative refinement
      }
      const long double decrement = -grad.dot(step);
      if (!last_stage && 0.5L * decrement < 1e-16L * (1.0L + t)) break;
      ++res.newton_iterations;

      // Damped Newton: full steps in the quadratic phase, 1/(1+lambda)
      // damping far out, plus plain backtracking into the barrier domain.
      const long double lambda =
          std::sqrt(std::max<long double>(decrement, 0.0L));
      long double alpha = lambda > 0.25L ? 1.0L / (1.0L + lambda) : 1.0L;
      detail::BarVec xt, xit;
      bool in = false;
      for (; alpha >= 1e-18L; alpha *= 0.5L) {
        xt = x + alpha * step.head(K);
        xit = xi + alpha * step.tail(K);
        if (ws.in_domain(xt, xit)) {
          in = true;
          break;
        }
      }
      if (!in) break;  // wedged against the boundary: keep the iterate
      x = xt;
      xi = xit;
      if (last_stage && it == 79) break;
    }
    if (last_stage) break;
    t *= 10.0L;
  }
  if (best_x.size() > 0) {
    ws.derivatives(best_x, best_xi, t, grad, hess);
    x = best_x;
    xi = best_xi;
  } else {
    ws.derivatives(x, xi, t, grad, hess);
  }

  res.x = x.cast<double>();
  res.xi = xi.cast<double>();
  res.kkt_residual = static_cast<double>(grad.lpNorm<Eigen::Infinity>());
  res.max_constraint = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k)
    res.max_constraint = std::max(
        res.max_constraint, static_cast<double>(ws.constraint(x, xi, k)));
  return res;
}

// ---------------------------------------------------------------------------
// Full PAMM run. Clients with eta = 0 have nothing left to send: they are
// fixed at x = 1 with zero power before solving and add their loss to the
// objective unconditionally.

namespace detail {

struct ReducedProblem {
  JcspcProblem prob;       // restricted to free clients
  std::vector<int> ids;    // free client -> original index
};

inline ReducedProblem reduce_problem(const JcspcProblem& full) {
  ReducedProblem red;
  for (int k = 0; k < full.clients(); ++k)
    if (full.eta(k) > 0.0) red.ids.push_back(k);
  const int n = static_cast<int>(red.ids.size());
  red.prob = full;
  red.prob.H.H.resize(n, n);
  red.prob.pi_tilde.resize(n);
  red.prob.eta.resize(n);
  for (int i = 0; i < n; ++i) {
    const int k = red.ids[static_cast<std::size_t>(i)];
    red.prob.pi_tilde(i) = full.pi_tilde(k);
    red.prob.eta(i) = full.eta(k);
    for (int j = 0; j < n; ++j)
      red.prob.H.H(i, j) = full.H.H(k, red.ids[static_cast<std::size_t>(j)]);
  }
  return red;
}

// Finds a strictly feasible start for the first surrogate problem. Order:
// the plain coupled start, a uniform xi shrink, a min-power retarget of xi
// at the current x, and a uniform x shrink as a last resort. Whenever xi
// moves, p is re-anchored to xi/x: leaving p at the hot symmetric value
// makes the coupling term drag every client down together, which the
// binary-penalty tangents then lock in at the all-zero vertex.
inline void phase_one(const JcspcProblem& prob, Eigen::VectorXd& x,
                      Eigen::VectorXd& xi, Eigen::VectorXd& p) {
  const auto margin = [&](const Eigen::VectorXd& xv,
                          const Eigen::VectorXd& xiv) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < prob.clients(); ++k)
      worst = std::max(worst,
                       phi_k(xv, xiv, prob.H, prob.sigma2, prob.eta, k));
    return worst;
  };
  const auto reanchor = [&] {
    for (int k = 0; k < prob.clients(); ++k)
      p(k) = std::min(x(k) > 0.0 ? xi(k) / x(k) : 0.0, prob.P_max);
    const double total = p.sum();
    if (total > prob.P_sum) p *= prob.P_sum / total;
  };
  if (margin(x, xi) <= -1e-6) return;
  for (double s = 0.5; s >= 1e-12; s *= 0.5) {
    if (margin(x, s * xi) <= -1e-6) {
      xi *= s;
      reanchor();
      return;
    }
  }
  {
    SinrTargets targets;
    targets.gamma.resize(prob.clients());
    for (int k = 0; k < prob.clients(); ++k)
      targets.gamma(k) = std::exp2(prob.eta(k) * x(k) + 0.01) - 1.0;
    if (targets.gamma.allFinite()) {
      const auto balanced =
          min_power(prob.H, targets, prob.sigma2, prob.P_max * (1.0 - 1e-9));
      if (balanced) {
        Eigen::VectorXd candidate = *balanced;
        for (int k = 0; k < prob.clients(); ++k)
          candidate(k) = std::max(candidate(k), 1e-9 * prob.P_max);
        if (margin(x, candidate) <= -1e-6) {
          xi = candidate;
          reanchor();
          return;
        }
      }
    }
  }
  for (double tau = 0.5; tau >= 1e-12; tau *= 0.5) {
    if (margin(tau * x, xi) <= -1e-6) {
      x *= tau;
      reanchor();
      return;
    }
  }
  int worst_k = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < prob.clients(); ++k) {
    const double v = phi_k(1e-12 * x, xi, prob.H, prob.sigma2, prob.eta, k);
    if (v > worst) {
      worst = v;
      worst_k = k;
    }
  }
  throw NoStrictInterior(
      "pamm: no strictly feasible start, constraint " +
          std::to_string(worst_k) + " has margin " + std::to_string(worst),
      worst_k);
}

}  // namespace detail

inline std::pair<Allocation, PammTrace> pamm_solve(const JcspcProblem& input) {
  input.validate();
  const int K = input.clients();
  auto red = detail::reduce_problem(input);
  JcspcProblem& prob = red.prob;
  const int n = static_cast<int>(red.ids.size());

  PammTrace trace;
  Eigen::VectorXd x, xi, p;
  if (n > 0) {
    x = Eigen::VectorXd::Constant(n, 0.5);
    p = Eigen::VectorXd::Constant(n, std::min(input.P_sum / K, input.P_max));
    xi = x.cwiseProduct(p);
    detail::phase_one(prob, x, xi, p);

    int escalations = 0;
    for (;;) {
      bool converged = false;
      for (int i = 0; i < prob.I_max && !converged; ++i) {
        const Eigen::VectorXd x_prev = x;
        const Eigen::VectorXd p_prev = p;
        for (int j = 0; j < prob.J_max; ++j) {
          auto sol = solve_p3a_inner(prob, x, xi, p);
          const double delta =
              std::max((sol.x - x).lpNorm<Eigen::Infinity>(),
                       (sol.xi - xi).lpNorm<Eigen::Infinity>());
          x = sol.x;
          xi = sol.xi;
          if (delta < 1e-9) break;
        }
        p = solve_p3b(xi, x, prob.P_max, prob.P_sum);

        PammIterRecord rec;
        rec.outer = static_cast<int>(trace.iters.size()) + 1;
        rec.dx_norm = (x - x_prev).norm();
        rec.dp_norm = (p - p_prev).norm();
        rec.zero_one = zero_one_loss(x);
        rec.objective = -prob.pi_tilde.dot(x) + phi1(x, prob.beta) +
                        prob.gamma * (xi - x.cwiseProduct(p)).squaredNorm();
        rec.penalty_residual =
            (xi - x.cwiseProduct(p)).lpNorm<Eigen::Infinity>();
        trace.iters.push_back(rec);

        if (rec.dx_norm < prob.conv_tol && rec.dp_norm < prob.conv_tol)
          converged = true;
      }
      const double residual = (xi - x.cwiseProduct(p)).lpNorm<Eigen::Infinity>();
      if (residual <= 1e-4 * prob.P_max || escalations >= 3) break;
      prob.gamma *= 10.0;  // tighten the coupling and resume from incumbent
      ++escalations;
      ++trace.gamma_escalations;
    }
  }

  Allocation alloc;
  alloc.x.assign(static_cast<std::size_t>(K), 1.0);  // eta = 0 clients stay selected
  alloc.p.assign(static_cast<std::size_t>(K), 0.0);
  alloc.xi.assign(static_cast<std::size_t>(K), 0.0);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(red.ids[static_cast<std::size_t>(i)]);
    alloc.x[k] = x(i);
    alloc.p[k] = p(i);
    alloc.xi[k] = xi(i);
  }
  alloc.feasible = false;  // continuous point; certification happens after repair
  alloc.objective = 0.0;
  for (int k = 0; k < K; ++k)
    alloc.objective += alloc.x[static_cast<std::size_t>(k)] * input.pi_tilde(k);
  return {alloc, trace};
}

// ---------------------------------------------------------------------------
// Rounding and repair: threshold at 0.5, recompute minimal powers for the
// selected set, drop the least valuable constrained client until the set is
// supportable, then greedily add back unselected clients in descending
// predicted-loss order while feasibility holds. The alternating solver can
// settle on vertices that under-select, and the relaxation gives no signal
// to recover those clients; the add-back pass closes that gap with the same
// feasibility kernel. The empty set is always feasible, so this terminates.

namespace detail {

inline std::optional<Eigen::VectorXd> selected_min_power(
    const JcspcProblem& problem, const std::vector<bool>& selected) {
  const int K = problem.clients();
  SinrTargets targets;
  targets.gamma = Eigen::VectorXd::Zero(K);
  for (int k = 0; k < K; ++k)
    if (selected[static_cast<std::size_t>(k)])
      targets.gamma(k) = std::exp2(problem.eta(k)) - 1.0;
  auto p = min_power(problem.H, targets, problem.sigma2, problem.P_max);
  if (!p || p->sum() > problem.P_sum + 1e-9) return std::nullopt;
  return p;
}

}  // namespace detail

inline Allocation round_and_repair(const Allocation& alloc,
                                   const JcspcProblem& problem) {
  const int K = problem.clients();
  const auto binary_input = [&] {
    for (int k = 0; k < K; ++k) {
      const double v = alloc.x[static_cast<std::size_t>(k)];
      if (std::abs(v - std::round(v)) > 1e-12) return false;
    }
    return true;
  }();
  if (binary_input) {
    Allocation candidate = alloc;
    for (int k = 0; k < K; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      candidate.x[ku] = std::round(candidate.x[ku]);
      if (candidate.x[ku] == 0.0) candidate.p[ku] = 0.0;
    }
    const auto cert = certify_allocation(problem, candidate);
    if (cert.ok) {
      candidate.feasible = true;
      candidate.objective = allocation_objective(problem, candidate);
      return candidate;  // already-feasible binary input is a fixed point
    }
  }

  std::vector<bool> selected(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    selected[static_cast<std::size_t>(k)] =
        alloc.x[static_cast<std::size_t>(k)] >= 0.5;

  auto powers = detail::selected_min_power(problem, selected);
  while (!powers) {
    // Drop the selected constrained client with the smallest predicted loss.
    int drop = -1;
    for (int k = 0; k < K; ++k) {
      if (!selected[static_cast<std::size_t>(k)] || problem.eta(k) <= 0.0)
        continue;
      if (drop < 0 || problem.pi_tilde(k) < problem.pi_tilde(drop)) drop = k;
    }
    if (drop < 0)
      throw std::logic_error(
          "round_and_repair: unconstrained selection is unsupportable");
    selected[static_cast<std::size_t>(drop)] = false;
    powers = detail::selected_min_power(problem, selected);
  }

  // Add-back pass, most valuable first.
  std::vector<int> order;
  for (int k = 0; k < K; ++k)
    if (!selected[static_cast<std::size_t>(k)]) order.push_back(k);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return problem.pi_tilde(a) > problem.pi_tilde(b);
  });
  for (const int k : order) {
    selected[static_cast<std::size_t>(k)] = true;
    if (auto grown = detail::selected_min_power(problem, selected))
      powers = grown;
    else
      selected[static_cast<std::size_t>(k)] = false;
  }

  // Single-swap improvement: trade a selected client for an unselected one
  // with strictly larger predicted loss when the swap stays supportable.
  // Each accepted swap raises the objective, so the loop terminates.
  for (bool improved = true; improved;) {
    improved = false;
    for (int u = 0; u < K && !improved; ++u) {
      if (selected[static_cast<std::size_t>(u)]) continue;
      for (int s = 0; s < K && !improved; ++s) {
        if (!selected[static_cast<std::size_t>(s)] || problem.eta(s) <= 0.0)
          continue;
        if (problem.pi_tilde(u) <= problem.pi_tilde(s)) continue;
        selected[static_cast<std::size_t>(s)] = false;
        selected[static_cast<std::size_t>(u)] = true;
        if (auto swapped = detail::selected_min_power(problem, selected)) {
          powers = swapped;
          improved = true;
        } else {
          selected[static_cast<std::size_t>(s)] = true;
          selected[static_cast<std::size_t>(u)] = false;
        }
      }
    }
  }

  Allocation out;
  out.x.assign(static_cast<std::size_t>(K), 0.0);
  out.p.assign(static_cast<std::size_t>(K), 0.0);
  out.xi.assign(static_cast<std::size_t>(K), 0.0);
  for (int k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (selected[ku]) {
      out.x[ku] = 1.0;
      out.p[ku] = (*powers)(k);
      out.xi[ku] = (*powers)(k);
    }
  }
  const auto cert = certify_allocation(problem, out);
  if (!cert.ok)
    throw std::logic_error("round_and_repair: certified set failed: " +
                           cert.violation);
  out.feasible = true;
  out.objective = allocation_objective(problem, out);
  return out;
}

}  // namespace sttgs
