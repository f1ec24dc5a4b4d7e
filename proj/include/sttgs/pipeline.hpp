#pragma once

// End-to-end orchestration: FDC sampling -> PTTM -> loss prediction ->
// PAMM (+ repair) -> certification, plus parameter sweeps and the plain-text
// report emission used by the CLI. Reports carry no timestamps or timing, so
// a rerun with the same seed and inputs is byte-identical.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sttgs/baselines.hpp"
#include "sttgs/channel.hpp"
#include "sttgs/fdc.hpp"
#include "sttgs/gsloss.hpp"
#include "sttgs/jcspc.hpp"
#include "sttgs/oracle.hpp"
#include "sttgs/pamm.hpp"
#include "sttgs/powerctl.hpp"
#include "sttgs/pttm.hpp"
#include "sttgs/scenario.hpp"

namespace sttgs {

// Stage-tagged failure; infeasibility gets its own type so the CLI can map
// it to a distinct exit code.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_name(stage) {}
  std::string stage_name;
};

class InfeasibleError : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

struct PipelineResult {
  ScenarioConfig config;
  GainMatrix gains;
  std::vector<PilotSet> pilots;
  PttmResult pttm;
  Eigen::VectorXd psi;       // pilot loss per client
  Eigen::VectorXd pi_tilde;  // predicted total loss per client
  Eigen::VectorXd pi_true;   // exact total loss (NaN when unavailable)
  JcspcProblem problem;
  Allocation continuous;
  PammTrace trace;
  Allocation final_alloc;
  Certificate certificate;
};

inline JcspcProblem build_jcspc_problem(const ScenarioConfig& config,
                                        const GainMatrix& gains,
                                        const Eigen::VectorXd& pi_tilde,
                                        double T0,
                                        const std::vector<int>& pilot_sizes) {
  JcspcProblem p;
  p.H = gains;
  p.pi_tilde = pi_tilde;
  p.eta = eta_targets(config, T0, pilot_sizes);
  p.P_max = config.P_max;
  p.P_sum = config.P_sum;
  p.sigma2 = config.sigma2;
  p.beta = config.beta;
  p.gamma = config.gamma;
  p.I_max = config.I_max;
  p.J_max = config.J_max;
  return p;
}

inline GainMatrix draw_gains(const ScenarioConfig& config) {
  Rng rng(substream(config.seed, tags::channel));
  return composite_gains(sample_channel(config, rng));
}

inline PipelineResult run_pipeline(
    const ScenarioConfig& config, const std::vector<ClientDataset>& datasets,
    std::optional<GainMatrix> gains_override = std::nullopt) {
  if (static_cast<int>(datasets.size()) != config.K)
    throw PipelineError("input", "need one dataset per client");
  for (int k = 0; k < config.K; ++k) {
    validate_dataset(datasets[static_cast<std::size_t>(k)], k);
    if (static_cast<int>(datasets[static_cast<std::size_t>(k)].images.size()) !=
        config.D_sizes[static_cast<std::size_t>(k)])
      throw PipelineError("input",
                          "dataset size mismatch for client " +
                              std::to_string(k) + " (expected " +
                              std::to_string(config.D_sizes[static_cast<std::size_t>(k)]) +
                              ")");
  }

  PipelineResult res;
  res.config = config;
  res.gains = gains_override ? *gains_override : draw_gains(config);
  if (res.gains.clients() != config.K)
    throw PipelineError("input", "gain matrix size mismatch");

  res.pilots.reserve(static_cast<std::size_t>(config.K));
  std::vector<int> pilot_sizes(static_cast<std::size_t>(config.K));
  for (int k = 0; k < config.K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    Rng rng(substream(config.seed, tags::fdc, static_cast<std::uint64_t>(k)));
    try {
      res.pilots.push_back(fdc_sample(datasets[ku], config.rho[ku], rng));
    } catch (const std::exception& e) {
      throw PipelineError("fdc", e.what());
    }
    pilot_sizes[ku] = static_cast<int>(res.pilots[ku].indices.size());
  }

  res.pttm = pttm_bisect(res.gains, config, pilot_sizes);
  if (!res.pttm.feasible)
    throw InfeasibleError(
        "pttm", "pilot upload does not fit the time budget T = " +
                    std::to_string(config.T) + " s");

  LossConfig loss_cfg;
  loss_cfg.lambda_loss = config.lambda_loss;
  res.psi.resize(config.K);
  res.pi_tilde.resize(config.K);
  res.pi_true.resize(config.K);
  for (int k = 0; k < config.K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const auto& ds = datasets[ku];
    try {
      res.psi(k) = pilot_loss(ds, res.pilots[ku].indices, loss_cfg);
    } catch (const std::exception& e) {
      throw PipelineError("loss-prediction", e.what());
    }
    res.pi_tilde(k) = predict_client_loss(res.psi(k), config.D_sizes[ku],
                                          pilot_sizes[ku]);
    if (ds.rendered || ds.precomputed_loss) {
      std::vector<int> all(ds.images.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
      res.pi_true(k) = pilot_loss(ds, all, loss_cfg);
    } else {
      res.pi_true(k) = std::numeric_limits<double>::quiet_NaN();
    }
  }

  res.problem = build_jcspc_problem(config, res.gains, res.pi_tilde,
                                    res.pttm.T0_star, pilot_sizes);
  try {
    auto [alloc, trace] = pamm_solve(res.problem);
    res.continuous = std::move(alloc);
    res.trace = std::move(trace);
    res.final_alloc = round_and_repair(res.continuous, res.problem);
  } catch (const NoStrictInterior& e) {
    throw InfeasibleError("jcspc", e.what());
  }
  res.certificate = certify_allocation(res.problem, res.final_alloc);
  return res;
}

// ---------------------------------------------------------------------------
// Report emission (deterministic text).

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace detail

inline std::string allocation_csv(const Allocation& alloc,
                                  const Eigen::VectorXd& pi_tilde) {
  std::ostringstream os;
  os << "client,x,p_w,xi_w,pi_tilde\n";
  for (std::size_t k = 0; k < alloc.x.size(); ++k)
    os << k << "," << detail::fmt(alloc.x[k]) << "," << detail::fmt(alloc.p[k])
       << "," << detail::fmt(alloc.xi[k]) << ","
       << detail::fmt(pi_tilde(static_cast<Eigen::Index>(k))) << "\n";
  return os.str();
}

inline std::string pttm_trace_csv(const PttmResult& r) {
  std::ostringstream os;
  os << "step,kappa_s,feasible\n";
  for (std::size_t i = 0; i < r.trace.size(); ++i)
    os << i << "," << detail::fmt(r.trace[i].kappa) << ","
       << (r.trace[i].feasible ? 1 : 0) << "\n";
  return os.str();
}

inline std::string pamm_trace_csv(const PammTrace& t) {
  std::ostringstream os;
  os << "outer,dx_norm,dp_norm,zero_one_loss,objective,penalty_residual\n";
  for (const auto& r : t.iters)
    os << r.outer << "," << detail::fmt(r.dx_norm) << ","
       << detail::fmt(r.dp_norm) << "," << detail::fmt(r.zero_one) << ","
       << detail::fmt(r.objective) << "," << detail::fmt(r.penalty_residual)
       << "\n";
  return os.str();
}

inline std::string losses_csv(const PipelineResult& r) {
  std::ostringstream os;
  os << "client,pilot_size,psi,pi_tilde,pi_true,pilot_indices\n";
  for (int k = 0; k < r.config.K; ++k) {
    const auto& idx = r.pilots[static_cast<std::size_t>(k)].indices;
    os << k << "," << idx.size() << "," << detail::fmt(r.psi(k)) << ","
       << detail::fmt(r.pi_tilde(k)) << ",";
    if (std::isnan(r.pi_true(k)))
      os << "NA";
    else
      os << detail::fmt(r.pi_true(k));
    os << ",";
    for (std::size_t i = 0; i < idx.size(); ++i)
      os << (i ? ";" : "") << idx[i];
    os << "\n";
  }
  return os.str();
}

inline std::string summary_text(const PipelineResult& r) {
  std::ostringstream os;
  os << "stt-gs pipeline report\n";
  os << "clients " << r.config.K << " antennas " << r.config.N << " seed "
     << r.config.seed << "\n";
  os << "pilot_time_s " << detail::fmt(r.pttm.T0_star) << "\n";
  os << "remaining_budget_s " << detail::fmt(r.config.T - r.pttm.T0_star)
     << "\n";
  os << "selected";
  bool any = false;
  for (std::size_t k = 0; k < r.final_alloc.x.size(); ++k)
    if (r.final_alloc.x[k] == 1.0) {
      os << " " << k;
      any = true;
    }
  if (!any) os << " none";
  os << "\n";
  os << "objective " << detail::fmt(r.final_alloc.objective) << "\n";
  os << "feasible " << (r.certificate.ok ? "yes" : "no") << "\n";
  os << "rate_slack " << detail::fmt(r.certificate.rate_slack) << "\n";
  os << "power_slack_w " << detail::fmt(r.certificate.power_slack) << "\n";
  os << "zero_one_loss_before_rounding "
     << detail::fmt(r.trace.iters.empty() ? 0.0
                                          : r.trace.iters.back().zero_one)
     << "\n";
  os << "outer_iterations " << r.trace.iters.size() << "\n";
  os << "gamma_escalations " << r.trace.gamma_escalations << "\n";
  return os.str();
}

// Per-client predicted-loss file for scheduling-level runs: "client,pi_tilde"
inline std::string save_loss_csv(const Eigen::VectorXd& pi_tilde) {
  std::ostringstream os;
  os.precision(17);
  os << "client,pi_tilde\n";
  for (Eigen::Index k = 0; k < pi_tilde.size(); ++k)
    os << k << "," << pi_tilde(k) << "\n";
  return os.str();
}

inline Eigen::VectorXd load_loss_csv(const std::string& path, int K) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open loss file: " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("client,pi_tilde", 0) != 0)
    throw std::invalid_argument(path + ": expected 'client,pi_tilde' header");
  Eigen::VectorXd v = Eigen::VectorXd::Constant(K, -1.0);
  while (std::getline(f, line)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    int k = -1;
    double val = 0.0;
    if (!(ls >> k >> val) || k < 0 || k >= K)
      throw std::invalid_argument(path + ": bad loss row '" + line + "'");
    v(k) = val;
  }
  for (int k = 0; k < K; ++k)
    if (v(k) < 0.0)
      throw std::invalid_argument(path + ": missing or negative loss for client " +
                                  std::to_string(k));
  return v;
}

// ---------------------------------------------------------------------------
// Parameter sweeps (Figs. 4-7, 10-11 style): per grid point and seed, run
// the synthetic pipeline and record prediction error and scheduling metrics.

enum class SweepParameter { rho, P_sum, T, beta };

inline SweepParameter parse_sweep_parameter(const std::string& s) {
  if (s == "rho") return SweepParameter::rho;
  if (s == "P_sum" || s == "psum") return SweepParameter::P_sum;
  if (s == "T") return SweepParameter::T;
  if (s == "beta") return SweepParameter::beta;
  throw std::invalid_argument("sweep: unknown parameter '" + s +
                              "' (use rho|P_sum|T|beta)");
}

struct SweepCell {
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string status;        // ok | infeasible | error
  double mse = 0.0;          // predicted-vs-true mean per-image loss MSE
  double objective = 0.0;    // sum_k x_k pi_tilde_k after repair
  double data_volume = 0.0;  // pilot + selected full-transmission bits
  double zero_one = 0.0;     // before rounding
  double runtime_s = 0.0;    // informational; excluded from CSV by default
};

struct SweepOptions {
  int cluster_count = 4;
  double noise = 0.05;
  bool emit_runtime = false;  // keeps the CSV deterministic when off
};

inline SweepCell run_sweep_cell(ScenarioConfig config, SweepParameter param,
                                double value, std::uint64_t seed,
                                const SweepOptions& opt) {
  SweepCell cell;
  cell.value = value;
  cell.seed = seed;
  config.seed = seed;
  switch (param) {
    case SweepParameter::rho:
      for (auto& r : config.rho) r = value;
      break;
    case SweepParameter::P_sum:
      config.P_sum = value;
      break;
    case SweepParameter::T:
      config.T = value;
      break;
    case SweepParameter::beta:
      config.beta = value;
      break;
  }
  if (config.auto_positions) {
    // re-derive positions for the new seed
    Rng rng(substream(config.seed, tags::positions));
    for (auto& pos : config.client_positions)
      pos = {config.server_position[0] + rng.uniform(-50.0, 50.0),
             config.server_position[1] + rng.uniform(-50.0, 50.0)};
  }
  const auto t_start = std::chrono::steady_clock::now();
  try {
    validate_scenario(config);
    const auto datasets =
        generate_synthetic_datasets(config, opt.cluster_count, opt.noise);
    const auto res = run_pipeline(config, datasets);
    cell.status = "ok";
    double mse = 0.0;
    for (int k = 0; k < config.K; ++k) {
      const double n = config.D_sizes[static_cast<std::size_t>(k)];
      const double e = (res.pi_tilde(k) - res.pi_true(k)) / n;
      mse += e * e;
    }
    cell.mse = mse / config.K;
    cell.objective = res.final_alloc.objective;
    for (int k = 0; k < config.K; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double pilot_bits =
          config.V[ku] * static_cast<double>(res.pilots[ku].indices.size());
      cell.data_volume += pilot_bits;
      if (res.final_alloc.x[ku] == 1.0)
        cell.data_volume +=
            config.V[ku] *
            (config.D_sizes[ku] -
             static_cast<double>(res.pilots[ku].indices.size()));
    }
    cell.zero_one =
        res.trace.iters.empty() ? 0.0 : res.trace.iters.back().zero_one;
  } catch (const InfeasibleError& e) {
    cell.status = std::string("infeasible: ") + e.what();
  } catch (const std::exception& e) {
    cell.status = std::string("error: ") + e.what();
  }
  cell.runtime_s = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t_start)
                       .count();
  return cell;
}

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

struct SweepReport {
  std::vector<SweepCell> cells;  // ordered by (grid index, seed)
  std::string cells_csv;
  std::string aggregate_csv;  // median and quartiles per grid point
};

inline SweepReport run_sweep(const ScenarioConfig& base, SweepParameter param,
                             const std::vector<double>& grid,
                             const std::vector<std::uint64_t>& seeds,
                             const SweepOptions& opt = {}) {
  SweepReport rep;
  std::ostringstream cells;
  cells << "param_value,seed,status,mse,objective,data_volume_bits,zero_one_loss";
  if (opt.emit_runtime) cells << ",runtime_s";
  cells << "\n";
  std::ostringstream agg;
  agg << "param_value,ok_runs,mse_q1,mse_median,mse_q3,objective_q1,"
         "objective_median,objective_q3\n";

  for (const double value : grid) {
    std::vector<double> mses, objectives;
    for (const auto seed : seeds) {
      auto cell = run_sweep_cell(base, param, value, seed, opt);
      std::string status = cell.status;  // keep the CSV single-field safe
      std::replace(status.begin(), status.end(), ',', ';');
      std::replace(status.begin(), status.end(), '\n', ' ');
      cells << detail::fmt(value) << "," << seed << "," << status << ",";
      if (cell.status == "ok") {
        cells << detail::fmt(cell.mse) << "," << detail::fmt(cell.objective)
              << "," << detail::fmt(cell.data_volume) << ","
              << detail::fmt(cell.zero_one);
        mses.push_back(cell.mse);
        objectives.push_back(cell.objective);
      } else {
        cells << "NA,NA,NA,NA";
      }
      if (opt.emit_runtime) cells << "," << cell.runtime_s;
      cells << "\n";
      rep.cells.push_back(std::move(cell));
    }
    agg << detail::fmt(value) << "," << mses.size() << ","
        << detail::fmt(quantile(mses, 0.25)) << ","
        << detail::fmt(quantile(mses, 0.5)) << ","
        << detail::fmt(quantile(mses, 0.75)) << ","
        << detail::fmt(quantile(objectives, 0.25)) << ","
        << detail::fmt(quantile(objectives, 0.5)) << ","
        << detail::fmt(quantile(objectives, 0.75)) << "\n";
  }
  rep.cells_csv = cells.str();
  rep.aggregate_csv = agg.str();
  return rep;
}

}  // namespace sttgs
