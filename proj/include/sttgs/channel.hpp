#pragma once

// Rician uplink channels with a half-wavelength LoS steering component, the
// MRC composite gain matrix H_{k,j}, and the resulting per-client rates.
// Rates are computed analytically from the gains; the symbol-level signal
// path is never simulated because every downstream algorithm consumes only
// H_{k,j} and sigma^2.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sttgs/rng.hpp"
#include "sttgs/scenario.hpp"

namespace sttgs {

struct ChannelRealization {
  std::vector<Eigen::VectorXcd> h;  // one length-N vector per client
  std::vector<double> theta;        // LoS angle per client (rad)
};

struct GainMatrix {
  Eigen::MatrixXd H;  // K x K, H(k,j) = composite gain of client j at decoder k

  int clients() const { return static_cast<int>(H.rows()); }
};

// Unit-modulus steering vector with phase -n*pi*sin(theta), n = 0..N-1.
inline Eigen::VectorXcd los_steering(int N, double theta) {
  Eigen::VectorXcd v(N);
  const double phase_step = -M_PI * std::sin(theta);
  for (int n = 0; n < N; ++n)
    v(n) = std::polar(1.0, phase_step * n);
  return v;
}

inline ChannelRealization sample_channel(const ScenarioConfig& config,
                                         Rng& rng) {
  const auto d = config.distances();
  ChannelRealization ch;
  ch.h.resize(static_cast<std::size_t>(config.K));
  ch.theta.resize(static_cast<std::size_t>(config.K));
  const double los_w = std::sqrt(config.K_ric / (config.K_ric + 1.0));
  const double nlos_w = std::sqrt(1.0 / (config.K_ric + 1.0));
  for (int k = 0; k < config.K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double scale = std::sqrt(config.h0 * config.omega[ku] *
                                   std::pow(d[ku], -config.alpha));
    for (;;) {
      const double theta = rng.uniform(-M_PI, M_PI);
      Eigen::VectorXcd hk = los_w * los_steering(config.N, theta);
      for (int n = 0; n < config.N; ++n)
        hk(n) += nlos_w * rng.complex_normal();
      hk *= scale;
      if (hk.squaredNorm() > 0.0) {  // resample on an exact zero draw
        ch.h[ku] = std::move(hk);
        ch.theta[ku] = theta;
        break;
      }
    }
  }
  return ch;
}

// H_{k,k} = ||h_k||^2, H_{k,j} = |h_k^H h_j|^2 / ||h_k||^2 for j != k.
inline GainMatrix composite_gains(const ChannelRealization& ch) {
  const int K = static_cast<int>(ch.h.size());
  GainMatrix g;
  g.H.resize(K, K);
  for (int k = 0; k < K; ++k) {
    const auto& hk = ch.h[static_cast<std::size_t>(k)];
    const double nk = hk.squaredNorm();
    for (int j = 0; j < K; ++j) {
      if (j == k) {
        g.H(k, k) = nk;
      } else {
        const std::complex<double> inner =
            hk.adjoint() * ch.h[static_cast<std::size_t>(j)];
        g.H(k, j) = std::norm(inner) / nk;
      }
    }
  }
  return g;
}

// Per-client uplink rate in bit/s with selection weighting; all-ones x gives
// the plain multi-user rate.
inline Eigen::VectorXd rate(const GainMatrix& g, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& x,
                            const Eigen::VectorXd& B, double sigma2) {
  const int K = g.clients();
  if (p.size() != K || x.size() != K || B.size() != K)
    throw std::invalid_argument("rate: dimension mismatch");
  Eigen::VectorXd r(K);
  for (int k = 0; k < K; ++k) {
    double interference = 0.0;
    for (int j = 0; j < K; ++j)
      if (j != k) interference += x(j) * p(j) * g.H(k, j);
    const double sinr = x(k) * p(k) * g.H(k, k) / (interference + sigma2);
    r(k) = B(k) * std::log2(1.0 + sinr);
  }
  return r;
}

// Text fixture format: first line K, then K rows of K gains.
inline std::string save_gain_matrix(const GainMatrix& g) {
  std::ostringstream os;
  os.precision(17);
  const int K = g.clients();
  os << K << "\n";
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j) os << (j ? " " : "") << g.H(k, j);
    os << "\n";
  }
  return os.str();
}

inline GainMatrix parse_gain_matrix(const std::string& text) {
  std::istringstream is(text);
  int K = 0;
  if (!(is >> K) || K < 1)
    throw std::invalid_argument("gain matrix: bad client count");
  GainMatrix g;
  g.H.resize(K, K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j)
      if (!(is >> g.H(k, j)))
        throw std::invalid_argument("gain matrix: truncated data");
  return g;
}

inline GainMatrix load_gain_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open gain matrix: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_gain_matrix(buf.str());
}

}  // namespace sttgs
