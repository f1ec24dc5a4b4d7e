#pragma once

// GS training loss between rendered and ground-truth images:
// (1-lambda)*L1 + lambda*(1-SSIM), plus pilot aggregation and the
// dataset-size rescaling that turns a pilot loss into a per-client
// prediction.
//
// L1 is the mean absolute difference and SSIM uses global image statistics
// (one window). Both choices keep values resolution-independent; only the
// relative client ranking feeds the scheduler.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sttgs/scenario.hpp"

namespace sttgs {

struct LossConfig {
  double lambda_loss = 0.2;
  double ssim_c1 = 0.01 * 0.01;  // (k1*L)^2 for unit dynamic range
  double ssim_c2 = 0.03 * 0.03;
};

inline void check_same_shape(const Image& a, const Image& b,
                             const char* where) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(where) + ": shape mismatch");
}

inline double l1_loss(const Image& a, const Image& b) {
  check_same_shape(a, b, "l1_loss");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i)
    sum += std::abs(a.rgb[i] - b.rgb[i]);
  return sum / static_cast<double>(a.rgb.size());
}

inline double ssim(const Image& a, const Image& b,
                   const LossConfig& cfg = {}) {
  check_same_shape(a, b, "ssim");
  const auto n = static_cast<double>(a.rgb.size());
  double mu_a = 0.0, mu_b = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    mu_a += a.rgb[i];
    mu_b += b.rgb[i];
  }
  mu_a /= n;
  mu_b /= n;
  double var_a = 0.0, var_b = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const double da = a.rgb[i] - mu_a;
    const double db = b.rgb[i] - mu_b;
    var_a += da * da;
    var_b += db * db;
    cov += da * db;
  }
  var_a /= n;
  var_b /= n;
  cov /= n;
  return (2.0 * mu_a * mu_b + cfg.ssim_c1) * (2.0 * cov + cfg.ssim_c2) /
         ((mu_a * mu_a + mu_b * mu_b + cfg.ssim_c1) *
          (var_a + var_b + cfg.ssim_c2));
}

inline double gs_loss(const Image& a, const Image& b,
                      const LossConfig& cfg = {}) {
  return (1.0 - cfg.lambda_loss) * l1_loss(a, b) +
         cfg.lambda_loss * (1.0 - ssim(a, b, cfg));
}

// Total GS loss over a pilot index set. Uses rendered counterparts when the
// dataset carries them, otherwise precomputed per-image losses.
inline double pilot_loss(const ClientDataset& dataset,
                         const std::vector<int>& pilot_indices,
                         const LossConfig& cfg = {}) {
  double psi = 0.0;
  for (const int i : pilot_indices) {
    if (i < 0 || i >= static_cast<int>(dataset.images.size()))
      throw std::invalid_argument("pilot_loss: index out of range");
    const auto iu = static_cast<std::size_t>(i);
    if (dataset.rendered) {
      psi += gs_loss((*dataset.rendered)[iu], dataset.images[iu], cfg);
    } else if (dataset.precomputed_loss) {
      psi += (*dataset.precomputed_loss)[iu];
    } else {
      throw std::invalid_argument(
          "pilot_loss: dataset has neither rendered images nor precomputed "
          "losses");
    }
  }
  return psi;
}

// pi_tilde = (|D| / |D_pilot|) * psi
inline double predict_client_loss(double psi, int d_size, int pilot_size) {
  if (pilot_size < 1)
    throw std::invalid_argument("predict_client_loss: pilot_size must be >= 1");
  if (d_size < pilot_size)
    throw std::invalid_argument("predict_client_loss: d_size < pilot_size");
  return static_cast<double>(d_size) / static_cast<double>(pilot_size) * psi;
}

}  // namespace sttgs
