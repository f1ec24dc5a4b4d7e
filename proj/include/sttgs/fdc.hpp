#pragma once

// Feature-domain clustering: per-pixel HSV features, Lloyd-style alternating
// minimization with seeded farthest-point initialization, and selection of
// the image closest to each centroid as the pilot representative.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sttgs/rng.hpp"
#include "sttgs/scenario.hpp"

namespace sttgs {

struct ClusterState {
  std::vector<Eigen::VectorXd> centroids;
  std::vector<int> assignment;  // per-feature cluster label
  double objective = 0.0;       // sum of squared distances to assigned centroid
  std::vector<double> objective_history;  // after each assignment step
  int rounds = 0;
};

struct PilotSet {
  std::vector<int> indices;  // selected image indices, one per cluster
  ClusterState clustering;
};

// H normalized to [0,1] (hue angle / 360), S and V in [0,1].
inline void rgb_to_hsv_pixel(double r, double g, double b, double& h,
                             double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  v = mx;
  s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) {
    h = 0.0;
    return;
  }
  double hue;
  if (mx == r)
    hue = std::fmod((g - b) / delta, 6.0);
  else if (mx == g)
    hue = (b - r) / delta + 2.0;
  else
    hue = (r - g) / delta + 4.0;
  if (hue < 0.0) hue += 6.0;
  h = hue / 6.0;
}

// Flattened per-pixel (H,S,V) vector.
inline Eigen::VectorXd rgb_to_hsv_features(const Image& img) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(img.rgb.size()));
  const std::size_t pixels = img.rgb.size() / 3;
  for (std::size_t i = 0; i < pixels; ++i) {
    double h, s, v;
    rgb_to_hsv_pixel(img.rgb[3 * i], img.rgb[3 * i + 1], img.rgb[3 * i + 2],
                     h, s, v);
    f(static_cast<Eigen::Index>(3 * i)) = h;
    f(static_cast<Eigen::Index>(3 * i + 1)) = s;
    f(static_cast<Eigen::Index>(3 * i + 2)) = v;
  }
  return f;
}

// Aggregated 48-bin HSV histogram (16 per channel), for large images.
inline Eigen::VectorXd hsv_histogram_features(const Image& img,
                                              int bins_per_channel = 16) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * bins_per_channel);
  const std::size_t pixels = img.rgb.size() / 3;
  if (pixels == 0) return f;
  const auto bin = [bins_per_channel](double v) {
    const int b = static_cast<int>(v * bins_per_channel);
    return std::min(b, bins_per_channel - 1);
  };
  for (std::size_t i = 0; i < pixels; ++i) {
    double h, s, v;
    rgb_to_hsv_pixel(img.rgb[3 * i], img.rgb[3 * i + 1], img.rgb[3 * i + 2],
                     h, s, v);
    f(bin(h)) += 1.0;
    f(bins_per_channel + bin(s)) += 1.0;
    f(2 * bins_per_channel + bin(v)) += 1.0;
  }
  f /= static_cast<double>(pixels);
  return f;
}

namespace detail {

inline int nearest_centroid(const Eigen::VectorXd& y,
                            const std::vector<Eigen::VectorXd>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < centroids.size(); ++m) {
    const double d = (y - centroids[m]).squaredNorm();
    if (d < best_d) {  // strict: ties break to the lowest index
      best_d = d;
      best = static_cast<int>(m);
    }
  }
  return best;
}

inline double clustering_objective(
    const std::vector<Eigen::VectorXd>& features,
    const std::vector<Eigen::VectorXd>& centroids,
    const std::vector<int>& assignment) {
  double obj = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i)
    obj += (features[i] - centroids[static_cast<std::size_t>(assignment[i])])
               .squaredNorm();
  return obj;
}

}  // namespace detail

// Lloyd alternation on the Q1 objective. Initialization: first centroid is a
// seeded uniform draw, the rest are farthest-point picks. An empty cluster is
// repaired by re-seeding its centroid to the point farthest from its current
// centroid, which keeps every pilot slot filled.
inline ClusterState cluster(const std::vector<Eigen::VectorXd>& features,
                            int m, Rng& rng, int max_rounds = 300) {
  const int n = static_cast<int>(features.size());
  if (n == 0) throw std::invalid_argument("cluster: empty input");
  if (m < 1 || m > n)
    throw std::invalid_argument("cluster: need 1 <= m <= feature count");

  ClusterState st;
  st.centroids.reserve(static_cast<std::size_t>(m));
  st.centroids.push_back(
      features[static_cast<std::size_t>(rng.uniform_index(
          static_cast<std::uint64_t>(n)))]);
  std::vector<double> dist(static_cast<std::size_t>(n));
  while (static_cast<int>(st.centroids.size()) < m) {
    int far = 0;
    double far_d = -1.0;
    for (int i = 0; i < n; ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& c : st.centroids)
        d = std::min(d, (features[static_cast<std::size_t>(i)] - c).squaredNorm());
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    st.centroids.push_back(features[static_cast<std::size_t>(far)]);
  }

  st.assignment.assign(static_cast<std::size_t>(n), -1);
  for (int round = 0; round < max_rounds; ++round) {
    st.rounds = round + 1;
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int a =
          detail::nearest_centroid(features[static_cast<std::size_t>(i)],
                                   st.centroids);
      if (a != st.assignment[static_cast<std::size_t>(i)]) {
        st.assignment[static_cast<std::size_t>(i)] = a;
        changed = true;
      }
    }
    st.objective_history.push_back(
        detail::clustering_objective(features, st.centroids, st.assignment));
    if (!changed) break;

    std::vector<Eigen::VectorXd> sums(
        static_cast<std::size_t>(m),
        Eigen::VectorXd::Zero(features[0].size()));
    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < n; ++i) {
      const auto a = static_cast<std::size_t>(st.assignment[static_cast<std::size_t>(i)]);
      sums[a] += features[static_cast<std::size_t>(i)];
      ++counts[a];
    }
    for (int c = 0; c < m; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      if (counts[cu] > 0) {
        st.centroids[cu] = sums[cu] / counts[cu];
      } else {
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d =
              (features[static_cast<std::size_t>(i)] -
               st.centroids[static_cast<std::size_t>(
                   st.assignment[static_cast<std::size_t>(i)])])
                  .squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        st.centroids[cu] = features[static_cast<std::size_t>(far)];
      }
    }
  }
  st.objective =
      detail::clustering_objective(features, st.centroids, st.assignment);
  return st;
}

// One representative per cluster: the member feature closest to the
// centroid, ties to the smallest index. A cluster left empty (possible with
// heavily duplicated features) is repaired by claiming the farthest point
// not already selected, so no pilot slot stays empty and indices are
// distinct.
inline std::vector<int> select_representatives(
    const ClusterState& state, const std::vector<Eigen::VectorXd>& features) {
  const int m = static_cast<int>(state.centroids.size());
  std::vector<int> reps(static_cast<std::size_t>(m), -1);
  std::vector<double> best(static_cast<std::size_t>(m),
                           std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto c = static_cast<std::size_t>(state.assignment[i]);
    const double d = (features[i] - state.centroids[c]).squaredNorm();
    if (d < best[c]) {
      best[c] = d;
      reps[c] = static_cast<int>(i);
    }
  }
  std::vector<bool> taken(features.size(), false);
  for (const int r : reps)
    if (r >= 0) taken[static_cast<std::size_t>(r)] = true;
  for (int c = 0; c < m; ++c) {
    auto& rep = reps[static_cast<std::size_t>(c)];
    if (rep >= 0) continue;
    int far = -1;
    double far_d = -1.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (taken[i]) continue;
      const double d =
          (features[i] -
           state.centroids[static_cast<std::size_t>(state.assignment[i])])
              .squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = static_cast<int>(i);
      }
    }
    if (far < 0)
      throw std::invalid_argument(
          "select_representatives: more clusters than features");
    rep = far;
    taken[static_cast<std::size_t>(far)] = true;
  }
  return reps;
}

// Algorithm: |pilot| = ceil(rho * |D|); HSV features; cluster; pick the
// per-cluster representatives.
inline PilotSet fdc_sample(const ClientDataset& dataset, double rho_k,
                           Rng& rng, bool histogram_features = false) {
  if (!(rho_k > 0.0 && rho_k < 1.0))
    throw std::invalid_argument("fdc_sample: rho must be in (0,1)");
  const int n = static_cast<int>(dataset.images.size());
  if (n == 0) throw std::invalid_argument("fdc_sample: empty dataset");
  const int m = static_cast<int>(std::ceil(rho_k * n));

  std::vector<Eigen::VectorXd> features;
  features.reserve(static_cast<std::size_t>(n));
  for (const auto& img : dataset.images)
    features.push_back(histogram_features ? hsv_histogram_features(img)
                                          : rgb_to_hsv_features(img));

  PilotSet pilot;
  pilot.clustering = cluster(features, m, rng);
  pilot.indices = select_representatives(pilot.clustering, features);
  return pilot;
}

}  // namespace sttgs
