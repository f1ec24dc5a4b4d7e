#pragma once

// Scenario configuration, the shared data model, and synthetic dataset
// generation. A scenario file is a flat key=value text document; dB-valued
// channel parameters may be given with a _db suffix (or _dbm for noise
// power) and are stored in linear units internally.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sttgs/rng.hpp"

namespace sttgs {

namespace tags {
constexpr std::uint64_t positions = 0x706f73;   // substream tags
constexpr std::uint64_t channel = 0x6368616e;
constexpr std::uint64_t synth = 0x73796e74;
constexpr std::uint64_t fdc = 0x666463;
}  // namespace tags

struct ScenarioConfig {
  int K = 0;                      // clients
  int N = 0;                      // server antennas
  double T = 0.0;                 // total time budget (s)
  double T_epsilon = 1e-3;        // bisection tolerance (s)
  double P_max = 0.0;             // per-client power cap (W)
  double P_sum = 0.0;             // sum power cap (W)
  double sigma2 = 0.0;            // noise power (W)
  std::vector<double> B;          // bandwidth per client (Hz)
  std::vector<double> V;          // volume per sample (bits)
  std::vector<int> D_sizes;       // dataset cardinality per client
  std::vector<double> rho;        // sampling ratio per client
  double h0 = 0.0;                // path loss at 1 m (linear)
  double alpha = 0.0;             // path loss exponent
  std::vector<double> omega;      // shadow fading per client (linear)
  double K_ric = 0.0;             // Rician K-factor (linear)
  double lambda_loss = 0.2;       // DSSIM weight in the GS loss
  double beta = 0.1;              // binary penalty
  double gamma = 0.0;             // coupling penalty (default 100/P_max^2)
  int I_max = 60;                 // outer iteration cap
  int J_max = 20;                 // inner iteration cap
  std::uint64_t seed = 0;
  std::vector<std::array<double, 2>> client_positions;  // (m)
  std::array<double, 2> server_position = {0.0, 0.0};
  bool auto_positions = false;    // positions were drawn from the seed

  std::vector<double> distances() const {
    std::vector<double> d(client_positions.size());
    for (std::size_t k = 0; k < client_positions.size(); ++k) {
      const double dx = client_positions[k][0] - server_position[0];
      const double dy = client_positions[k][1] - server_position[1];
      d[k] = std::hypot(dx, dy);
    }
    return d;
  }

  std::vector<int> pilot_sizes() const {
    std::vector<int> m(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
      m[static_cast<std::size_t>(k)] = static_cast<int>(
          std::ceil(rho[static_cast<std::size_t>(k)] * D_sizes[static_cast<std::size_t>(k)]));
    return m;
  }

  bool operator==(const ScenarioConfig& o) const {
    return K == o.K && N == o.N && T == o.T && T_epsilon == o.T_epsilon &&
           P_max == o.P_max && P_sum == o.P_sum && sigma2 == o.sigma2 &&
           B == o.B && V == o.V && D_sizes == o.D_sizes && rho == o.rho &&
           h0 == o.h0 && alpha == o.alpha && omega == o.omega &&
           K_ric == o.K_ric && lambda_loss == o.lambda_loss &&
           beta == o.beta && gamma == o.gamma && I_max == o.I_max &&
           J_max == o.J_max && seed == o.seed &&
           client_positions == o.client_positions &&
           server_position == o.server_position;
  }
};

// RGB image, row-major, channel-interleaved, values in [0,1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> rgb;

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w),
        rgb(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * 3,
            fill) {}

  double& at(int y, int x, int c) {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  double at(int y, int x, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::size_t size() const { return rgb.size(); }
  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width;
  }
};

using Pose = std::array<double, 6>;

struct ClientDataset {
  std::vector<Image> images;
  std::vector<Pose> poses;
  std::optional<std::vector<Image>> rendered;        // from the prior model
  std::optional<std::vector<double>> precomputed_loss;  // per-image GS loss
};

inline void validate_dataset(const ClientDataset& d, int client_index) {
  const auto fail = [client_index](const std::string& msg) {
    throw std::invalid_argument("dataset[" + std::to_string(client_index) +
                                "]: " + msg);
  };
  if (d.images.size() != d.poses.size())
    fail("images and poses must have equal length");
  if (d.rendered && d.precomputed_loss)
    fail("rendered and precomputed_loss are mutually exclusive");
  if (d.rendered) {
    if (d.rendered->size() != d.images.size())
      fail("rendered length must match images");
    for (std::size_t i = 0; i < d.images.size(); ++i)
      if (!(*d.rendered)[i].same_shape(d.images[i]))
        fail("rendered[" + std::to_string(i) + "] shape mismatch");
  }
  if (d.precomputed_loss && d.precomputed_loss->size() != d.images.size())
    fail("precomputed_loss length must match images");
}

// Joint selection/power decision with its feasibility certificate.
struct Allocation {
  std::vector<double> x;    // selection, in [0,1] (binary after repair)
  std::vector<double> p;    // transmit power (W)
  std::vector<double> xi;   // auxiliary xi (W)
  bool feasible = false;
  double objective = 0.0;   // sum_k x_k * pi_tilde_k
};

// ---------------------------------------------------------------------------
// Scenario file parsing

namespace detail {

// standard HSV -> RGB, h/s/v in [0,1]
inline void hsv_to_rgb(double h, double s, double v, double& r, double& g,
                       double& b) {
  const double hue = h * 6.0;
  const int sector = static_cast<int>(hue) % 6;
  const double f = hue - std::floor(hue);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_number_list(const std::string& field,
                                             const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(value);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument(field + ": not a number: '" + item + "'");
    }
    if (pos != item.size())
      throw std::invalid_argument(field + ": trailing characters in '" +
                                  item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument(field + ": empty value");
  return out;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) {
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

// Broadcast a scalar or length-K list to length K.
inline std::vector<double> resolve_per_client(const std::string& field,
                                              std::vector<double> v, int K) {
  if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(K), v[0]);
  if (static_cast<int>(v.size()) != K)
    throw std::invalid_argument(field + ": expected 1 or " +
                                std::to_string(K) + " values, got " +
                                std::to_string(v.size()));
  return v;
}

}  // namespace detail

inline void validate_scenario(const ScenarioConfig& c) {
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(c.K >= 1, "K: must be >= 1");
  require(c.N >= 1, "N: must be >= 1");
  require(c.T > 0.0, "T: must be > 0");
  require(c.T_epsilon > 0.0, "T_epsilon: must be > 0");
  require(c.P_max > 0.0, "P_max: must be > 0");
  require(c.P_sum > 0.0, "P_sum: must be > 0");
  require(c.sigma2 > 0.0, "sigma2: must be > 0");
  require(c.h0 > 0.0, "h0: must be > 0");
  require(c.alpha > 0.0, "alpha: must be > 0");
  require(c.K_ric >= 0.0, "K_ric: must be >= 0");
  require(c.lambda_loss >= 0.0 && c.lambda_loss <= 1.0,
          "lambda_loss: must be in [0,1]");
  require(c.beta > 0.0, "beta: must be > 0");
  require(c.gamma > 0.0, "gamma: must be > 0");
  require(c.I_max >= 1, "I_max: must be >= 1");
  require(c.J_max >= 1, "J_max: must be >= 1");
  const auto K = static_cast<std::size_t>(c.K);
  require(c.B.size() == K, "B: must have K entries");
  require(c.V.size() == K, "V: must have K entries");
  require(c.D_sizes.size() == K, "D_sizes: must have K entries");
  require(c.rho.size() == K, "rho: must have K entries");
  require(c.omega.size() == K, "omega: must have K entries");
  require(c.client_positions.size() == K,
          "client_positions: must have K entries");
  for (std::size_t k = 0; k < K; ++k) {
    require(c.B[k] > 0.0, "B: must be > 0 (client " + std::to_string(k) + ")");
    require(c.V[k] >= 0.0, "V: must be >= 0 (client " + std::to_string(k) + ")");
    require(c.D_sizes[k] >= 1,
            "D_sizes: must be >= 1 (client " + std::to_string(k) + ")");
    require(c.rho[k] > 0.0 && c.rho[k] < 1.0,
            "rho: must be in (0,1) (client " + std::to_string(k) + ")");
    require(c.omega[k] > 0.0,
            "omega: must be > 0 (client " + std::to_string(k) + ")");
  }
}

inline ScenarioConfig parse_scenario(
    const std::string& text,
    std::optional<std::uint64_t> seed_override = std::nullopt) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("scenario line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (kv.count(key))
      throw std::invalid_argument(key + ": duplicate key");
    kv[key] = value;
  }

  const auto has = [&](const std::string& k) { return kv.count(k) > 0; };
  const auto scalar = [&](const std::string& k) {
    const auto v = detail::parse_number_list(k, kv.at(k));
    if (v.size() != 1)
      throw std::invalid_argument(k + ": expected a single value");
    return v[0];
  };
  const auto required = [&](const std::string& k) {
    if (!has(k)) throw std::invalid_argument(k + ": missing required key");
    return scalar(k);
  };
  // Either `name` (linear) or `name_db` must be present.
  const auto linear_or_db = [&](const std::string& k) {
    const bool lin = has(k), db = has(k + "_db");
    if (lin && db)
      throw std::invalid_argument(k + ": give either " + k + " or " + k +
                                  "_db, not both");
    if (lin) return scalar(k);
    if (db) return detail::db_to_linear(scalar(k + "_db"));
    throw std::invalid_argument(k + ": missing required key (or " + k +
                                "_db)");
  };

  ScenarioConfig c;
  c.K = static_cast<int>(required("K"));
  c.N = static_cast<int>(required("N"));
  c.T = required("T");
  if (has("T_epsilon")) c.T_epsilon = scalar("T_epsilon");
  c.P_max = required("P_max");
  c.P_sum = required("P_sum");
  {
    const bool lin = has("sigma2"), db = has("sigma2_db"), dbm = has("sigma2_dbm");
    if (lin + db + dbm != 1)
      throw std::invalid_argument(
          "sigma2: give exactly one of sigma2, sigma2_db, sigma2_dbm");
    if (lin) c.sigma2 = scalar("sigma2");
    if (db) c.sigma2 = detail::db_to_linear(scalar("sigma2_db"));
    if (dbm) c.sigma2 = detail::dbm_to_watt(scalar("sigma2_dbm"));
  }
  c.h0 = linear_or_db("h0");
  c.alpha = required("alpha");
  c.K_ric = linear_or_db("K_ric");
  if (has("lambda_loss")) c.lambda_loss = scalar("lambda_loss");
  if (has("beta")) c.beta = scalar("beta");
  if (has("seed")) c.seed = static_cast<std::uint64_t>(scalar("seed"));
  if (seed_override) c.seed = *seed_override;
  if (has("I_max")) c.I_max = static_cast<int>(scalar("I_max"));
  if (has("J_max")) c.J_max = static_cast<int>(scalar("J_max"));

  const auto per_client = [&](const std::string& k) {
    if (!has(k)) throw std::invalid_argument(k + ": missing required key");
    return detail::resolve_per_client(k, detail::parse_number_list(k, kv.at(k)),
                                      c.K);
  };
  c.B = per_client("B");
  c.V = per_client("V");
  c.rho = per_client("rho");
  {
    const bool lin = has("omega"), db = has("omega_db");
    if (lin == db)
      throw std::invalid_argument("omega: give exactly one of omega, omega_db");
    auto v = detail::parse_number_list(lin ? "omega" : "omega_db",
                                       kv.at(lin ? "omega" : "omega_db"));
    if (!lin)
      for (auto& x : v) x = detail::db_to_linear(x);
    c.omega = detail::resolve_per_client("omega", v, c.K);
  }
  {
    auto v = detail::resolve_per_client(
        "D_sizes", detail::parse_number_list("D_sizes", kv.at("D_sizes")), c.K);
    c.D_sizes.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k] != std::floor(v[k]))
        throw std::invalid_argument("D_sizes: must be integers");
      c.D_sizes[k] = static_cast<int>(v[k]);
    }
    if (!has("D_sizes")) throw std::invalid_argument("D_sizes: missing");
  }
  if (has("server_position")) {
    const auto v = detail::parse_number_list("server_position",
                                             kv.at("server_position"));
    if (v.size() != 2)
      throw std::invalid_argument("server_position: expected 2 values");
    c.server_position = {v[0], v[1]};
  }
  if (has("client_positions")) {
    const auto v = detail::parse_number_list("client_positions",
                                             kv.at("client_positions"));
    if (static_cast<int>(v.size()) != 2 * c.K)
      throw std::invalid_argument("client_positions: expected 2K values");
    c.client_positions.resize(static_cast<std::size_t>(c.K));
    for (int k = 0; k < c.K; ++k)
      c.client_positions[static_cast<std::size_t>(k)] = {
          v[static_cast<std::size_t>(2 * k)],
          v[static_cast<std::size_t>(2 * k + 1)]};
  } else {
    // Seeded uniform draw over a 100 m x 100 m square around the server.
    Rng rng(substream(c.seed, tags::positions));
    c.client_positions.resize(static_cast<std::size_t>(c.K));
    for (int k = 0; k < c.K; ++k)
      c.client_positions[static_cast<std::size_t>(k)] = {
          c.server_position[0] + rng.uniform(-50.0, 50.0),
          c.server_position[1] + rng.uniform(-50.0, 50.0)};
    c.auto_positions = true;
  }
  if (has("gamma")) {
    c.gamma = scalar("gamma");
  } else {
    c.gamma = 100.0 / (c.P_max * c.P_max);
  }

  validate_scenario(c);
  return c;
}

inline ScenarioConfig load_scenario(
    const std::string& path,
    std::optional<std::uint64_t> seed_override = std::nullopt) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str(), seed_override);
}

// Serializes with all defaults resolved and dB conversions applied, so a
// reload reproduces the config exactly.
inline std::string save_scenario(const ScenarioConfig& c) {
  std::ostringstream os;
  os.precision(17);
  const auto list = [&os](const std::string& key, const auto& v) {
    os << key << " = ";
    for (std::size_t i = 0; i < v.size(); ++i)
      os << (i ? ", " : "") << v[i];
    os << "\n";
  };
  os << "K = " << c.K << "\n";
  os << "N = " << c.N << "\n";
  os << "T = " << c.T << "\n";
  os << "T_epsilon = " << c.T_epsilon << "\n";
  os << "P_max = " << c.P_max << "\n";
  os << "P_sum = " << c.P_sum << "\n";
  os << "sigma2 = " << c.sigma2 << "\n";
  list("B", c.B);
  list("V", c.V);
  list("D_sizes", c.D_sizes);
  list("rho", c.rho);
  os << "h0 = " << c.h0 << "\n";
  os << "alpha = " << c.alpha << "\n";
  list("omega", c.omega);
  os << "K_ric = " << c.K_ric << "\n";
  os << "lambda_loss = " << c.lambda_loss << "\n";
  os << "beta = " << c.beta << "\n";
  os << "gamma = " << c.gamma << "\n";
  os << "I_max = " << c.I_max << "\n";
  os << "J_max = " << c.J_max << "\n";
  os << "seed = " << c.seed << "\n";
  os << "server_position = " << c.server_position[0] << ", "
     << c.server_position[1] << "\n";
  os << "client_positions = ";
  for (std::size_t k = 0; k < c.client_positions.size(); ++k)
    os << (k ? ", " : "") << c.client_positions[k][0] << ", "
       << c.client_positions[k][1];
  os << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Synthetic datasets: cluster_count prototype images per client, round-robin
// assignment i -> i mod cluster_count, per-image perturbation of magnitude
// <= noise, and prototype-dependent ground-truth losses (near-equal within a
// cluster, jitter scaled by noise). The loss rule is photometric: a smooth
// nonlinear function of prototype brightness, so feature-similar images
// carry similar losses, which is the premise representative sampling rests
// on.

inline std::vector<ClientDataset> generate_synthetic_datasets(
    const ScenarioConfig& config, int cluster_count, double noise,
    int img_h = 8, int img_w = 8) {
  if (cluster_count < 1)
    throw std::invalid_argument("cluster_count: must be >= 1");
  if (noise < 0.0) throw std::invalid_argument("noise: must be >= 0");

  std::vector<ClientDataset> out(static_cast<std::size_t>(config.K));
  for (int k = 0; k < config.K; ++k) {
    Rng rng(substream(config.seed, tags::synth, static_cast<std::uint64_t>(k)));
    std::vector<Image> prototypes;
    std::vector<double> proto_loss;
    prototypes.reserve(static_cast<std::size_t>(cluster_count));
    for (int c = 0; c < cluster_count; ++c) {
      Image proto(img_h, img_w);
      // Saturated colors along a smooth hue/brightness ramp: hue stays
      // well-defined under pixel noise, and feature-adjacent prototypes
      // stay adjacent in brightness.
      const double brightness =
          0.15 + 0.8 * (c + rng.uniform()) / cluster_count;
      const double hue = 0.05 + 0.9 * (c + rng.uniform()) / cluster_count;
      double r, g, b;
      detail::hsv_to_rgb(hue, 0.7, brightness, r, g, b);
      for (int y = 0; y < img_h; ++y)
        for (int x = 0; x < img_w; ++x) {
          const double tex = rng.uniform(-0.05, 0.05);
          proto.at(y, x, 0) = std::clamp(r + tex, 0.02, 0.98);
          proto.at(y, x, 1) = std::clamp(g + tex, 0.02, 0.98);
          proto.at(y, x, 2) = std::clamp(b + tex, 0.02, 0.98);
        }
      prototypes.push_back(std::move(proto));
      proto_loss.push_back(brightness);  // loss rule applied per image below
    }

    auto& ds = out[static_cast<std::size_t>(k)];
    const int n = config.D_sizes[static_cast<std::size_t>(k)];
    ds.images.reserve(static_cast<std::size_t>(n));
    ds.poses.reserve(static_cast<std::size_t>(n));
    std::vector<double> losses;
    losses.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int proto = i % cluster_count;
      Image img = prototypes[static_cast<std::size_t>(proto)];
      double shift = 0.0;
      if (noise > 0.0) {
        // exposure-like global shift plus light dither; total magnitude
        // stays within +-noise per pixel
        shift = rng.uniform(-0.7 * noise, 0.7 * noise);
        for (auto& v : img.rgb)
          v = std::clamp(
              v + shift + rng.uniform(-0.3 * noise, 0.3 * noise), 0.0, 1.0);
      }
      ds.images.push_back(std::move(img));
      Pose pose;
      for (auto& p : pose) p = rng.uniform(-1.0, 1.0);
      ds.poses.push_back(pose);
      // Rendering degrades quadratically with exposure: a smooth function
      // of the image's realized brightness, so it is prototype-dominated
      // with a noise-scaled spread inside each cluster.
      const double b_img =
          proto_loss[static_cast<std::size_t>(proto)] + shift;
      const double jitter =
          noise > 0.0 ? 0.1 * noise * rng.uniform(-1.0, 1.0) : 0.0;
      losses.push_back(std::max(0.0, 0.05 + 0.4 * b_img * b_img + jitter));
    }
    ds.precomputed_loss = std::move(losses);
    validate_dataset(ds, k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Image file I/O: binary P6 PPM and a raw float32 tensor with a one-line
// ASCII shape header ("f32 <height> <width> 3").

inline Image read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open image: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P6")
    throw std::invalid_argument(path + ": expected P6 PPM, got '" + magic + "'");
  const auto next_int = [&f, &path]() {
    // skip whitespace and '#' comment lines
    for (;;) {
      const int ch = f.peek();
      if (ch == '#') {
        std::string comment;
        std::getline(f, comment);
      } else if (std::isspace(ch)) {
        f.get();
      } else {
        break;
      }
    }
    int v = 0;
    if (!(f >> v)) throw std::invalid_argument(path + ": bad PPM header");
    return v;
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw std::invalid_argument(path + ": bad PPM dimensions");
  f.get();  // single whitespace after maxval
  Image img(h, w);
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(static_cast<std::size_t>(h) * w * 3 * bytes);
  f.read(reinterpret_cast<char*>(raw.data()),
         static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(f.gcount()) != raw.size())
    throw std::invalid_argument(path + ": truncated PPM payload");
  for (std::size_t i = 0; i < img.rgb.size(); ++i) {
    unsigned v = raw[i * bytes];
    if (bytes == 2) v = (v << 8) | raw[i * bytes + 1];  // big-endian per spec
    img.rgb[i] = static_cast<double>(v) / maxval;
  }
  return img;
}

inline void write_ppm(const std::string& path, const Image& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot write image: " + path);
  f << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.rgb.size());
  for (std::size_t i = 0; i < img.rgb.size(); ++i)
    raw[i] = static_cast<unsigned char>(
        std::lround(std::clamp(img.rgb[i], 0.0, 1.0) * 255.0));
  f.write(reinterpret_cast<const char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
}

inline Image read_f32(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open image: " + path);
  std::string magic;
  int h = 0, w = 0, c = 0;
  f >> magic >> h >> w >> c;
  if (magic != "f32" || h <= 0 || w <= 0 || c != 3)
    throw std::invalid_argument(path + ": bad f32 header");
  f.get();  // newline
  Image img(h, w);
  std::vector<float> raw(img.rgb.size());
  f.read(reinterpret_cast<char*>(raw.data()),
         static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (static_cast<std::size_t>(f.gcount()) != raw.size() * sizeof(float))
    throw std::invalid_argument(path + ": truncated f32 payload");
  for (std::size_t i = 0; i < raw.size(); ++i)
    img.rgb[i] = static_cast<double>(raw[i]);
  return img;
}

inline void write_f32(const std::string& path, const Image& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot write image: " + path);
  f << "f32 " << img.height << " " << img.width << " 3\n";
  std::vector<float> raw(img.rgb.size());
  for (std::size_t i = 0; i < img.rgb.size(); ++i)
    raw[i] = static_cast<float>(img.rgb[i]);
  f.write(reinterpret_cast<const char*>(raw.data()),
          static_cast<std::streamsize>(raw.size() * sizeof(float)));
}

inline Image read_image(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".f32")
    return read_f32(path);
  return read_ppm(path);
}

// ---------------------------------------------------------------------------
// Dataset manifest: per-client image/pose lists with optional rendered
// counterparts or precomputed losses. Lines:
//   client <k>
//   image <path> pose <6 reals> [rendered <path> | loss <value>]
// Paths are resolved relative to the manifest location.

inline std::vector<ClientDataset> load_manifest(const std::string& path,
                                                int expected_clients) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open manifest: " + path);
  const auto base = std::filesystem::path(path).parent_path();

  std::vector<ClientDataset> out(static_cast<std::size_t>(expected_clients));
  int current = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    const auto fail = [&](const std::string& msg) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " +
                                  msg);
    };
    if (word == "client") {
      int k = -1;
      if (!(ls >> k) || k < 0 || k >= expected_clients)
        fail("bad client index");
      current = k;
    } else if (word == "image") {
      if (current < 0) fail("image line before any client line");
      auto& ds = out[static_cast<std::size_t>(current)];
      std::string img_path;
      ls >> img_path;
      if (img_path.empty()) fail("missing image path");
      std::string kw;
      ls >> kw;
      if (kw != "pose") fail("expected 'pose'");
      Pose pose;
      for (auto& v : pose)
        if (!(ls >> v)) fail("pose needs 6 values");
      ds.images.push_back(read_image((base / img_path).string()));
      ds.poses.push_back(pose);
      if (ls >> kw) {
        if (kw == "rendered") {
          std::string rpath;
          if (!(ls >> rpath)) fail("missing rendered path");
          if (ds.precomputed_loss) fail("mixing rendered and loss entries");
          if (!ds.rendered) ds.rendered.emplace();
          ds.rendered->push_back(read_image((base / rpath).string()));
        } else if (kw == "loss") {
          double v = 0.0;
          if (!(ls >> v)) fail("missing loss value");
          if (ds.rendered) fail("mixing rendered and loss entries");
          if (!ds.precomputed_loss) ds.precomputed_loss.emplace();
          ds.precomputed_loss->push_back(v);
        } else {
          fail("unknown trailing token '" + kw + "'");
        }
      } else if (ds.rendered || ds.precomputed_loss) {
        fail("all images of a client must carry the same annotation");
      }
    } else {
      fail("unknown directive '" + word + "'");
    }
  }
  for (int k = 0; k < expected_clients; ++k)
    validate_dataset(out[static_cast<std::size_t>(k)], k);
  return out;
}

}  // namespace sttgs
