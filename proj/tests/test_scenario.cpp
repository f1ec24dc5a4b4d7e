#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sttgs/scenario.hpp"

using namespace sttgs;

namespace {
const std::string kDefaultScenario =
    std::string(STTGS_SOURCE_DIR) + "/scenarios/default.scn";

std::string minimal_scenario(const std::string& extra = "",
                             const std::string& rho = "0.1") {
  return "K = 2\nN = 4\nT = 100\nP_max = 0.2\nP_sum = 0.3\n"
         "sigma2 = 1e-13\nB = 1e7\nV = 1e6\nD_sizes = 20\nrho = " +
         rho + "\nh0_db = -30\nalpha = 3\nomega_db = -20\nK_ric_db = -26\n" +
         extra;
}
}  // namespace

TEST_CASE("default scenario file carries the headline parameters",
          "[scenario]") {
  const auto c = load_scenario(kDefaultScenario);
  CHECK(c.K == 5);
  CHECK(c.N == 64);
  CHECK(c.T == 350.0);
  CHECK(c.P_max == 0.2);
  CHECK(c.P_sum == 0.3);
  CHECK(c.sigma2 == Catch::Approx(1e-13).epsilon(1e-12));
  CHECK(c.h0 == Catch::Approx(1e-3));
  CHECK(c.omega[0] == Catch::Approx(1e-2));
  CHECK(c.K_ric == Catch::Approx(std::pow(10.0, -2.6)));
  CHECK(c.seed == 0);
  CHECK(c.auto_positions);
  REQUIRE(c.client_positions.size() == 5);
  for (const auto& pos : c.client_positions) {
    CHECK(std::abs(pos[0]) <= 50.0);
    CHECK(std::abs(pos[1]) <= 50.0);
  }
}

TEST_CASE("rho outside (0,1) is rejected by name", "[scenario]") {
  CHECK_THROWS_WITH(parse_scenario(minimal_scenario("", "1.2, 0.1")),
                    Catch::Matchers::ContainsSubstring("rho"));
  CHECK_THROWS_WITH(parse_scenario(minimal_scenario("", "0.0")),
                    Catch::Matchers::ContainsSubstring("rho"));
}

TEST_CASE("seed defaults to zero and gamma to 100/P_max^2", "[scenario]") {
  const auto c = parse_scenario(minimal_scenario());
  CHECK(c.seed == 0);
  CHECK(c.gamma == Catch::Approx(100.0 / (0.2 * 0.2)));
  CHECK(c.T_epsilon == 1e-3);
  CHECK(c.I_max == 60);
  CHECK(c.J_max == 20);
}

TEST_CASE("scenario round-trips through serialization", "[scenario]") {
  const auto c = load_scenario(kDefaultScenario);
  const auto again = parse_scenario(save_scenario(c));
  CHECK(c == again);
  // a second serialization is byte-identical too
  CHECK(save_scenario(c) == save_scenario(again));
}

TEST_CASE("seed override changes auto-drawn positions deterministically",
          "[scenario]") {
  const auto a = load_scenario(kDefaultScenario, 7);
  const auto b = load_scenario(kDefaultScenario, 7);
  const auto c = load_scenario(kDefaultScenario, 8);
  CHECK(a == b);
  CHECK_FALSE(a.client_positions == c.client_positions);
}

TEST_CASE("distances are Euclidean against the server position",
          "[scenario]") {
  auto c = parse_scenario(minimal_scenario(
      "client_positions = 3, 4, -6, 8\nserver_position = 0, 0\n"));
  const auto d = c.distances();
  CHECK(d[0] == Catch::Approx(5.0));
  CHECK(d[1] == Catch::Approx(10.0));
}

TEST_CASE("dB and dBm keys convert to linear units", "[scenario]") {
  const auto c = parse_scenario(minimal_scenario());
  CHECK(c.sigma2 == 1e-13);
  const auto c2 = parse_scenario(
      "K = 1\nN = 1\nT = 10\nP_max = 1\nP_sum = 1\nsigma2_dbm = -100\n"
      "B = 1\nV = 1\nD_sizes = 2\nrho = 0.5\nh0 = 0.001\nalpha = 2\n"
      "omega = 1\nK_ric = 0\n");
  CHECK(c2.sigma2 == Catch::Approx(1e-13).epsilon(1e-12));
}

TEST_CASE("pilot sizes are the ceiling of rho |D|", "[scenario]") {
  auto c = parse_scenario(minimal_scenario());
  c.rho = {0.1, 0.1};
  c.D_sizes = {25, 30};
  const auto m = c.pilot_sizes();
  CHECK(m[0] == 3);  // ceil(2.5)
  CHECK(m[1] == 3);
}

TEST_CASE("degenerate synthetic generator yields identical images and losses",
          "[scenario]") {
  auto c = parse_scenario(minimal_scenario());
  c.D_sizes = {6, 6};
  const auto data = generate_synthetic_datasets(c, 1, 0.0);
  REQUIRE(data.size() == 2);
  for (const auto& ds : data) {
    REQUIRE(ds.images.size() == 6);
    REQUIRE(ds.precomputed_loss.has_value());
    for (std::size_t i = 1; i < ds.images.size(); ++i) {
      CHECK(ds.images[i].rgb == ds.images[0].rgb);
      CHECK((*ds.precomputed_loss)[i] == (*ds.precomputed_loss)[0]);
    }
  }
}

TEST_CASE("synthetic generation is a pure function of the seed", "[scenario]") {
  auto c = parse_scenario(minimal_scenario());
  c.seed = 42;
  const auto a = generate_synthetic_datasets(c, 3, 0.05);
  const auto b = generate_synthetic_datasets(c, 3, 0.05);
  for (int k = 0; k < c.K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    REQUIRE(a[ku].images.size() == b[ku].images.size());
    for (std::size_t i = 0; i < a[ku].images.size(); ++i)
      CHECK(a[ku].images[i].rgb == b[ku].images[i].rgb);
    CHECK(*a[ku].precomputed_loss == *b[ku].precomputed_loss);
  }
}

TEST_CASE("round-robin prototype assignment at noise zero", "[scenario]") {
  auto c = parse_scenario(minimal_scenario());
  c.D_sizes = {30, 30};
  const auto data = generate_synthetic_datasets(c, 3, 0.0);
  const auto& ds = data[0];
  // images i and i+3 share a prototype; 3 distinct prototypes, 10 images each
  for (int i = 0; i < 30; ++i)
    CHECK(ds.images[static_cast<std::size_t>(i)].rgb ==
          ds.images[static_cast<std::size_t>(i % 3)].rgb);
  CHECK_FALSE(ds.images[0].rgb == ds.images[1].rgb);
  CHECK_FALSE(ds.images[1].rgb == ds.images[2].rgb);
  CHECK_FALSE(ds.images[0].rgb == ds.images[2].rgb);
}

TEST_CASE("image files round-trip through ppm and f32", "[scenario]") {
  const auto dir = std::filesystem::temp_directory_path() / "sttgs_img_test";
  std::filesystem::create_directories(dir);
  Image img(4, 5);
  Rng rng(3);
  for (auto& v : img.rgb) v = rng.uniform();

  const auto f32_path = (dir / "a.f32").string();
  write_f32(f32_path, img);
  const auto back = read_f32(f32_path);
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.rgb.size(); ++i)
    CHECK(back.rgb[i] == Catch::Approx(img.rgb[i]).margin(1e-7));

  const auto ppm_path = (dir / "a.ppm").string();
  write_ppm(ppm_path, img);
  const auto back8 = read_ppm(ppm_path);
  REQUIRE(back8.same_shape(img));
  for (std::size_t i = 0; i < img.rgb.size(); ++i)
    CHECK(back8.rgb[i] == Catch::Approx(img.rgb[i]).margin(1.0 / 255.0));
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest loads images, poses, and per-image losses", "[scenario]") {
  const auto dir = std::filesystem::temp_directory_path() / "sttgs_manifest";
  std::filesystem::create_directories(dir);
  Image img(2, 2, 0.5);
  write_ppm((dir / "i0.ppm").string(), img);
  write_f32((dir / "i1.f32").string(), img);
  {
    std::ofstream m(dir / "data.manifest");
    m << "# two clients\n";
    m << "client 0\n";
    m << "image i0.ppm pose 1 2 3 4 5 6 loss 0.25\n";
    m << "image i1.f32 pose 0 0 0 0 0 1 loss 0.75\n";
    m << "client 1\n";
    m << "image i0.ppm pose 1 1 1 1 1 1 rendered i1.f32\n";
  }
  const auto data = load_manifest((dir / "data.manifest").string(), 2);
  REQUIRE(data.size() == 2);
  REQUIRE(data[0].images.size() == 2);
  REQUIRE(data[0].precomputed_loss.has_value());
  CHECK((*data[0].precomputed_loss)[0] == 0.25);
  CHECK((*data[0].precomputed_loss)[1] == 0.75);
  CHECK(data[0].poses[0][0] == 1.0);
  CHECK(data[0].poses[0][5] == 6.0);
  REQUIRE(data[1].rendered.has_value());
  CHECK(data[1].rendered->size() == 1);

  // mixing loss and rendered inside one client is rejected
  {
    std::ofstream m(dir / "bad.manifest");
    m << "client 0\nimage i0.ppm pose 0 0 0 0 0 0 loss 0.1\n";
    m << "image i1.f32 pose 0 0 0 0 0 0 rendered i0.ppm\n";
  }
  CHECK_THROWS_AS(load_manifest((dir / "bad.manifest").string(), 1),
                  std::invalid_argument);
  std::filesystem::remove_all(dir);
}
