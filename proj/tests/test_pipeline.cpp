#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "sttgs/oracle.hpp"
#include "sttgs/pipeline.hpp"

using namespace sttgs;

namespace {

ScenarioConfig synthetic_config(std::uint64_t seed) {
  auto c = test::default_config(seed);
  // small datasets keep the clustering cheap; volumes rescaled so the time
  // budget still bites
  c.D_sizes.assign(5, 40);
  for (auto& v : c.V) v *= 280.0 / 40.0;
  return c;
}

}  // namespace

TEST_CASE("pipeline runs end to end on synthetic data", "[pipeline]") {
  const auto c = synthetic_config(1);
  const auto data = generate_synthetic_datasets(c, 4, 0.05);
  const auto res = run_pipeline(c, data);

  CHECK(res.pttm.feasible);
  CHECK(res.pttm.T0_star > 0.0);
  CHECK(res.pttm.T0_star < c.T);
  CHECK(res.certificate.ok);
  CHECK(res.final_alloc.feasible);
  for (int k = 0; k < 5; ++k) {
    CHECK(res.pilots[static_cast<std::size_t>(k)].indices.size() == 4);  // ceil(0.1*40)
    CHECK(res.pi_tilde(k) >= 0.0);
    CHECK_FALSE(std::isnan(res.pi_true(k)));
  }
}

TEST_CASE("pipeline reports are byte-identical across reruns", "[pipeline]") {
  const auto c = synthetic_config(7);
  const auto data = generate_synthetic_datasets(c, 4, 0.05);
  const auto a = run_pipeline(c, data);
  const auto b = run_pipeline(c, data);
  CHECK(summary_text(a) == summary_text(b));
  CHECK(allocation_csv(a.final_alloc, a.pi_tilde) ==
        allocation_csv(b.final_alloc, b.pi_tilde));
  CHECK(pttm_trace_csv(a.pttm) == pttm_trace_csv(b.pttm));
  CHECK(pamm_trace_csv(a.trace) == pamm_trace_csv(b.trace));
  CHECK(losses_csv(a) == losses_csv(b));

  // a different seed changes the channel draw and the report
  auto c2 = synthetic_config(8);
  const auto data2 = generate_synthetic_datasets(c2, 4, 0.05);
  const auto other = run_pipeline(c2, data2);
  CHECK(summary_text(a) != summary_text(other));
}

TEST_CASE("pipeline surfaces stage errors by name", "[pipeline]") {
  const auto c = synthetic_config(2);
  auto data = generate_synthetic_datasets(c, 4, 0.05);
  data.pop_back();
  CHECK_THROWS_AS(run_pipeline(c, data), PipelineError);
  try {
    run_pipeline(c, data);
  } catch (const PipelineError& e) {
    CHECK(e.stage_name == "input");
  }
}

TEST_CASE("pilot overload aborts with an infeasibility diagnosis",
          "[pipeline]") {
  auto c = synthetic_config(3);
  for (auto& v : c.V) v *= 1e4;  // pilot bits exceed any supportable rate
  const auto data = generate_synthetic_datasets(c, 4, 0.05);
  CHECK_THROWS_AS(run_pipeline(c, data), InfeasibleError);
}

TEST_CASE("gain matrix override bypasses channel sampling", "[pipeline]") {
  const auto c = synthetic_config(4);
  const auto data = generate_synthetic_datasets(c, 4, 0.05);
  const auto drawn = draw_gains(c);
  const auto res = run_pipeline(c, data, drawn);
  const auto res2 = run_pipeline(c, data);
  CHECK(summary_text(res) == summary_text(res2));  // same gains either way

  const auto reloaded = parse_gain_matrix(save_gain_matrix(drawn));
  const auto res3 = run_pipeline(c, data, reloaded);
  CHECK(summary_text(res3) == summary_text(res));
}

TEST_CASE("predicted losses track the ground truth on clustered data",
          "[pipeline]") {
  const auto c = synthetic_config(5);
  const auto data = generate_synthetic_datasets(c, 4, 0.02);
  const auto res = run_pipeline(c, data);
  for (int k = 0; k < 5; ++k) {
    const double rel =
        std::abs(res.pi_tilde(k) - res.pi_true(k)) /
        std::max(1e-9, res.pi_true(k));
    REQUIRE(rel < 0.25);  // representative sampling keeps prediction close
  }
}

TEST_CASE("loss csv round-trips", "[pipeline]") {
  Eigen::VectorXd pi(3);
  pi << 0.5, 0.25, 0.125;
  const auto dir = std::filesystem::temp_directory_path() / "sttgs_loss";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "losses.csv").string();
  {
    std::ofstream f(path);
    f << save_loss_csv(pi);
  }
  const auto back = load_loss_csv(path, 3);
  CHECK((back - pi).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK_THROWS_AS(load_loss_csv(path, 4), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST_CASE("rho sweep lowers the median prediction error", "[pipeline]") {
  auto c = synthetic_config(0);
  // 20-image datasets: the grid maps to 1 vs 4 pilot clusters, well inside
  // the prototype count
  c.D_sizes.assign(5, 20);
  for (auto& v : c.V) v *= 2.0;
  SweepOptions opt;
  opt.cluster_count = 4;
  opt.noise = 0.05;
  const std::vector<double> grid = {0.05, 0.2};
  const std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  const auto rep = run_sweep(c, SweepParameter::rho, grid, seeds, opt);
  REQUIRE(rep.cells.size() == 10);
  double med_lo = -1.0, med_hi = -1.0;
  {
    std::vector<double> lo_vals, hi_vals;
    for (const auto& cell : rep.cells) {
      if (cell.status != "ok") continue;
      (cell.value == grid[0] ? lo_vals : hi_vals).push_back(cell.mse);
    }
    med_lo = quantile(lo_vals, 0.5);
    med_hi = quantile(hi_vals, 0.5);
  }
  CHECK(med_hi <= med_lo + 1e-12);  // more pilots never hurt the median
  CHECK(rep.cells_csv.find("param_value,seed,status") == 0);
  CHECK(rep.aggregate_csv.find("param_value,ok_runs") == 0);
}

TEST_CASE("sweep records per-cell failures without aborting", "[pipeline]") {
  auto c = synthetic_config(0);
  SweepOptions opt;
  const std::vector<double> grid = {1e-9};  // T so small pilots cannot fit
  const std::vector<std::uint64_t> seeds = {0, 1};
  const auto rep = run_sweep(c, SweepParameter::T, grid, seeds, opt);
  REQUIRE(rep.cells.size() == 2);
  for (const auto& cell : rep.cells)
    CHECK(cell.status.rfind("infeasible", 0) == 0);
}

TEST_CASE("quantiles interpolate order statistics", "[pipeline]") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0}, 0.5) == Catch::Approx(1.5));
  CHECK(quantile({5.0}, 0.25) == 5.0);
  CHECK(std::isnan(quantile({}, 0.5)));
}
