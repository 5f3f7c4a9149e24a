#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sw4dvar/harness.hpp"

using namespace sw4dvar;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.nlon = 12;
  cfg.nlat = 8;
  cfg.params.p = 2;
  cfg.params.q = 2;
  cfg.minopts.maxiter = 15;
  return cfg;
}

}  // namespace

TEST_CASE("default configuration mirrors the protocol lists") {
  const ExperimentConfig cfg;
  CHECK(cfg.dt_list == std::vector<double>{50.0, 100.0, 150.0, 200.0});
  CHECK(cfg.ntobs_list == std::vector<int>{1, 2, 4, 6, 8, 10});
  CHECK(cfg.nsvs_list == std::vector<int>{4, 6, 8, 10, 12});
  CHECK(cfg.problems == std::vector<int>{1, 2, 3, 4});
  CHECK(cfg.total_steps == 30);
}

TEST_CASE("dt sweep rows and the frozen limit") {
  ExperimentConfig cfg = small_config();
  const std::vector<DtSweepRow> rows = run_dt_sweep(cfg);
  REQUIRE(rows.size() == 4);
  for (size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].dt == cfg.dt_list[k]);
    CHECK(rows[k].rel_diff >= 0.0);
    CHECK(std::isfinite(rows[k].rel_diff));
  }

  cfg.dt_list = {0.0};
  const std::vector<DtSweepRow> frozen = run_dt_sweep(cfg);
  CHECK(frozen[0].rel_diff == 0.0);
}

TEST_CASE("error metrics over the assimilation window") {
  const ExperimentConfig cfg = small_config();
  const SphereGrid grid = build_grid(cfg.nlon, cfg.nlat);
  const StateVector x0 = synth_initial(cfg.seed, grid, cfg.field);
  CellSetup cell = build_cell(grid, cfg.params, x0, 3, 1, 1, cfg.seed, 1.0, 30);
  REQUIRE(cell.usable());

  // x = x_b gives identical metrics by definition.
  const auto [eb, eda] = compute_err_metrics(cell.setup.x_b, cell.setup);
  CHECK(eb == eda);
  CHECK(eb > 0.0);  // rounding makes the observations differ from the trajectory

  // A single perfect observation gives zero background error.
  CellSetup one = build_cell(grid, cfg.params, x0, 1, 1, 1, cfg.seed, 1.0, 30);
  one.setup.obs.obs[0] = one.setup.x_b.data;
  CHECK(compute_err_metrics(one.setup.x_b, one.setup).first == 0.0);
}

TEST_CASE("build_cell reports the TSVD failure for nSVs past the rank") {
  const ExperimentConfig cfg = small_config();
  const SphereGrid grid = build_grid(cfg.nlon, cfg.nlat);
  const StateVector x0 = synth_initial(cfg.seed, grid, cfg.field);
  CHECK(build_cell(grid, cfg.params, x0, 2, 1, 1, cfg.seed, 1.0, 30).usable());
  const CellSetup failed = build_cell(grid, cfg.params, x0, 2, 1, 4, cfg.seed, 1.0, 30);
  CHECK(failed.tsvd_status == TsvdStatus::RankDeficient);
}

TEST_CASE("tests-set1 sweep marks failures and keeps descent") {
  ExperimentConfig cfg = small_config();
  cfg.dt_list = {50.0, 200.0};
  cfg.ntobs_list = {1, 3};
  cfg.nsvs_list = {1, 4};
  cfg.problems = {1, 2};
  const std::vector<ErrRecord> records = run_tests_set1(cfg);
  REQUIRE(records.size() == 2 * 2 * 2 * 2);

  for (const ErrRecord& r : records) {
    CHECK(r.err_b >= 0.0);
    if (r.nsvs == 1) {
      CHECK_FALSE(r.da_failed);
      CHECK(r.err_da >= 0.0);
      CHECK(r.err_da <= r.err_b * (1.0 + 1e-9));
    } else {
      CHECK(r.da_failed);  // rank-1 B cannot supply 4 singular values
    }
  }
}

TEST_CASE("trend series shapes and the n = 0 anchor") {
  ExperimentConfig cfg = small_config();
  cfg.trend_ntobs = 4;
  const std::vector<TrendSeries> set2 = run_trend_series(cfg, TrendMode::Set2);
  REQUIRE(set2.size() == 1);
  CHECK(set2[0].ntobs == 4);
  CHECK(set2[0].err_b.size() == 4);
  CHECK(set2[0].err_da.size() == 4);

  // n = 0 is the direct misfit of x_b against the first observation.
  const SphereGrid grid = build_grid(cfg.nlon, cfg.nlat);
  const StateVector x0 = synth_initial(cfg.seed, grid, cfg.field);
  const CellSetup cell = build_cell(grid, cfg.params, x0, 4, 1, 1, cfg.seed, 1.0, 30);
  const std::vector<double>& v0 = cell.setup.obs.obs[0];
  double num = 0.0, den = 0.0;
  for (size_t n = 0; n < v0.size(); ++n) {
    const double d = cell.setup.H.mask[n] * cell.setup.x_b.data[n] - v0[n];
    num += d * d;
    den += v0[n] * v0[n];
  }
  CHECK(set2[0].err_b[0] == doctest::Approx(std::sqrt(num / den)).epsilon(1e-14));
  for (const double e : set2[0].err_da) {
    CHECK(e >= 0.0);
    CHECK(std::isfinite(e));
  }

  const std::vector<TrendSeries> set3 = run_trend_series(cfg, TrendMode::Set3);
  REQUIRE(set3.size() == 3);
  CHECK(set3[0].ntobs == 2);
  CHECK(set3[1].ntobs == 6);
  CHECK(set3[2].ntobs == 10);
  for (const TrendSeries& ts : set3) CHECK(ts.err_b.size() == static_cast<size_t>(ts.ntobs));
}

TEST_CASE("CSV round trip is lossless") {
  ExperimentConfig cfg = small_config();
  cfg.dt_list = {50.0};
  cfg.ntobs_list = {1, 2};
  cfg.nsvs_list = {1, 6};
  cfg.problems = {3};
  const std::vector<ErrRecord> records = run_tests_set1(cfg);
  const std::string csv = err_records_csv(records);
  const std::vector<ErrRecord> back = parse_err_records_csv(csv);
  REQUIRE(back.size() == records.size());
  for (size_t k = 0; k < records.size(); ++k) {
    CHECK(back[k].problem == records[k].problem);
    CHECK(back[k].dt == records[k].dt);
    CHECK(back[k].ntobs == records[k].ntobs);
    CHECK(back[k].nsvs == records[k].nsvs);
    CHECK(back[k].err_b == records[k].err_b);        // bitwise via %.17g
    CHECK(back[k].da_failed == records[k].da_failed);
    if (!back[k].da_failed) CHECK(back[k].err_da == records[k].err_da);
  }
  CHECK(err_records_csv(back) == csv);
  CHECK_THROWS_AS(parse_err_records_csv("not,a,header\n"), std::runtime_error);
}

TEST_CASE("harness runs are deterministic") {
  ExperimentConfig cfg = small_config();
  cfg.dt_list = {50.0};
  cfg.ntobs_list = {2};
  cfg.nsvs_list = {1};
  cfg.problems = {4};
  CHECK(err_records_csv(run_tests_set1(cfg)) == err_records_csv(run_tests_set1(cfg)));
  CHECK(dt_sweep_csv(run_dt_sweep(cfg)) == dt_sweep_csv(run_dt_sweep(cfg)));
  CHECK(trend_csv(run_trend_series(cfg, TrendMode::Set2)) ==
        trend_csv(run_trend_series(cfg, TrendMode::Set2)));
}
