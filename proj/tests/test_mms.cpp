#include "twoscale/mms.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "twoscale/config.hpp"
#include "twoscale/errors.hpp"
#include "twoscale/studies.hpp"

using namespace twoscale;

TEST_CASE("hand-derived sources leave zero strong-form residual") {
  CHECK(mms_residual_check(mms_trivial()) <= 1e-10);
  CHECK(mms_residual_check(mms_spatial()) <= 1e-10);
  CHECK(mms_residual_check(mms_temporal()) <= 1e-10);
}

TEST_CASE("the residual check notices a corrupted source") {
  MMSCase c = mms_spatial();
  const auto good = c.s3;
  c.s3 = [good](double x, double t) { return good(x, t) + 1e-3; };
  CHECK(mms_residual_check(c) >= 1e-4);

  MMSCase c2 = mms_spatial();
  const auto w = c2.w1;
  // A target violating the flux-free wall constraint must be flagged too.
  c2.w1 = [w](double x, double u, double v, double t) {
    return w(x, u, v, t) + 1e-3 * u;
  };
  CHECK(mms_residual_check(c2) >= 1e-5);
}

TEST_CASE("exactly representable steady targets reproduce to roundoff") {
  const ConvergenceTable t = run_mms_study(mms_trivial(), 3, RefinementMode::Space);
  REQUIRE(t.levels.size() == 3);
  for (const ConvergenceLevel& row : t.levels) {
    CHECK(row.err_w1 <= 1e-10);
    CHECK(row.err_w2 <= 1e-10);
    CHECK(row.err_w3 <= 1e-10);
    CHECK(row.err_w4 <= 1e-10);
  }
  CHECK(std::isnan(t.fitted_w1));
}

TEST_CASE("joint ladder shows second-order spatial convergence") {
  const ConvergenceTable t = run_mms_study(mms_spatial(), 4, RefinementMode::Space);
  REQUIRE(t.levels.size() == 4);
  for (std::size_t l = 1; l < t.levels.size(); ++l) {
    CHECK(t.levels[l].h == doctest::Approx(0.5 * t.levels[l - 1].h));
    CHECK(t.levels[l].dt == doctest::Approx(0.25 * t.levels[l - 1].dt));
    CHECK(t.levels[l].err_w1 < t.levels[l - 1].err_w1);
    CHECK(t.levels[l].err_w2 < t.levels[l - 1].err_w2);
    CHECK(t.levels[l].err_w3 < t.levels[l - 1].err_w3);
  }
  CHECK(t.fitted_w1 >= 1.9);
  CHECK(t.fitted_w2 >= 1.9);
  CHECK(t.fitted_w3 >= 1.9);
}

TEST_CASE("dt ladder shows at least first-order temporal convergence") {
  const ConvergenceTable t = run_mms_study(mms_temporal(), 4, RefinementMode::Time);
  REQUIRE(t.levels.size() == 4);
  for (std::size_t l = 1; l < t.levels.size(); ++l) {
    CHECK(t.levels[l].h == t.levels[0].h);
    CHECK(t.levels[l].dt == doctest::Approx(0.5 * t.levels[l - 1].dt));
  }
  CHECK(t.fitted_w1 >= 0.9);
  CHECK(t.fitted_w2 >= 0.9);
  CHECK(t.fitted_w3 >= 0.9);
  CHECK(t.fitted_w4 >= 0.9);
}

TEST_CASE("study preconditions and table format") {
  CHECK_THROWS_AS(run_mms_study(mms_trivial(), 2, RefinementMode::Space),
                  ValidationError);

  const ConvergenceTable t = run_mms_study(mms_temporal(), 3, RefinementMode::Time);
  std::ostringstream a, b;
  write_convergence_table(t, a);
  write_convergence_table(t, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("level,h,dt,err_w1,err_w2,err_w3,err_w4,"
                      "order_w1,order_w2,order_w3,order_w4\n",
                      0) == 0);

  // Same study, fresh run: identical numbers, no hidden state.
  const ConvergenceTable t2 = run_mms_study(mms_temporal(), 3, RefinementMode::Time);
  for (std::size_t l = 0; l < t.levels.size(); ++l) {
    CHECK(t.levels[l].err_w1 == t2.levels[l].err_w1);
    CHECK(t.levels[l].err_w2 == t2.levels[l].err_w2);
    CHECK(t.levels[l].err_w3 == t2.levels[l].err_w3);
    CHECK(t.levels[l].err_w4 == t2.levels[l].err_w4);
  }
}

TEST_CASE("contraction ratios shrink with the slab and dip below one") {
  const RunConfig cfg = default_scenario();
  const auto rows = run_contraction_study(cfg, {8, 4, 2, 1});
  REQUIRE(rows.size() == 4);
  for (const ContractionRow& row : rows) {
    CHECK(row.outer_iterations >= 2);
    CHECK(row.inner_ratio >= 0.0);
    CHECK(row.outer_ratio >= 0.0);
  }
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    CHECK(rows[i + 1].inner_ratio <= rows[i].inner_ratio + 1e-12);
    CHECK(rows[i + 1].outer_ratio <= rows[i].outer_ratio + 1e-12);
  }
  CHECK(rows.back().inner_ratio < 1.0);
  CHECK(rows.back().outer_ratio < 1.0);
  CHECK(rows.back().inner_ratio > 0.0);

  std::ostringstream out;
  write_contraction_table(rows, out);
  CHECK(out.str().rfind(
            "slab_steps,slab_length,inner_ratio,outer_ratio,outer_iterations\n",
            0) == 0);
}

TEST_CASE("a switched-off wall reaction converges in a single inner pass") {
  RunConfig cfg = default_scenario();
  cfg.kinetics.k_R = 0.0;
  const auto rows = run_contraction_study(cfg, {4, 1});
  for (const ContractionRow& row : rows) {
    CHECK(row.inner_ratio == 0.0);
  }
}

TEST_CASE("a fully symmetric dissolved/gaseous pair kills the outer sources") {
  RunConfig cfg = default_scenario();
  cfg.kinetics.k_f1 = 1.0;
  cfg.kinetics.k_f2 = 1.0;
  cfg.kinetics.k_R = 0.0;
  cfg.kinetics.alpha = 0.0;
  cfg.d1 = 0.1;
  cfg.d2 = 0.1;
  cfg.w1_init = DataProfile::bump(0.3, 0.2);
  cfg.w2_init = DataProfile::bump(0.3, 0.2);
  const auto rows = run_contraction_study(cfg, {4});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].outer_iterations == 2);
  CHECK(rows[0].outer_ratio <= 1e-10);
}

TEST_CASE("study input validation") {
  const RunConfig cfg = default_scenario();
  CHECK_THROWS_AS(run_contraction_study(cfg, {}), ValidationError);
  CHECK_THROWS_AS(run_contraction_study(cfg, {4, 0}), ValidationError);
}

TEST_CASE("the shipped benchmark file matches the built-in scenario") {
  const RunConfig from_file =
      parse_config(std::string(TWOSCALE_REPO_DIR) + "/configs/default.cfg");
  CHECK(serialize_config(from_file) == serialize_config(default_scenario()));
}

TEST_CASE("the horizon key accepts its capitalized spelling") {
  const RunConfig cfg = parse_config_text("T_final = 0.1\n");
  CHECK(cfg.t_final == 0.1);
  CHECK_THROWS_AS(parse_config_text("T_final = 0.1\nt_final = 0.1\n"), ConfigError);
}
