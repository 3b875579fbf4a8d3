#include <doctest.h>

#include "optomech/error.hpp"
#include "optomech/io.hpp"
#include "optomech/sweep.hpp"

#include <sstream>

using namespace optomech;

TEST_CASE("grids")
{
    const auto g = SweepPlan::grid(1.0, 2.0, 0.25);
    REQUIRE(g.size() == 5);
    CHECK(g.back() == doctest::Approx(2.0));
    CHECK(SweepPlan::grid(3.0, 3.0, 1.0).size() == 1);
    CHECK_THROWS_AS(SweepPlan::grid(1.0, 2.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(SweepPlan::grid(2.0, 1.0, 0.1), InvalidParameter);

    const auto d = duffing_grid(0.5e-6, -0.3, 0.0, 4);
    REQUIRE(d.size() == 4);
    CHECK(d.front() * 0.25e-12 == doctest::Approx(-0.3));
    CHECK(d.back() == 0.0);
    CHECK_THROWS_AS(duffing_grid(0.0, 0.0, 1.0, 3), InvalidParameter);
}

TEST_CASE("plan validation")
{
    SweepPlan plan;
    CHECK_THROWS_AS(plan.validate(), InvalidParameter);
    plan.values = {1.0, 1.0};
    CHECK_THROWS_AS(plan.validate(), InvalidParameter);
    plan.values = {1.0};
    CHECK_NOTHROW(plan.validate());
    plan.mode = SweepMode::ContinueUp;
    CHECK_THROWS_AS(plan.validate(), InvalidParameter);
    plan.values = {1.0, 2.0};
    CHECK_NOTHROW(plan.validate());
    plan.variable = SweepVariable::DuffingAlpha;
    CHECK_THROWS_AS(plan.validate(), InvalidParameter);
    CHECK(std::string(to_string(SweepMode::ContinueDown)) == "continue-down");
    CHECK(std::string(to_string(SweepVariable::Power)) == "power");
}

TEST_CASE("small power sweep is deterministic across worker counts")
{
    SystemParams p;
    SweepPlan plan;
    plan.values = {0.0, 1.0};
    plan.seeds.n_seeds = 2;
    plan.seeds.a_hi = 0.5e-6;
    plan.seeds.transient_periods = 100;
    plan.seeds.max_extensions = 1;
    const IntegratorConfig cfg = IntegratorConfig::defaults(p);

    plan.seeds.workers = 1;
    const SweepResult serial = power_sweep(plan, p, cfg);
    plan.seeds.workers = 2;
    const SweepResult threaded = power_sweep(plan, p, cfg);

    std::ostringstream a, b;
    csv::write_attractor(a, serial);
    csv::write_attractor(b, threaded);
    CHECK(a.str() == b.str());

    REQUIRE(serial.points.size() == 2);
    const auto rows = attractor_rows(serial);
    REQUIRE_FALSE(rows.empty());
    CHECK(rows.front().value == 0.0);
    CHECK(rows.front().status == "rest");
    CHECK_THROWS_AS(duffing_sweep(plan, p, cfg), InvalidParameter);
}
