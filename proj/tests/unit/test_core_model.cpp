#include <doctest.h>

#include "optomech/core_model.hpp"
#include "optomech/error.hpp"

#include <cmath>
#include <numbers>

using namespace optomech;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("drive amplitude")
{
    SystemParams p;
    p.power = 0.0;
    CHECK(drive_amplitude(p) == 0.0);

    p.power = 1.0;
    const double omega_l = 2 * pi * 299792458.0 / 1e-6;
    const double expected = std::sqrt(2 * 1e9 * 1.0 / (1.054571817e-34 * omega_l));
    CHECK(drive_amplitude(p) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(drive_amplitude(p) == doctest::Approx(1.004e14).epsilon(1e-3));

    p.power = 7.5;
    const double a = drive_amplitude(p);
    CHECK(a * a == doctest::Approx(2 * p.kappa * p.power / (p.hbar * p.omega_l())).epsilon(1e-14));

    p.power = -1.0;
    CHECK_THROWS_AS(drive_amplitude(p), InvalidParameter);
}

TEST_CASE("mode frequency")
{
    SystemParams p;
    CHECK(mode_frequency(p, 0, 0.0) == doctest::Approx(p.omega_l()).epsilon(1e-15));
    CHECK(mode_frequency(p, 3, 3 * p.lambda_l / 2) == doctest::Approx(p.omega_l()).epsilon(1e-15));
    CHECK(mode_frequency(p, 0, p.lambda_l / 4) / p.omega_l() == doctest::Approx(10000.0 / 10000.5).epsilon(1e-14));
    CHECK_THROWS_AS(mode_frequency(p, 0, -p.L0()), GeometryError);
    CHECK_THROWS_AS(mode_frequency(p, -10000, 0.0), GeometryError);
}

TEST_CASE("resonance positions")
{
    SystemParams p;
    CHECK(resonance_position(p, 0) == 0.0);
    CHECK(resonance_position(p, 1) == doctest::Approx(500e-9).epsilon(1e-15));
    CHECK(resonance_position(p, -4) == doctest::Approx(-2000e-9).epsilon(1e-15));
    for (int k = -5; k <= 5; ++k)
        CHECK(mode_frequency(p, k, resonance_position(p, k)) == doctest::Approx(p.omega_l()).epsilon(1e-14));
}

TEST_CASE("coupling strength")
{
    SystemParams p;
    CHECK(coupling_strength(p, 0) == doctest::Approx(p.omega_l() / p.L0()).epsilon(1e-14));
    CHECK(coupling_strength(p, 0) == doctest::Approx(3.767e17).epsilon(1e-3));
    CHECK_THROWS(coupling_strength(p, -10000));

    // -d omega / dx at x_k against a central difference
    for (int k : {-3, 0, 2}) {
        const double xk = resonance_position(p, k);
        const double h = 1e-12;
        const double fd = -(mode_frequency(p, k, xk + h) - mode_frequency(p, k, xk - h)) / (2 * h);
        CHECK(std::abs(fd - coupling_strength(p, k)) / coupling_strength(p, k) < 1e-6);
    }
}

TEST_CASE("active window")
{
    SystemParams p;
    CHECK(active_window(p, -1e-9, 1e-9, 0) == std::vector<int>{0});
    std::vector<int> expected;
    for (int k = -4; k <= 5; ++k) expected.push_back(k);
    CHECK(active_window(p, -1600e-9, 2100e-9, 1) == expected);
}

TEST_CASE("parameter validation")
{
    SystemParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.warnings().empty());
    SystemParams bad = p;
    bad.mass = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    bad = p;
    bad.kappa = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    bad = p;
    bad.n_order = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
}

TEST_CASE("scaled units round trip")
{
    SystemParams p;
    p.power = 11.0;
    const ScaledUnits u(p);
    CHECK(u.time_scale == doctest::Approx(1e-7).epsilon(1e-15));
    CHECK(u.length_scale == doctest::Approx(0.5e-6).epsilon(1e-15));
    CHECK(u.amplitude_scale == doctest::Approx(drive_amplitude(p) / p.omega_m).epsilon(1e-15));
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    for (double v : {1.234e-9, -3.7e-7, 2.2e-3}) {
        CHECK(rel(u.to_si_time(u.to_scaled_time(v)), v) < 1e-14);
        CHECK(rel(u.to_si_length(u.to_scaled_length(v)), v) < 1e-14);
        CHECK(rel(u.to_si_momentum(u.to_scaled_momentum(v)), v) < 1e-14);
        CHECK(rel(u.to_si_energy(u.to_scaled_energy(v)), v) < 1e-14);
        CHECK(rel(u.to_si_amplitude(u.to_scaled_amplitude(v)), v) < 1e-14);
    }
    SystemParams dark = p;
    dark.power = 0.0;
    CHECK(std::isfinite(ScaledUnits(dark).amplitude_scale));
}

TEST_CASE("mechanical energy")
{
    SystemParams p;
    const double x = 0.3e-6, q = 2e-15;
    CHECK(mechanical_energy(p, x, q) ==
          doctest::Approx(q * q / (2 * p.mass) + 0.5 * p.mass * p.omega_m * p.omega_m * x * x).epsilon(1e-14));
    p.duffing_alpha = 1e12;
    CHECK(mechanical_energy(p, x, 0.0) ==
          doctest::Approx(0.5 * p.mass * 1e14 * x * x + 0.25 * p.mass * 1e14 * 1e12 * std::pow(x, 4)).epsilon(1e-14));
}
