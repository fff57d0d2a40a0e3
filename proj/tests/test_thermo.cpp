#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "magbloch/errors.hpp"
#include "magbloch/thermo.hpp"

using namespace magbloch;

namespace {

const FluxRational kThird = FluxRational::make(1, 3);

ThermoParams params(double beta, double mu, double eps = 0.0, double b = 0.0) {
    ThermoParams p;
    p.beta = beta;
    p.mu = mu;
    p.epsilon = eps;
    p.b = b;
    return p;
}

}  // namespace

TEST_CASE("Fermi-Dirac stability and symmetry") {
    CHECK(fermi_dirac(0.3, 7.0, 0.3) == 0.5);
    const double tail = fermi_dirac(700.0, 1.0, 0.0);
    CHECK(std::isfinite(tail));
    CHECK(tail == doctest::Approx(std::exp(-700.0)).epsilon(1e-12));
    CHECK(fermi_dirac(1e4, 1.0, 0.0) == 0.0);
    CHECK(fermi_dirac(-1e4, 1.0, 0.0) == 1.0);
    for (double E : {-3.0, -0.2, 0.0, 1.7, 40.0}) CHECK(fermi_dirac(E, 2.5, 0.4) + fermi_dirac(0.8 - E, 2.5, 0.4) == doctest::Approx(1.0));
    CHECK(log1p_exp_neg(-800.0) == doctest::Approx(800.0));
    CHECK(log1p_exp_neg(0.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("pressure golden value and refinement") {
    // frozen at N = 64; tests/oracles/band_oracle.py reproduces it at N = 32
    CHECK(pressure(kThird, params(5.0, 0.0)) == doctest::Approx(0.876940454288678).epsilon(1e-12));
    BandTable t64 = band_table(kThird, 64), t128 = band_table(kThird, 128);
    for (double eps : {0.0, 0.05})
        CHECK(std::abs(pressure(t64, params(5.0, 0.0, eps, 1.0)) - pressure(t128, params(5.0, 0.0, eps, 1.0))) <= 1e-9);
    CHECK(pressure(kThird, params(1.0, -60.0)) < 1e-20);
}

TEST_CASE("density: full filling, derivative of the pressure, monotonicity") {
    BandTable t = band_table(kThird, 64);
    for (double eps : {0.0, 0.03, 0.08}) CHECK(std::abs(density(t, params(40.0, 10.0, eps, 1.0)) - 1.0) <= 1e-8);
    double prev_p = -1.0;
    for (double mu = -5.0; mu <= 5.0; mu += 0.5) {
        ThermoParams p = params(3.0, mu, 0.04, 1.0);
        const double n = density(t, p);
        CHECK(n >= 0.0);
        CHECK(n <= 1.0 + 1e-14);
        const double pr = pressure(t, p);
        CHECK(pr > prev_p);
        prev_p = pr;
        ThermoParams up = p, down = p;
        up.mu += 1e-5;
        down.mu -= 1e-5;
        CHECK(std::abs(n - (pressure(t, up) - pressure(t, down)) / 2e-5) <= 1e-7);
    }
}

TEST_CASE("magnetization: formula against the derivative of the pressure") {
    const double formula = magnetization(kThird, params(5.0, 0.0), MagnetizationMethod::formula);
    const double fd = magnetization(kThird, params(5.0, 0.0), MagnetizationMethod::finite_difference);
    CHECK(std::abs(formula - fd) <= 1e-6);
    CHECK(formula == doctest::Approx(0.0666563239).epsilon(1e-9));
    BandTable t = band_table(kThird, 64);
    for (double mu : {-2.0, 0.7, 2.2})
        CHECK(std::abs(magnetization(t, params(2.0, mu), MagnetizationMethod::formula) -
                       magnetization(t, params(2.0, mu), MagnetizationMethod::finite_difference)) <= 1e-6);
    CHECK(std::abs(magnetization(t, params(200.0, -10.0), MagnetizationMethod::formula)) < 1e-300);
    BandTable one = band_table(FluxRational::make(0, 1), 16);
    CHECK(magnetization(one, params(3.0, 0.5), MagnetizationMethod::formula) == 0.0);
    CHECK(parse_magnetization_method("fd") == MagnetizationMethod::finite_difference);
}

TEST_CASE("Streda relation in the first gap") {
    BandTable t = band_table(kThird, 64);
    const double top0 = *std::max_element(t.bands[0].energy.begin(), t.bands[0].energy.end());
    const double bottom1 = *std::min_element(t.bands[1].energy.begin(), t.bands[1].energy.end());
    const double mu = 0.5 * (top0 + bottom1);
    const int c1 = 1;
    for (double eps : {0.0, 0.01, 0.02, 0.04}) {
        const double n = density_zero_temperature(t, mu, eps, 1.0);
        CHECK(std::abs(n - (1.0 / 3.0 + eps * c1 / (2 * M_PI))) <= 1e-6);
    }
    CHECK(pressure_zero_temperature(t, -10.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("Hall current") {
    HallResult h = hall_current(kThird, 1, Vec2(1, 0));
    REQUIRE(h.chern.size() == 1);
    CHECK(h.chern[0] == 1);
    CHECK(std::abs(h.current[0]) < 1e-15);
    CHECK(h.current[1] == doctest::Approx(1.0 / (2 * M_PI)));
    CHECK(h.min_gap > 1.0);
    CHECK(hall_current(kThird, 3, Vec2(0.4, -1.0)).current.norm() == 0.0);
    CHECK(hall_current(kThird, 1, Vec2(0, 0)).current.norm() == 0.0);

    Vec2 e1(0.3, -0.5), e2(-1.2, 0.7);
    Vec2 sum = hall_current(kThird, 2, e1 + 2.0 * e2).current;
    CHECK((sum - hall_current(kThird, 2, e1).current - 2.0 * hall_current(kThird, 2, e2).current).norm() < 1e-15);
    Vec2 two = hall_current(kThird, 2, e1).current;
    Vec2 one = hall_current(kThird, 1, e1).current;
    const double c2 = -2.0;
    CHECK((two - (one - c2 / (2 * M_PI) * Vec2(e1[1], -e1[0]))).norm() < 1e-15);

    CHECK_THROWS_AS(hall_current(FluxRational::make(1, 2), 1, Vec2(1, 0)), GapError);
    CHECK_THROWS_AS(hall_current(kThird, 4, Vec2(1, 0)), ConfigError);
}

TEST_CASE("thermo guards") {
    CHECK_THROWS_AS(pressure(FluxRational::make(1, 2), params(1.0, 0.0)), GapError);
    CHECK_THROWS_AS(pressure(kThird, params(0.0, 0.0)), ConfigError);
    ThermoParams bad = params(1.0, 0.0);
    bad.grid = 2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
