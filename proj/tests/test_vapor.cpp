#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sfwm/vapor.hpp"

using Catch::Approx;

TEST_CASE("vapor density matches the published correlation", "[vapor]") {
    // Oracle: log10 P[torr] = 15.88253 - 4529.635/T + 5.8663e-4 T - 2.99138 log10 T,
    // evaluated independently at 315.15 K -> 5.090317e16 m^-3.
    CHECK(sfwm::vapor_density(315.15) == Approx(5.090317e16).epsilon(1e-5));
    CHECK(sfwm::vapor_density(315.15) > 4.5e16);
    CHECK(sfwm::vapor_density(315.15) < 5.5e16);
}

TEST_CASE("vapor density is strictly increasing in temperature", "[vapor]") {
    CHECK(sfwm::vapor_density(332.15) > sfwm::vapor_density(315.15));
    double prev = 0.0;
    for (double t = 250.0; t <= 500.0; t += 2.5) {
        const double n = sfwm::vapor_density(t);
        CHECK(n > prev);
        prev = n;
    }
}

TEST_CASE("vapor density rejects temperatures outside the correlation range", "[vapor]") {
    CHECK_THROWS_AS(sfwm::vapor_density(240.0), sfwm::validation_error);
    CHECK_THROWS_AS(sfwm::vapor_density(510.0), sfwm::validation_error);
    CHECK_NOTHROW(sfwm::vapor_density(250.0));
    CHECK_NOTHROW(sfwm::vapor_density(500.0));
}

TEST_CASE("doppler width of the D1 line at 42 C", "[vapor]") {
    // sigma = nu0 sqrt(kB T / (m c^2)) evaluated independently: 2.184294e8 Hz
    const double sigma = sfwm::doppler_sigma(315.15, 377.107e12, 1.443e-25);
    CHECK(sigma == Approx(2.184294e8).epsilon(1e-6));
}

TEST_CASE("doppler width scales as sqrt(T)", "[vapor]") {
    const double nu = 377.107e12, m = 1.443e-25;
    const double s1 = sfwm::doppler_sigma(300.0, nu, m);
    const double s4 = sfwm::doppler_sigma(1200.0, nu, m);
    CHECK(s4 / s1 == Approx(2.0).epsilon(1e-12));
    // T -> 0 limit
    CHECK(sfwm::doppler_sigma(1e-9, nu, m) < 1e-5 * s1);
    CHECK_THROWS_AS(sfwm::doppler_sigma(-1.0, nu, m), sfwm::validation_error);
    CHECK_THROWS_AS(sfwm::doppler_sigma(300.0, 0.0, m), sfwm::validation_error);
    CHECK_THROWS_AS(sfwm::doppler_sigma(300.0, nu, 0.0), sfwm::validation_error);
}

TEST_CASE("scaled optical depth is linear in path", "[vapor]") {
    const sfwm::VaporState v = sfwm::make_vapor_state(315.15, 3.4, 0.075);
    CHECK(sfwm::scaled_od(v, 0.075) == Approx(3.4));
    CHECK(sfwm::scaled_od(v, 0.0) == 0.0);
    CHECK(sfwm::scaled_od(v, 0.0375) == Approx(1.7));
    CHECK_THROWS_AS(sfwm::scaled_od(v, -0.01), sfwm::validation_error);

    std::mt19937 rng(42);
    std::uniform_real_distribution<double> path(0.0, 0.2);
    for (int i = 0; i < 200; ++i) {
        const double x = path(rng), y = path(rng);
        const double lhs = sfwm::scaled_od(v, x + y);
        const double rhs = sfwm::scaled_od(v, x) + sfwm::scaled_od(v, y);
        CHECK(lhs == Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("resonant transmission through OD 3.4", "[vapor]") {
    CHECK(sfwm::line_transmission(3.4, 0.0, 2.18e8) == Approx(3.337327e-2).epsilon(1e-6));
    CHECK(sfwm::line_transmission(0.0, 1.0e9, 2.18e8) == 1.0);
    // far off resonance everything passes
    CHECK(sfwm::line_transmission(50.0, 1e12, 2.18e8) == Approx(1.0).margin(1e-9));
}

TEST_CASE("line transmission monotone in |detuning| and in od", "[vapor]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> od_dist(0.0, 10.0);
    std::uniform_real_distribution<double> det_dist(0.0, 3e9);
    const double sigma = 2.18e8;
    for (int i = 0; i < 300; ++i) {
        const double od = od_dist(rng);
        const double d1 = det_dist(rng), d2 = det_dist(rng);
        const double lo = std::min(d1, d2), hi = std::max(d1, d2);
        CHECK(sfwm::line_transmission(od, hi, sigma) >=
              sfwm::line_transmission(od, lo, sigma));
        CHECK(sfwm::line_transmission(od, -hi, sigma) ==
              Approx(sfwm::line_transmission(od, hi, sigma)));
        const double od2 = od + 1.0;
        CHECK(sfwm::line_transmission(od2, d1, sigma) <=
              sfwm::line_transmission(od, d1, sigma));
        const double t = sfwm::line_transmission(od, d1, sigma);
        CHECK(t > 0.0);
        CHECK(t <= 1.0);
    }
}

TEST_CASE("vapor state invariants", "[vapor]") {
    const sfwm::VaporState v = sfwm::make_vapor_state(315.15);
    CHECK(v.density > 0.0);
    CHECK(v.od_resonant >= 0.0);
    CHECK(v.doppler_sigma > 0.0);
    CHECK(v.reference_path == Approx(0.075));
    CHECK_THROWS_AS(sfwm::make_vapor_state(315.15, -1.0), sfwm::validation_error);
    CHECK_THROWS_AS(sfwm::make_vapor_state(315.15, 3.4, 0.0), sfwm::validation_error);
}
