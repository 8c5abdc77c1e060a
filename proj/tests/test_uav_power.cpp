#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "uavrelay/scenario.hpp"
#include "uavrelay/uav_power.hpp"

using namespace uavrelay;
using namespace uavrelay::propulsion;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

struct BigDerived {
    Big p0, pi;
};

BigDerived big_derive(const PropulsionParams& p) {
    const Big p0 = Big(p.delta) / 8 * Big(p.rho) * Big(p.s) * Big(p.disc_area) * pow(Big(p.omega), 3) *
                   pow(Big(p.rotor_radius), 3);
    const Big pi = (1 + Big(p.k_factor)) * pow(Big(p.weight), Big(1.5)) / sqrt(2 * Big(p.rho) * Big(p.disc_area));
    return {p0, pi};
}

Big big_flying(double v_, const PropulsionParams& p) {
    const auto d = big_derive(p);
    const Big v = v_, v0 = p.v0, u = p.u_tip;
    const Big blade = d.p0 * (1 + 3 * v * v / (u * u));
    const Big induced = d.pi * sqrt(sqrt(1 + pow(v, 4) / (4 * pow(v0, 4))) - v * v / (2 * v0 * v0));
    const Big para = Big(0.5) * Big(p.d0) * Big(p.rho) * Big(p.s) * Big(p.disc_area) * pow(v, 3);
    return blade + induced + para;
}

Big big_upper(const Big& v, const PropulsionParams& p) {
    const auto d = big_derive(p);
    return d.p0 * (1 + 3 * v * v / (Big(p.u_tip) * Big(p.u_tip))) + d.pi +
           Big(0.5) * Big(p.d0) * Big(p.rho) * Big(p.s) * Big(p.disc_area) * pow(v, 3);
}

} // namespace

TEST_CASE("hover powers from the table constants") {
    const PropulsionParams p;
    const auto d = derive(p);
    const auto b = big_derive(p);
    CHECK(std::abs(d.p0 / b.p0.convert_to<double>() - 1.0) < 1e-12);
    CHECK(std::abs(d.pi / b.pi.convert_to<double>() - 1.0) < 1e-12);
    CHECK(d.p0 == doctest::Approx(79.9).epsilon(1e-3));
    CHECK(d.pi == doctest::Approx(88.6).epsilon(1e-3));
    CHECK(flying_power(0.0, p) == doctest::Approx(d.p0 + d.pi).epsilon(1e-15));
    CHECK(flying_power(0.0, p) == doctest::Approx(168.5).epsilon(1e-3));
}

TEST_CASE("flying power matches the high-precision oracle") {
    const PropulsionParams p;
    for (double v = 0.0; v <= 60.0; v += 0.5) {
        const double oracle = big_flying(v, p).convert_to<double>();
        CHECK(std::abs(flying_power(v, p) / oracle - 1.0) < 1e-12);
    }
    CHECK(std::abs(flying_power(10.0, p) / big_flying(10.0, p).convert_to<double>() - 1.0) < 1e-13);
    CHECK_THROWS_AS(flying_power(-1.0, p), DomainError);
}

TEST_CASE("upper bound dominates, is tight at hover, and is convex") {
    const PropulsionParams p;
    CHECK(flying_power_upper(0.0, p) == doctest::Approx(flying_power(0.0, p)).epsilon(1e-15));
    double prev = 0.0;
    const double h = 0.25;
    for (double v = 0.0; v <= 60.0; v += h) {
        CHECK(flying_power_upper(v, p) >= flying_power(v, p));
        CHECK(flying_power_upper(v, p) >= prev);
        prev = flying_power_upper(v, p);
        if (v >= h) {
            const double second = flying_power_upper(v + h, p) - 2 * flying_power_upper(v, p) + flying_power_upper(v - h, p);
            CHECK(second >= -1e-9);
        }
    }
    CHECK_THROWS_AS(flying_power_upper(-0.1, p), DomainError);
}

TEST_CASE("energy-limited speed") {
    const PropulsionParams p;
    const double hover = flying_power(0.0, p);
    CHECK(max_speed_under_energy(hover, 1.0, p) == doctest::Approx(0.0).epsilon(1e-6));
    const double v = max_speed_under_energy(500.0, 1.0, p);
    const double e = flying_power_upper(v, p);
    CHECK(e <= 500.0);
    CHECK(e >= 500.0 - 1e-3);
    // Independent bisection in high precision.
    Big lo = 0, hi = 100;
    for (int i = 0; i < 200; ++i) {
        const Big mid = (lo + hi) / 2;
        (big_upper(mid, p) <= 500 ? lo : hi) = mid;
    }
    CHECK(std::abs(v - lo.convert_to<double>()) < 1e-6);
    double prev = 0.0;
    for (double em = hover; em < 5000.0; em *= 1.3) {
        const double vv = max_speed_under_energy(em, 1.0, p);
        CHECK(vv >= prev);
        prev = vv;
    }
    CHECK(max_speed_under_energy(1000.0, 2.0, p) == doctest::Approx(v).epsilon(1e-7));
    CHECK_THROWS_AS(max_speed_under_energy(hover - 1.0, 1.0, p), DomainError);
}

TEST_CASE("effective move radius") {
    auto s = load_scenario("{}");
    CHECK(effective_move_radius(s) == 15.0);
    s.d_max = 100.0;
    CHECK(effective_move_radius(s) == doctest::Approx(max_speed_under_energy(500.0, 1.0, s.propulsion)));
    s.e_max = flying_power(0.0, s.propulsion);
    CHECK(effective_move_radius(s) == doctest::Approx(0.0).epsilon(1e-6));
}
