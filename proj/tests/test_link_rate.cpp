#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "support.hpp"
#include "uavrelay/link_rate.hpp"

using namespace uavrelay;
using namespace uavrelay::link;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

const double kSigma2 = dbm_to_watts(-96.0);
const double kIci = dbm_to_watts(-110.0);

Big log2b(const Big& x) { return log(x) / log(Big(2)); }

Big cellular_oracle(double p, double h, double s2, double ici) {
    const Big rx = Big(p) * Big(h);
    return (log2b(1 + rx / Big(s2)) + log2b(1 + rx / (Big(s2) + Big(ici)))) / 2;
}

// Amplify-and-forward chain written out from the relay gain.
Big relay_sinr_oracle(double p_ue, double p_uav, double h1, double h2, double s2, double ici) {
    const Big rx_uav = Big(p_ue) * Big(h1);
    const Big g2 = Big(p_uav) / (rx_uav + Big(s2));
    const Big signal = g2 * Big(h2) * rx_uav;
    const Big noise = g2 * Big(h2) * Big(s2) + Big(s2) + Big(ici);
    return signal / noise;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("cellular rate") {
    CHECK(rate_cellular(0.0, 1e-8, kSigma2, kIci) == 0.0);
    CHECK(rate_cellular(0.02, 1e-9, kSigma2, 0.0) == doctest::Approx(std::log2(1.0 + 0.02e-9 / kSigma2)).epsilon(1e-14));
    const double r = rate_cellular(0.05, 1e-8, kSigma2, kIci);
    CHECK(rel(r, cellular_oracle(0.05, 1e-8, kSigma2, kIci).convert_to<double>()) < 1e-13);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-12.0, -6.0);
    for (int i = 0; i < 200; ++i) {
        const double p = std::pow(10.0, u(rng) + 5.0), h = std::pow(10.0, u(rng));
        CHECK(rel(rate_cellular(p, h, kSigma2, kIci), cellular_oracle(p, h, kSigma2, kIci).convert_to<double>()) <
              1e-12);
    }
}

TEST_CASE("relay SINRs") {
    SUBCASE("reference point against the AF oracle") {
        const auto s = relay_sinrs(0.05, 0.03, 1e-7, 1e-8, kSigma2, kIci);
        CHECK(rel(s.ue_uav, (Big(0.05) * Big(1e-7) / Big(kSigma2)).convert_to<double>()) < 1e-14);
        CHECK(rel(s.uav_bs, relay_sinr_oracle(0.05, 0.03, 1e-7, 1e-8, kSigma2, kIci).convert_to<double>()) < 1e-13);
    }
    SUBCASE("random points against the AF oracle") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 300; ++i) {
            const double p1 = 1e-4 + 0.1 * u(rng), p2 = 1e-4 + 0.3 * u(rng);
            const double h1 = std::pow(10.0, -10 + 4 * u(rng)), h2 = std::pow(10.0, -10 + 4 * u(rng));
            const double ici = u(rng) < 0.5 ? 0.0 : kIci;
            const auto s = relay_sinrs(p1, p2, h1, h2, kSigma2, ici);
            CHECK(rel(s.uav_bs, relay_sinr_oracle(p1, p2, h1, h2, kSigma2, ici).convert_to<double>()) < 1e-12);
            CHECK(s.uav_bs < s.ue_uav);
            // The end-to-end rate never exceeds either hop.
            CHECK(rate_relay(s) <= 0.5 * std::log2(1.0 + s.ue_uav));
            CHECK(rate_relay(s) == doctest::Approx(0.5 * std::min(std::log2(1 + s.ue_uav), std::log2(1 + s.uav_bs))));
        }
    }
    SUBCASE("large relay power without ICI approaches the first hop") {
        const auto s = relay_sinrs(0.01, 1e9, 1e-9, 1e-8, kSigma2, 0.0);
        CHECK(rel(s.uav_bs, s.ue_uav) < 1e-6);
    }
}

TEST_CASE("relay rate") {
    CHECK(rate_relay({5.0, 0.0}) == 0.0);
    CHECK(rate_relay({5.0, 3.0}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rates are nondecreasing in own power") {
    double prev_c = -1.0, prev_r = -1.0, prev_r2 = -1.0;
    for (double p = 0.0; p <= 0.1; p += 0.002) {
        const double c = rate_cellular(p, 1e-9, kSigma2, kIci);
        const double r = rate_relay(relay_sinrs(p, 0.1, 1e-9, 1e-9, kSigma2, kIci));
        const double r2 = rate_relay(relay_sinrs(0.05, p, 1e-9, 1e-9, kSigma2, kIci));
        CHECK(c >= prev_c);
        CHECK(r >= prev_r);
        CHECK(r2 >= prev_r2);
        prev_c = c, prev_r = r, prev_r2 = r2;
    }
}

TEST_CASE("QoS checks") {
    CHECK(qos_cellular(false, 0.0, 1e-12, kSigma2, kIci, 300.0));
    CHECK(qos_relay(false, 0.0, 0.0, 1e-12, 1e-12, kSigma2, kIci, 300.0, 300.0));
    // Boundary is inclusive.
    const double h = 1e-9;
    CHECK(qos_cellular(true, 300.0 * kSigma2 / h, h, kSigma2, 0.0, 300.0));
    CHECK_FALSE(qos_cellular(true, 0.99 * 300.0 * kSigma2 / h, h, kSigma2, 0.0, 300.0));
    // Second phase sees the ICI.
    CHECK_FALSE(qos_cellular(true, 300.0 * kSigma2 / h, h, kSigma2, kIci, 300.0));
    CHECK(qos_cellular(true, 300.0 * (kSigma2 + kIci) / h, h, kSigma2, kIci, 300.0));
    // Relay with the second hop short of its threshold.
    const double p1 = 400.0 * kSigma2 / h;
    const double p2_ok = 300.0 * (kSigma2 + kIci) / h;
    CHECK(qos_relay(true, p1, p2_ok, h, h, kSigma2, kIci, 300.0, 300.0));
    CHECK_FALSE(qos_relay(true, p1, 0.9 * p2_ok, h, h, kSigma2, kIci, 300.0, 300.0));
    CHECK_FALSE(qos_relay(true, 0.9 * 300.0 * kSigma2 / h, p2_ok, h, h, kSigma2, kIci, 300.0, 300.0));
}

TEST_CASE("per-UE rate") {
    const auto in = testing::instance(testing::faded_scenario(2, 2, 4));
    PowerAllocation p(2, 4);
    for (std::size_t k = 0; k < 4; ++k) {
        p.p_ue(0, k) = 0.01 * (k + 1);
        p.p_uav[k] = 0.02;
    }
    const std::vector<int> none(4, 0);
    CHECK(ue_rate(0, Mode::cellular, none, p, in.gains, kSigma2, kIci) == 0.0);
    const std::vector<int> one{0, 0, 1, 0};
    CHECK(ue_rate(0, Mode::cellular, one, p, in.gains, kSigma2, kIci) ==
          doctest::Approx(rate_cellular(0.03, in.gains.h_ue_bs(0, 2), kSigma2, kIci)).epsilon(1e-15));
    const std::vector<int> three{1, 0, 1, 1};
    double expect = 0.0;
    for (std::size_t k : {0u, 2u, 3u})
        expect += rate_relay(
            relay_sinrs(p.p_ue(0, k), p.p_uav[k], in.gains.h_ue_uav(0, k), in.gains.h_uav_bs[k], kSigma2, kIci));
    CHECK(ue_rate(0, Mode::relay, three, p, in.gains, kSigma2, kIci) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("proportional-fairness weights") {
    const std::vector<double> avg{0.0, 0.9, 3.0, 10.0};
    const auto w = update_weights(avg);
    CHECK(w[0] == doctest::Approx(10.0));
    CHECK(w[1] == doctest::Approx(1.0));
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] < w[i - 1]);
}

TEST_CASE("Jain index") {
    const std::vector<double> eq{2, 2, 2, 2, 2};
    CHECK(jain_index(eq) == doctest::Approx(1.0));
    const std::vector<double> one{0, 0, 3, 0, 0};
    CHECK(jain_index(one) == doctest::Approx(0.2));
    const std::vector<double> ramp{1, 2, 3, 4, 5};
    CHECK(jain_index(ramp) == doctest::Approx(225.0 / 275.0).epsilon(1e-14));
    const std::vector<double> scaled{7, 14, 21, 28, 35};
    CHECK(jain_index(scaled) == doctest::Approx(jain_index(ramp)).epsilon(1e-14));
    const std::vector<double> zero{0, 0, 0};
    CHECK_THROWS_AS(jain_index(zero), DomainError);
}
