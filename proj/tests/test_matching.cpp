#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "uavrelay/matching.hpp"

using namespace uavrelay;
using namespace uavrelay::matching;

namespace {

channel::ChannelGains synthetic(std::size_t n, std::size_t k, double direct, double up, double down) {
    return {Grid<double>(n, k, direct), Grid<double>(n, k, up), std::vector<double>(k, down)};
}

// Gain giving SNR `snr` at power p over the noise-plus-ICI floor.
double gain_for(const Scenario& s, double snr, double p) { return snr * (s.noise_var + s.ici_power) / p; }

std::vector<std::size_t> all(std::size_t k) {
    std::vector<std::size_t> v(k);
    for (std::size_t i = 0; i < k; ++i) v[i] = i;
    return v;
}

} // namespace

TEST_CASE("matching bookkeeping") {
    Matching m(4);
    m.set(0, McPair{1, Mode::cellular});
    m.set(2, McPair{1, Mode::cellular});
    m.set(3, McPair{0, Mode::relay});
    CHECK(m.count_ue(1) == 2);
    CHECK(m.count_relay() == 1);
    CHECK(m.mode_consistent());
    CHECK(m.subchannels_of({1, Mode::cellular}) == std::vector<std::size_t>{0, 2});
    const auto modes = m.modes(3);
    CHECK(modes[0] == Mode::relay);
    CHECK(modes[1] == Mode::cellular);
    CHECK_FALSE(modes[2].has_value());
    const auto a = m.allocation(3);
    CHECK(a(1, 0) == 1);
    CHECK(a(1, 1) == 0);
    CHECK(a(0, 3) == 1);
    const auto sw = m.swapped(1, 3);
    CHECK_FALSE(sw.at(3).has_value());
    CHECK(sw.at(1) == McPair{0, Mode::relay});
    m.set(1, McPair{1, Mode::relay});
    CHECK_FALSE(m.mode_consistent());
    CHECK(Matching(3).empty());
}

TEST_CASE("equal split of the budgets") {
    const auto s = load_scenario("{}");
    Matching m(10);
    m.set(0, McPair{0, Mode::cellular});
    m.set(4, McPair{0, Mode::cellular});
    m.set(5, McPair{2, Mode::relay});
    m.set(6, McPair{3, Mode::relay});
    const auto p = equal_split(s, m);
    CHECK(p.p_ue(0, 0) == doctest::Approx(s.p_ue_max / 2));
    CHECK(p.p_ue(0, 4) == doctest::Approx(s.p_ue_max / 2));
    CHECK(p.p_ue(2, 5) == doctest::Approx(s.p_ue_max));
    CHECK(p.p_uav[5] == doctest::Approx(s.p_uav_max / 2));
    CHECK(p.p_uav[0] == 0.0);
    CHECK(p.p_ue(1, 1) == 0.0);
}

TEST_CASE("utilities") {
    const auto in = testing::instance(testing::faded_scenario(4, 3, 5));
    std::vector<double> w{0.0, 2.0, 0.7};
    const Context ctx{in.s, in.gains, w};
    Matching m(5);
    for (std::size_t k = 0; k < 5; ++k) m.set(k, McPair{k % 3, k % 2 ? Mode::relay : Mode::cellular});
    const auto p = equal_split(in.s, m);
    CHECK(subchannel_utility(0, {0, Mode::cellular}, ctx, p) == 0.0);
    const double rd = link::rate_cellular(p.p_ue(1, 1), in.gains.h_ue_bs(1, 1), in.s.noise_var, in.s.ici_power);
    CHECK(subchannel_utility(1, {1, Mode::cellular}, ctx, p) == doctest::Approx(2.0 * rd).epsilon(1e-15));
    const double rr = link::rate_relay(link::relay_sinrs(p.p_ue(2, 3), p.p_uav[3], in.gains.h_ue_uav(2, 3),
                                                         in.gains.h_uav_bs[3], in.s.noise_var, in.s.ici_power));
    CHECK(subchannel_utility(3, {2, Mode::relay}, ctx, p) == doctest::Approx(0.7 * rr).epsilon(1e-15));

    const McPair pair{2, Mode::relay};
    CHECK(mc_pair_utility(pair, {}, ctx, p) == 0.0);
    const std::vector<std::size_t> single{3};
    CHECK(mc_pair_utility(pair, single, ctx, p) == subchannel_utility(3, pair, ctx, p));
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        auto ks = all(5);
        std::shuffle(ks.begin(), ks.end(), rng);
        const std::size_t cut = rng() % 6;
        const std::vector<std::size_t> a(ks.begin(), ks.begin() + cut), b(ks.begin() + cut, ks.end());
        CHECK(mc_pair_utility(pair, ks, ctx, p) ==
              doctest::Approx(mc_pair_utility(pair, a, ctx, p) + mc_pair_utility(pair, b, ctx, p)).epsilon(1e-14));
    }
}

TEST_CASE("initial matching") {
    SUBCASE("nothing feasible gives the all-vacant matching") {
        auto s = testing::table_scenario(1, "\"snr_threshold\": 1e15");
        const auto in = testing::instance(s);
        const std::vector<double> w(5, 10.0);
        const Context ctx{in.s, in.gains, w};
        CHECK(init_matching(ctx).empty());
        CHECK(msma(init_matching(ctx), ctx).matching.empty());
    }
    SUBCASE("relay preferred when both modes are feasible and relay is faster") {
        auto s = testing::table_scenario(1, "\"n_ues\": 1, \"n_subchannels\": 1");
        const auto g = synthetic(1, 1, gain_for(s, 400, s.p_ue_max), gain_for(s, 1e8, s.p_ue_max),
                                 gain_for(s, 1e8, s.p_uav_max));
        const std::vector<double> w{1.0};
        const Context ctx{s, g, w};
        const auto m = init_matching(ctx);
        REQUIRE(m.at(0).has_value());
        CHECK(m.at(0)->mode == Mode::relay);
        // Flip the comparison.
        const auto g2 = synthetic(1, 1, gain_for(s, 1e6, s.p_ue_max), gain_for(s, 1e4, s.p_ue_max),
                                  gain_for(s, 1e4, s.p_uav_max));
        const Context ctx2{s, g2, w};
        CHECK(init_matching(ctx2).at(0)->mode == Mode::cellular);
        // Relay disallowed.
        const Context ctx3{s, g, w, false};
        CHECK(init_matching(ctx3).at(0)->mode == Mode::cellular);
    }
    SUBCASE("random small instances give feasible mode-consistent matchings") {
        for (std::uint64_t seed = 1; seed <= 50; ++seed) {
            const auto in = testing::instance(testing::faded_scenario(seed, 2, 2));
            const std::vector<double> w{1.0, 3.0};
            const Context ctx{in.s, in.gains, w};
            const auto m = init_matching(ctx);
            CHECK(is_feasible(m, ctx));
            CHECK(m.mode_consistent());
        }
    }
}

TEST_CASE("swap-blocking pairs") {
    auto s = testing::table_scenario(1, "\"n_ues\": 2, \"n_subchannels\": 2");
    const std::vector<double> w{1.0, 1.0};
    SUBCASE("same pair on both subchannels never blocks") {
        const auto in = testing::instance(testing::faded_scenario(3, 2, 2));
        const Context ctx{in.s, in.gains, w};
        Matching m(2);
        m.set(0, McPair{0, Mode::cellular});
        m.set(1, McPair{0, Mode::cellular});
        CHECK_FALSE(swap_blocking(m, 0, 1, ctx).blocking);
        CHECK_FALSE(swap_blocking(m, 0, 0, ctx).blocking);
    }
    SUBCASE("crossing assignment that helps both pairs blocks") {
        auto g = synthetic(2, 2, 0, gain_for(s, 1e3, s.p_ue_max), gain_for(s, 1e3, s.p_uav_max));
        g.h_ue_bs(0, 0) = gain_for(s, 500, s.p_ue_max);
        g.h_ue_bs(0, 1) = gain_for(s, 5000, s.p_ue_max);
        g.h_ue_bs(1, 0) = gain_for(s, 8000, s.p_ue_max);
        g.h_ue_bs(1, 1) = gain_for(s, 600, s.p_ue_max);
        const Context ctx{s, g, w};
        Matching m(2);
        m.set(0, McPair{0, Mode::cellular});
        m.set(1, McPair{1, Mode::cellular});
        const auto out = swap_blocking(m, 0, 1, ctx);
        CHECK(out.blocking);
        CHECK(out.swapped.at(0) == McPair{1, Mode::cellular});
        CHECK(out.swapped.at(1) == McPair{0, Mode::cellular});
        CHECK(system_utility(out.swapped, ctx) > system_utility(m, ctx));
        // The stable result is the crossed one.
        const auto r = msma(m, ctx);
        CHECK(r.matching == out.swapped);
        CHECK(r.stats.swaps == 1);
    }
    SUBCASE("a swap that would break QoS does not block") {
        auto g = synthetic(2, 2, 0, gain_for(s, 1e3, s.p_ue_max), gain_for(s, 1e3, s.p_uav_max));
        g.h_ue_bs(0, 0) = gain_for(s, 500, s.p_ue_max);
        g.h_ue_bs(0, 1) = gain_for(s, 5000, s.p_ue_max);
        g.h_ue_bs(1, 0) = gain_for(s, 100, s.p_ue_max);  // below threshold
        g.h_ue_bs(1, 1) = gain_for(s, 600, s.p_ue_max);
        const Context ctx{s, g, w};
        Matching m(2);
        m.set(0, McPair{0, Mode::cellular});
        m.set(1, McPair{1, Mode::cellular});
        CHECK_FALSE(swap_blocking(m, 0, 1, ctx).blocking);
    }
    SUBCASE("moving into a vacant subchannel") {
        auto g = synthetic(2, 2, 0, 1e-20, 1e-20);
        g.h_ue_bs(0, 0) = gain_for(s, 500, s.p_ue_max);
        g.h_ue_bs(0, 1) = gain_for(s, 5000, s.p_ue_max);
        const Context ctx{s, g, w};
        Matching m(2);
        m.set(0, McPair{0, Mode::cellular});
        const auto out = swap_blocking(m, 0, 1, ctx);
        CHECK(out.blocking);
        CHECK_FALSE(out.swapped.at(0).has_value());
        CHECK(out.swapped.at(1) == McPair{0, Mode::cellular});
    }
}

TEST_CASE("MSMA output is pairwise stable and utility rises with every swap") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto in = testing::instance(testing::faded_scenario(seed, 5, 10));
        std::vector<double> w(5);
        std::mt19937_64 rng(seed);
        for (auto& x : w) x = 0.1 + std::uniform_real_distribution<double>(0, 10)(rng);
        const Context ctx{in.s, in.gains, w};
        const auto init = init_matching(ctx);
        const auto r = msma(init, ctx);
        CHECK(is_pairwise_stable(r.matching, ctx));
        CHECK(is_feasible(r.matching, ctx));
        CHECK(r.stats.utility_trace.size() == r.stats.swaps + 1);
        for (std::size_t i = 1; i < r.stats.utility_trace.size(); ++i)
            CHECK(r.stats.utility_trace[i] > r.stats.utility_trace[i - 1]);
        for (auto e : r.stats.examined_per_round) CHECK(e <= 10 * 10 * 5);
        // Stable input is returned untouched.
        const auto again = msma(r.matching, ctx);
        CHECK(again.matching == r.matching);
        CHECK(again.stats.swaps == 0);
    }
}

TEST_CASE("MSMA lands in the brute-force stable set on tiny instances") {
    std::size_t nonempty = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto in = testing::instance(testing::faded_scenario(seed, 2, 2));
        const std::vector<double> w{1.0, 2.0};
        const Context ctx{in.s, in.gains, w};
        const auto stable = brute_force_stable(ctx);
        const auto out = msma(init_matching(ctx), ctx).matching;
        CHECK(std::find(stable.begin(), stable.end(), out) != stable.end());
        nonempty += !stable.empty();
    }
    CHECK(nonempty == 40);
}

TEST_CASE("brute force enumerates at most 3 candidates for one UE and one subchannel") {
    auto s = testing::table_scenario(1, "\"n_ues\": 1, \"n_subchannels\": 1");
    const auto g = synthetic(1, 1, gain_for(s, 400, s.p_ue_max), gain_for(s, 1e8, s.p_ue_max),
                             gain_for(s, 1e8, s.p_uav_max));
    const std::vector<double> w{1.0};
    const Context ctx{s, g, w};
    const auto stable = brute_force_stable(ctx);
    CHECK(stable.size() <= 3);
    CHECK_FALSE(stable.empty());
    const auto big = testing::instance(testing::faded_scenario(1, 5, 10));
    const std::vector<double> w5(5, 1.0);
    CHECK_THROWS_AS(brute_force_stable({big.s, big.gains, w5}), DomainError);
}

TEST_CASE("sanitize repairs infeasible matchings") {
    const auto in = testing::instance(testing::faded_scenario(6, 3, 6));
    const std::vector<double> w(3, 1.0);
    const Context ctx{in.s, in.gains, w};
    Matching m(6);
    for (std::size_t k = 0; k < 6; ++k) m.set(k, McPair{k % 3, k < 3 ? Mode::cellular : Mode::relay});
    const auto fixed = sanitize(m, ctx);
    CHECK(is_feasible(fixed, ctx));
    const Context cell_only{in.s, in.gains, w, false};
    const auto c = sanitize(m, cell_only);
    CHECK(c.count_relay() == 0);
    CHECK(is_feasible(c, cell_only));
}

TEST_CASE("random matching is feasible and seeded") {
    const auto in = testing::instance(testing::faded_scenario(8, 5, 10));
    const std::vector<double> w(5, 1.0);
    const Context ctx{in.s, in.gains, w};
    std::mt19937_64 a(42), b(42);
    const auto m1 = random_matching(ctx, a);
    const auto m2 = random_matching(ctx, b);
    CHECK(m1 == m2);
    CHECK(is_feasible(m1, ctx));
    auto none = testing::table_scenario(1, "\"snr_threshold\": 1e15");
    const auto in2 = testing::instance(none);
    std::mt19937_64 c(1);
    CHECK(random_matching({in2.s, in2.gains, w}, c).empty());
}
