#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "uavrelay/scenario.hpp"

using namespace uavrelay;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& word) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(word) != std::string::npos; });
}

} // namespace

TEST_CASE("empty document yields the table defaults") {
    const auto s = load_scenario("{}");
    CHECK(s.n_ues == 5);
    CHECK(s.n_subchannels == 10);
    CHECK(s.n_slots == 10);
    CHECK(s.slot_len == 1.0);
    CHECK(s.bs_height == 30.0);
    CHECK(s.d_max == 15.0);
    CHECK(s.p_uav_max == 0.3);
    CHECK(s.noise_var == doctest::Approx(std::pow(10.0, -96.0 / 10.0) * 1e-3).epsilon(1e-12));
    CHECK(s.ici_power == doctest::Approx(std::pow(10.0, -110.0 / 10.0) * 1e-3).epsilon(1e-12));
    CHECK(s.a2g.eta_los == doctest::Approx(std::pow(10.0, 0.1)).epsilon(1e-12));
    CHECK(s.a2g.eta_nlos == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(s.a2g.a == 9.6);
    CHECK(s.a2g.b == 0.28);
    CHECK(s.tol.eps == 1e-3);
    CHECK(s.tol.eps_to == 1e-2);
    CHECK(s.snr.cellular == 300.0);
    CHECK(s.snr.ue_uav == 300.0);
    CHECK(s.snr.uav_bs == 300.0);
    CHECK(s.e_max == 500.0);
    REQUIRE(s.subchannel_freqs.size() == 10);
    for (double f : s.subchannel_freqs) CHECK(f == 1e9);
    REQUIRE(s.ue_positions.size() == 5);
    CHECK(validate(s).empty());
}

TEST_CASE("explicit table document matches the defaults") {
    const auto a = load_scenario(R"({
        "n_ues": 5, "n_subchannels": 10, "n_slots": 10, "slot_len_s": 1, "bs_height_m": 30,
        "d_max_m": 15, "p_uav_max_w": 0.3, "noise_var_dbm": -96, "eta_los_db": 1, "eta_nlos_db": 20,
        "a2g_a": 9.6, "a2g_b": 0.28, "subchannel_freq_hz": 1e9, "ici_power_dbm": -110,
        "eps": 0.001, "eps_to": 0.01})");
    CHECK(a == load_scenario("{}"));
}

TEST_CASE("validation errors name the offending key") {
    SUBCASE("negative d_max") {
        try {
            load_scenario(R"({"d_max_m": -1})");
            FAIL("expected a validation error");
        } catch (const ScenarioError& e) {
            CHECK(e.kind() == ScenarioError::Kind::validation);
            CHECK(mentions(e.violations(), "d_max"));
        }
    }
    SUBCASE("zero noise variance") {
        auto s = load_scenario("{}");
        s.noise_var = 0.0;
        const auto v = validate(s);
        CHECK(v.size() == 1);
        CHECK(mentions(v, "noise_var"));
    }
    SUBCASE("UE above ground") {
        auto s = load_scenario("{}");
        s.ue_positions[2].z = 5.0;
        const auto v = validate(s);
        CHECK(v.size() == 1);
        CHECK(mentions(v, "z-coordinate"));
    }
    SUBCASE("unknown key") {
        CHECK_THROWS_AS(load_scenario(R"({"d_max": 3})"), ScenarioError);
    }
    SUBCASE("both spellings of one quantity") {
        CHECK_THROWS_AS(load_scenario(R"({"p_ue_max_dbm": 10, "p_ue_max_w": 0.01})"), ScenarioError);
    }
    SUBCASE("malformed document is a parse error") {
        try {
            load_scenario("{\"n_ues\": ");
            FAIL("expected a parse error");
        } catch (const ScenarioError& e) {
            CHECK(e.kind() == ScenarioError::Kind::parse);
        }
    }
    SUBCASE("every bad value is reported at once") {
        try {
            load_scenario(R"({"n_ues": -1, "n_slots": "x", "rotor_radius_m": true})");
            FAIL("expected a validation error");
        } catch (const ScenarioError& e) {
            CHECK(e.violations().size() == 3);
        }
    }
    SUBCASE("hover energy above the budget") {
        CHECK_THROWS_AS(load_scenario(R"({"e_max_j": 100})"), ScenarioError);
    }
}

TEST_CASE("serialize then load is the identity") {
    for (std::uint64_t seed : {1u, 7u, 99u}) {
        auto s = load_scenario("{\"rng_seed\": " + std::to_string(seed) +
                               R"(, "fading": "rician", "rician_k_db": 3, "regions_m": [[50, 0], [-50, 0]]})");
        CHECK(load_scenario(serialize(s)) == s);
    }
}

TEST_CASE("unit conversions round-trip") {
    for (double dbm : {-110.0, -96.0, 5.0, 17.0, 20.0}) CHECK(std::abs(watts_to_dbm(dbm_to_watts(dbm)) - dbm) < 1e-12 * 110);
    for (double db : {1.0, 15.0, 20.0}) {
        const double back = linear_to_db(db_to_linear(db));
        CHECK(std::abs(back - db) / db < 1e-12);
    }
    CHECK(std::abs(dbm_to_watts(-96.0) / 2.5118864315095823e-13 - 1.0) < 1e-12);
    CHECK(std::abs(db_to_linear(20.0) / 100.0 - 1.0) < 1e-12);
}

TEST_CASE("sampled positions lie in the disc and are reproducible") {
    const auto p = sample_positions(7, 200.0, 5);
    REQUIRE(p.size() == 5);
    for (const auto& q : p) {
        CHECK(q.x * q.x + q.y * q.y <= 200.0 * 200.0);
        CHECK(q.z == 0.0);
    }
    CHECK(sample_positions(7, 200.0, 5) == p);
    CHECK_FALSE(sample_positions(8, 200.0, 5) == p);
    CHECK_THROWS_AS(sample_positions(1, 0.0, 3), DomainError);
    CHECK_THROWS_AS(sample_positions(1, 10.0, 0), DomainError);
}

TEST_CASE("Monte Carlo mean radius of the disc sampler is 2R/3") {
    const auto p = sample_positions(12345, 200.0, 100000);
    double sum = 0.0;
    for (const auto& q : p) sum += std::hypot(q.x, q.y);
    const double mean = sum / static_cast<double>(p.size());
    CHECK(std::abs(mean / (2.0 * 200.0 / 3.0) - 1.0) < 0.01);
}

TEST_CASE("UAV start altitude is uniform on [100, 200]") {
    double lo = 1e9, hi = -1e9, sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto q = sample_uav_start(static_cast<std::uint64_t>(i), 200.0);
        lo = std::min(lo, q.z);
        hi = std::max(hi, q.z);
        sum += q.z;
        CHECK(q.x * q.x + q.y * q.y <= 200.0 * 200.0);
    }
    CHECK(lo >= 100.0);
    CHECK(hi <= 200.0);
    CHECK(std::abs(sum / n - 150.0) < 1.5);
}

TEST_CASE("config key list covers every serialized key") {
    const auto keys = config_keys();
    const auto doc = serialize(load_scenario("{}"));
    for (const auto& [k, desc] : keys) CHECK_FALSE(desc.empty());
    for (const char* k : {"n_ues", "d_max_m", "p_ue_max_dbm", "p_ue_max_w", "rng_seed", "regions_m"}) {
        CHECK(std::any_of(keys.begin(), keys.end(), [&](const auto& e) { return e.first == k; }));
    }
    CHECK(doc.find("\"d_max_m\"") != std::string::npos);
}
