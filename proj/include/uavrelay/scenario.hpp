#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uavrelay/types.hpp"

namespace uavrelay {

inline constexpr double kSpeedOfLight = 2.998e8;

struct A2GParams {
    double eta_los = 0.0;   // linear
    double eta_nlos = 0.0;  // linear
    double a = 9.6;
    double b = 0.28;

    friend bool operator==(const A2GParams&, const A2GParams&) = default;
};

struct PropulsionParams {
    double delta = 0.012;
    double omega = 300.0;
    double rotor_radius = 0.4;
    double u_tip = 120.0;
    double v0 = 4.03;
    double d0 = 0.6;
    double rho = 1.225;
    double s = 0.05;
    double disc_area = 0.503;
    double weight = 20.0;
    double k_factor = 0.1;

    friend bool operator==(const PropulsionParams&, const PropulsionParams&) = default;
};

struct SnrThresholds {
    double cellular = 300.0;
    double ue_uav = 300.0;
    double uav_bs = 300.0;

    friend bool operator==(const SnrThresholds&, const SnrThresholds&) = default;
};

struct Tolerances {
    double eps = 1e-3;
    double eps_to = 1e-2;

    friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

enum class FadingModel { deterministic, rayleigh, rician };

struct Scenario {
    std::size_t n_ues = 5;
    std::size_t n_subchannels = 10;
    std::size_t n_slots = 10;
    double slot_len = 1.0;
    double bs_height = 30.0;
    double cell_radius = 200.0;
    std::vector<Vec3> ue_positions;
    Vec3 uav_start;
    std::vector<double> subchannel_freqs;
    double p_ue_max = 0.0;
    double p_uav_max = 0.3;
    double noise_var = 0.0;
    double ici_power = 0.0;
    double pathloss_exp = 4.0;
    A2GParams a2g;
    PropulsionParams propulsion;
    double d_max = 15.0;
    double e_max = 500.0;
    double min_clearance = 1.0;
    SnrThresholds snr;
    Tolerances tol;
    FadingModel fading = FadingModel::deterministic;
    double rician_k_db = 10.0;
    std::uint64_t rng_seed = 1;
    std::vector<Vec2> regions;

    Vec3 bs_position() const { return {0.0, 0.0, bs_height}; }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

class ScenarioError : public std::runtime_error {
public:
    enum class Kind { parse, validation };

    ScenarioError(Kind kind, std::vector<std::string> violations);

    Kind kind() const { return kind_; }
    const std::vector<std::string>& violations() const { return violations_; }

private:
    Kind kind_;
    std::vector<std::string> violations_;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);
double linear_to_db(double linear);

// Defaults with positions sampled from rng_seed.
Scenario default_scenario();

// Parses a flat JSON object. Missing keys fall back to defaults; positions
// not given are sampled from rng_seed. Throws ScenarioError.
Scenario load_scenario(std::string_view text);

std::string serialize(const Scenario& s);

std::vector<std::string> validate(const Scenario& s);

// Keys accepted by load_scenario, with a one-line description each.
std::vector<std::pair<std::string, std::string>> config_keys();

std::vector<Vec3> sample_positions(std::uint64_t seed, double radius, std::size_t n);

// Horizontal position uniform over the disc, altitude uniform in [100, 200].
Vec3 sample_uav_start(std::uint64_t seed, double radius);

// Deterministic stream derivation for per-purpose RNG seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

} // namespace uavrelay
