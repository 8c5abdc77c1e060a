#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uavrelay/scenario.hpp"
#include "uavrelay/types.hpp"

namespace uavrelay::channel {

// (4 pi f / c)^2
double free_space_pathloss(double freq_hz);

double los_probability(double elevation_deg, double a, double b);

// Elevation of `uav` seen from `peer`, degrees in (0, 90].
double elevation_deg(const Vec3& uav, const Vec3& peer);

// Average air-to-ground gain |g|^2 / PL_avg. `uav` must be strictly above `peer`.
double a2g_gain(const Vec3& uav, const Vec3& peer, double freq_hz, const A2GParams& params, double fading = 1.0);

// d^-alpha |g|^2
double rayleigh_gain(const Vec3& ue, const Vec3& bs, double alpha, double fading = 1.0);

// Small-scale power draws |g|^2 for one slot.
struct FadingDraws {
    Grid<double> ue_bs;   // N x K
    Grid<double> ue_uav;  // N x K
    std::vector<double> uav_bs;

    static FadingDraws unit(std::size_t n, std::size_t k);
};

// Unit draws under deterministic fading; otherwise seeded from (rng_seed, slot).
// Terrestrial links are Rayleigh; air-to-ground links follow the configured model.
FadingDraws draw_fading(const Scenario& s, std::size_t slot);

struct ChannelGains {
    Grid<double> h_ue_bs;
    Grid<double> h_ue_uav;
    std::vector<double> h_uav_bs;
};

ChannelGains compute_gains(const Scenario& s, const FadingDraws& fading, const Vec3& uav);

// Doppler-induced inter-subcarrier interference.
struct IciConfig {
    std::size_t n_subcarriers = 1000;
    double spacing_hz = 15e3;
    double carrier_hz = 3.5e9;
    double speed_m_s = 100.0 / 3.6;
    double pathloss_ratio_db = 15.0;  // relay-path over direct-path received power
};

enum class IciMode { cellular, relay };

// Maximum Doppler over subcarrier spacing.
double normalized_doppler(const IciConfig& cfg);

// |sin(pi x) / (K sin(pi x / K))|^2 at x = eps + offset.
double leakage(double eps, long offset, std::size_t n_subcarriers);

struct IciSource {
    std::size_t subcarrier = 0;
    double power = 0.0;  // received power before leakage
};

// Expected interference power on subcarrier k from Doppler-shifted sources.
double ici_power(const IciConfig& cfg, std::span<const IciSource> sources, std::size_t k);

// Desired power after the Doppler attenuation that applies in the given mode.
double desired_power(IciMode mode, const IciConfig& cfg, double received);

enum class IciOccupancy {
    full,             // every other subcarrier carries relayed traffic
    lower_half_edge,  // relayed traffic on the upper half band, evaluated at its lower edge
    upper_half_edge,  // relayed traffic on the lower half band, evaluated at its upper edge
};

struct IciRatios {
    double cellular_db = 0.0;
    double relay_db = 0.0;
};

// ICI to desired-signal ratios for a unit-power reference configuration.
IciRatios reference_ratios(const IciConfig& cfg, IciOccupancy occupancy);

} // namespace uavrelay::channel
