#pragma once

#include <cstdint>
#include <string>

#include "uavrelay/channel.hpp"
#include "uavrelay/scenario.hpp"

namespace testing {

inline uavrelay::Scenario table_scenario(std::uint64_t seed, const std::string& extra = "") {
    std::string doc = "{\"rng_seed\": " + std::to_string(seed);
    if (!extra.empty()) doc += ", " + extra;
    doc += "}";
    return uavrelay::load_scenario(doc);
}

// Small instance with seeded Rayleigh/Rician draws so that subchannels differ.
inline uavrelay::Scenario faded_scenario(std::uint64_t seed, std::size_t n, std::size_t k,
                                         const std::string& extra = "") {
    std::string more = "\"n_ues\": " + std::to_string(n) + ", \"n_subchannels\": " + std::to_string(k) +
                       ", \"fading\": \"rayleigh\"";
    if (!extra.empty()) more += ", " + extra;
    return table_scenario(seed, more);
}

struct Instance {
    uavrelay::Scenario s;
    uavrelay::channel::FadingDraws fading;
    uavrelay::channel::ChannelGains gains;
};

inline Instance instance(uavrelay::Scenario s, std::size_t slot = 0) {
    Instance in{std::move(s), {}, {}};
    in.fading = uavrelay::channel::draw_fading(in.s, slot);
    in.gains = uavrelay::channel::compute_gains(in.s, in.fading, in.s.uav_start);
    return in;
}

} // namespace testing
