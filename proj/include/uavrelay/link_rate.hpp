#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "uavrelay/channel.hpp"
#include "uavrelay/scenario.hpp"
#include "uavrelay/types.hpp"

namespace uavrelay::link {

struct PowerAllocation {
    Grid<double> p_ue;          // N x K
    std::vector<double> p_uav;  // K

    PowerAllocation() = default;
    PowerAllocation(std::size_t n, std::size_t k) : p_ue(n, k, 0.0), p_uav(k, 0.0) {}
    friend bool operator==(const PowerAllocation&, const PowerAllocation&) = default;
};

struct RelaySinrs {
    double ue_uav = 0.0;
    double uav_bs = 0.0;
};

// Two-phase direct transmission; the second phase sees the ICI.
double rate_cellular(double p, double h, double sigma2, double ici);

RelaySinrs relay_sinrs(double p_ue, double p_uav, double h_ue_uav, double h_uav_bs, double sigma2, double ici);

double rate_relay(const RelaySinrs& s);

// Occupancy-gated QoS checks with a relative slack for rounding at the boundary.
inline constexpr double kQosSlack = 1e-9;

bool qos_cellular(bool occupied, double p, double h, double sigma2, double ici, double gamma);

bool qos_relay(bool occupied, double p_ue, double p_uav, double h_ue_uav, double h_uav_bs, double sigma2,
               double ici, double gamma1, double gamma2);

// R_n from the mode flag and the allocation row of UE n.
double ue_rate(std::size_t n, Mode beta, std::span<const int> alloc_row, const PowerAllocation& power,
               const channel::ChannelGains& gains, double sigma2, double ici);

std::vector<double> update_weights(std::span<const double> prev_avg_rates);

// Throws DomainError when every rate is zero.
double jain_index(std::span<const double> avg_rates);

struct RateReport {
    std::vector<double> per_ue_rate;
    std::vector<double> per_subchannel_rate;
    double objective = 0.0;
};

} // namespace uavrelay::link
