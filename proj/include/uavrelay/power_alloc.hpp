#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "uavrelay/channel.hpp"
#include "uavrelay/convex_core.hpp"
#include "uavrelay/link_rate.hpp"
#include "uavrelay/matching.hpp"
#include "uavrelay/scenario.hpp"

namespace uavrelay::power {

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// One occupied subchannel and the indices of its power variables.
struct Term {
    std::size_t ue = 0;
    std::size_t k = 0;
    Mode mode = Mode::cellular;
    std::size_t ue_var = 0;
    std::size_t uav_var = kNone;
    double h_direct = 0.0;
    double h_ue_uav = 0.0;
    double h_uav_bs = 0.0;
};

// Power variables of a fixed matching with their QoS floors and budget caps.
struct Problem {
    std::vector<Term> terms;
    std::size_t n_vars = 0;
    std::vector<double> weights;
    double sigma2 = 0.0;
    double ici = 0.0;
    std::vector<double> lower;
    std::vector<convex::Halfspace> caps;

    static Problem build(const Scenario& s, const channel::ChannelGains& g, std::span<const double> weights,
                         const matching::Matching& m);

    double term_rate(const Term& t, std::span<const double> x) const;
    double objective(std::span<const double> x) const;
    convex::Vector objective_gradient(std::span<const double> x) const;
    convex::Vector from_allocation(const link::PowerAllocation& p) const;
    link::PowerAllocation to_allocation(std::span<const double> x, std::size_t n_ues, std::size_t n_sub) const;
    bool feasible(std::span<const double> x, double rel_tol) const;
};

struct DcParts {
    double k_part = 0.0;
    double m_part = 0.0;
    convex::Vector k_grad;
    convex::Vector m_grad;
    convex::Vector expansion_point;
};

// Concave parts of R_n for UE n: R_n = K_n - M_n.
DcParts dc_split(std::size_t n, const Problem& prob, std::span<const double> x);

struct Result {
    link::PowerAllocation power;
    matching::Matching matching;  // input matching minus released subchannels
    std::vector<double> objective_trace;
    std::vector<std::size_t> released_subchannels;
    std::vector<std::size_t> dropped_ues;
    bool restored = false;
    int iterations = 0;
};

// SCP on the DC surrogate, starting from `init` when it is feasible and from
// QoS-equality powers plus a marginal-rate share of the spare budget otherwise.
Result scp_power(const Scenario& s, const channel::ChannelGains& g, std::span<const double> weights,
                 const matching::Matching& m, const link::PowerAllocation& init);

} // namespace uavrelay::power
