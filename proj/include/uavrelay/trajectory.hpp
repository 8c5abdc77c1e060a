#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "uavrelay/channel.hpp"
#include "uavrelay/convex_core.hpp"
#include "uavrelay/link_rate.hpp"
#include "uavrelay/matching.hpp"
#include "uavrelay/scenario.hpp"

namespace uavrelay::trajectory {

enum class LinkKind { uav_bs, ue_uav };

// Concave-bound constants of one UAV link at a horizontal expansion point.
// Frequency and fading are factored out: the bound on the gain is
// value * fading / L(f).
struct LinkBound {
    Vec3 peer;
    double dz = 0.0;         // UAV altitude above the peer
    Vec2 expansion;          // possibly nudged off the peer's vertical
    double c = 0.0;          // d / dz at the expansion point
    double asin_inv_c = 0.0;
    double slope = 0.0;      // 1 / (c sqrt(c^2 - 1))
    double d_factor = 0.0;   // 1 + a exp(-b (theta0 - a))
    double lambda0 = 0.0;    // d0^2 (eta_nlos - (eta_nlos - eta_los) PR0)
};

struct SurrogateContext {
    Vec2 expansion;
    double z = 0.0;
    A2GParams a2g;
    LinkBound uav_bs;
    std::vector<LinkBound> ue_uav;
};

// Below this horizontal offset the expansion point is moved out to it.
inline constexpr double kNudge = 0.1;

SurrogateContext build_context(const Scenario& s, const Vec3& expansion);

struct GainBound {
    double value = 0.0;
    Vec2 gradient;
};

GainBound gain_lower_bound(LinkKind link, std::size_t ue, const Vec2& pos, const SurrogateContext& ctx,
                           double freq_hz, double fading = 1.0);

// One relay-mode subchannel with its fixed powers.
struct RelayTerm {
    std::size_t ue = 0;
    std::size_t k = 0;
    double p_ue = 0.0;
    double p_uav = 0.0;
    double weight = 0.0;
    double freq = 0.0;
    double fading_ue_uav = 1.0;
    double fading_uav_bs = 1.0;
};

struct RateBound {
    double value = 0.0;
    Vec2 gradient;
};

// Concave minorizer of the relay rate in the horizontal position, tight at ctx.expansion.
RateBound surrogate_relay_rate(const Vec2& pos, const SurrogateContext& ctx, const RelayTerm& term,
                               const Scenario& s);

struct SlotInputs {
    const Scenario& scenario;
    const matching::Matching& matching;
    const link::PowerAllocation& power;
    std::span<const double> weights;
    const channel::FadingDraws& fading;
    Vec3 origin;               // position at the start of the slot
    double move_radius = 0.0;  // effective per-slot displacement bound
    std::ostream* trace = nullptr;
};

std::vector<RelayTerm> relay_terms(const SlotInputs& in);

// Weighted sum rate with exact gains at `pos`.
double true_objective(const Vec3& pos, const SlotInputs& in);

// Relay QoS with exact gains, altitude floor, and displacement bound.
bool position_feasible(const Vec3& pos, const SlotInputs& in);

Vec2 solve_horizontal(const Vec3& current, const SlotInputs& in);

// PR_LoS(z) ~ e + f (z - z0) / d0 with the distance frozen at z0.
struct LinearizedLos {
    double e = 0.0;
    double f = 0.0;
    double d0 = 0.0;
    double z0 = 0.0;

    double at(double z) const { return e + f * (z - z0) / d0; }
};

LinearizedLos linearize_los(const Vec3& uav, const Vec3& peer, const A2GParams& params);

// Concave surrogate of the weighted relay rate in the altitude, built at `current`.
convex::Function altitude_surrogate(const Vec3& current, const SlotInputs& in);

double solve_altitude(const Vec3& current, const SlotInputs& in);

struct ToResult {
    Vec3 position;
    std::vector<double> objective_trace;
    int passes = 0;
    std::vector<std::string> warnings;
};

ToResult to_algorithm(const Vec3& start, const SlotInputs& in);

} // namespace uavrelay::trajectory
