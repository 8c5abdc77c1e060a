#pragma once

#include "uavrelay/scenario.hpp"

namespace uavrelay::propulsion {

struct Derived {
    double p0 = 0.0;  // blade profile power in hover
    double pi = 0.0;  // induced power in hover
};

Derived derive(const PropulsionParams& p);

// Rotary-wing propulsion power at constant horizontal speed v.
double flying_power(double v, const PropulsionParams& p);

// Convex, nondecreasing upper bound of flying_power; tight at v = 0.
double flying_power_upper(double v, const PropulsionParams& p);

// Largest v with flying_power_upper(v) * slot_len <= e_max, to 1e-6 m/s.
// Throws DomainError when hovering alone exceeds the budget.
double max_speed_under_energy(double e_max, double slot_len, const PropulsionParams& p);

// min(d_max, v_E * slot_len).
double effective_move_radius(const Scenario& s);

} // namespace uavrelay::propulsion
