#include "uavrelay/uav_power.hpp"

#include <cmath>

namespace uavrelay::propulsion {

Derived derive(const PropulsionParams& p) {
    const double omega_r = p.omega * p.rotor_radius;
    Derived d;
    d.p0 = p.delta / 8.0 * p.rho * p.s * p.disc_area * omega_r * omega_r * omega_r;
    d.pi = (1.0 + p.k_factor) * std::pow(p.weight, 1.5) / std::sqrt(2.0 * p.rho * p.disc_area);
    return d;
}

double flying_power(double v, const PropulsionParams& p) {
    if (!(v >= 0.0)) throw DomainError("flying_power: speed must be nonnegative");
    const auto d = derive(p);
    const double v2 = v * v;
    const double v02 = p.v0 * p.v0;
    const double blade = d.p0 * (1.0 + 3.0 * v2 / (p.u_tip * p.u_tip));
    // sqrt(1 + x^2) - x with x = v^2/(2 v0^2), written to avoid cancellation at large v.
    const double x = v2 / (2.0 * v02);
    const double bracket = 1.0 / (std::sqrt(1.0 + x * x) + x);
    const double induced = d.pi * std::sqrt(bracket);
    const double parasite = 0.5 * p.d0 * p.rho * p.s * p.disc_area * v2 * v;
    return blade + induced + parasite;
}

double flying_power_upper(double v, const PropulsionParams& p) {
    if (!(v >= 0.0)) throw DomainError("flying_power_upper: speed must be nonnegative");
    const auto d = derive(p);
    const double v2 = v * v;
    return d.p0 * (1.0 + 3.0 * v2 / (p.u_tip * p.u_tip)) + d.pi + 0.5 * p.d0 * p.rho * p.s * p.disc_area * v2 * v;
}

double max_speed_under_energy(double e_max, double slot_len, const PropulsionParams& p) {
    if (!(slot_len > 0.0)) throw DomainError("max_speed_under_energy: slot length must be positive");
    const auto budget = [&](double v) { return flying_power_upper(v, p) * slot_len; };
    if (budget(0.0) > e_max) throw DomainError("max_speed_under_energy: hover energy exceeds e_max");
    double lo = 0.0;
    double hi = 1.0;
    while (budget(hi) <= e_max) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) return lo;
    }
    while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        (budget(mid) <= e_max ? lo : hi) = mid;
    }
    return lo;
}

double effective_move_radius(const Scenario& s) {
    const double v = max_speed_under_energy(s.e_max, s.slot_len, s.propulsion);
    return std::min(s.d_max, v * s.slot_len);
}

} // namespace uavrelay::propulsion
