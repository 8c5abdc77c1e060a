#include "uavrelay/link_rate.hpp"

#include <cmath>
#include <numbers>

namespace uavrelay::link {

namespace {
constexpr double kHalfLog2e = 0.5 / std::numbers::ln2;
}

double rate_cellular(double p, double h, double sigma2, double ici) {
    const double s = p * h;
    return kHalfLog2e * (std::log1p(s / sigma2) + std::log1p(s / (sigma2 + ici)));
}

RelaySinrs relay_sinrs(double p_ue, double p_uav, double h_ue_uav, double h_uav_bs, double sigma2, double ici) {
    const double rho1 = ici / sigma2 + 1.0;
    const double a = p_ue * h_ue_uav;
    const double b = p_uav * h_uav_bs;
    RelaySinrs out;
    out.ue_uav = a / sigma2;
    const double den = sigma2 * (b + rho1 * a + rho1 * sigma2);
    out.uav_bs = den > 0.0 ? a * b / den : 0.0;
    return out;
}

double rate_relay(const RelaySinrs& s) { return kHalfLog2e * std::log1p(s.uav_bs); }

bool qos_cellular(bool occupied, double p, double h, double sigma2, double ici, double gamma) {
    if (!occupied) return true;
    const double s = p * h;
    return s >= gamma * sigma2 * (1.0 - kQosSlack) && s >= gamma * (sigma2 + ici) * (1.0 - kQosSlack);
}

bool qos_relay(bool occupied, double p_ue, double p_uav, double h_ue_uav, double h_uav_bs, double sigma2,
               double ici, double gamma1, double gamma2) {
    if (!occupied) return true;
    return p_ue * h_ue_uav >= gamma1 * sigma2 * (1.0 - kQosSlack) &&
           p_uav * h_uav_bs >= gamma2 * (sigma2 + ici) * (1.0 - kQosSlack);
}

double ue_rate(std::size_t n, Mode beta, std::span<const int> alloc_row, const PowerAllocation& power,
               const channel::ChannelGains& gains, double sigma2, double ici) {
    double r = 0.0;
    for (std::size_t k = 0; k < alloc_row.size(); ++k) {
        if (alloc_row[k] == 0) continue;
        if (beta == Mode::cellular) {
            r += rate_cellular(power.p_ue(n, k), gains.h_ue_bs(n, k), sigma2, ici);
        } else {
            r += rate_relay(relay_sinrs(power.p_ue(n, k), power.p_uav[k], gains.h_ue_uav(n, k), gains.h_uav_bs[k],
                                        sigma2, ici));
        }
    }
    return r;
}

std::vector<double> update_weights(std::span<const double> prev_avg_rates) {
    std::vector<double> w;
    w.reserve(prev_avg_rates.size());
    for (double r : prev_avg_rates) w.push_back(1.0 / (r + 0.1));
    return w;
}

double jain_index(std::span<const double> avg_rates) {
    double s = 0.0, s2 = 0.0;
    for (double r : avg_rates) {
        s += r;
        s2 += r * r;
    }
    if (!(s2 > 0.0)) throw DomainError("jain_index: all rates are zero");
    return s * s / (static_cast<double>(avg_rates.size()) * s2);
}

} // namespace uavrelay::link
