#include "uavrelay/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace uavrelay::channel {

namespace {
constexpr double kDeg = 180.0 / std::numbers::pi;
}

double free_space_pathloss(double freq_hz) {
    if (!(freq_hz > 0.0)) throw DomainError("free_space_pathloss: frequency must be positive");
    const double x = 4.0 * std::numbers::pi * freq_hz / kSpeedOfLight;
    return x * x;
}

double los_probability(double elevation_deg, double a, double b) {
    if (!(elevation_deg > 0.0 && elevation_deg <= 90.0))
        throw DomainError("los_probability: elevation must lie in (0, 90] degrees");
    return 1.0 / (1.0 + a * std::exp(-b * (elevation_deg - a)));
}

double elevation_deg(const Vec3& uav, const Vec3& peer) {
    const double d = distance(uav, peer);
    if (!(d > 0.0)) throw DomainError("elevation_deg: coincident points");
    const double dz = uav.z - peer.z;
    if (!(dz > 0.0)) throw DomainError("elevation_deg: UAV must be strictly above its peer");
    return std::min(90.0, kDeg * std::asin(std::min(1.0, dz / d)));
}

double a2g_gain(const Vec3& uav, const Vec3& peer, double freq_hz, const A2GParams& params, double fading) {
    const double theta = elevation_deg(uav, peer);
    const double pr = los_probability(theta, params.a, params.b);
    const double d = distance(uav, peer);
    const double ld2 = free_space_pathloss(freq_hz) * d * d;
    return fading / (pr * ld2 * params.eta_los + (1.0 - pr) * ld2 * params.eta_nlos);
}

double rayleigh_gain(const Vec3& ue, const Vec3& bs, double alpha, double fading) {
    const double d = distance(ue, bs);
    if (!(d > 0.0)) throw DomainError("rayleigh_gain: coincident points");
    return std::pow(d, -alpha) * fading;
}

FadingDraws FadingDraws::unit(std::size_t n, std::size_t k) {
    return {Grid<double>(n, k, 1.0), Grid<double>(n, k, 1.0), std::vector<double>(k, 1.0)};
}

FadingDraws draw_fading(const Scenario& s, std::size_t slot) {
    auto out = FadingDraws::unit(s.n_ues, s.n_subchannels);
    if (s.fading == FadingModel::deterministic) return out;
    std::mt19937_64 rng(mix_seed(s.rng_seed, 1000 + slot));
    std::exponential_distribution<double> rayleigh(1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double kf = db_to_linear(s.rician_k_db);
    const double los = std::sqrt(kf / (kf + 1.0));
    const double scatter = std::sqrt(1.0 / (2.0 * (kf + 1.0)));
    auto a2g = [&]() {
        if (s.fading == FadingModel::rayleigh) return rayleigh(rng);
        const double re = los + scatter * normal(rng);
        const double im = scatter * normal(rng);
        return re * re + im * im;
    };
    for (std::size_t n = 0; n < s.n_ues; ++n) {
        for (std::size_t k = 0; k < s.n_subchannels; ++k) {
            out.ue_bs(n, k) = rayleigh(rng);
            out.ue_uav(n, k) = a2g();
        }
    }
    for (std::size_t k = 0; k < s.n_subchannels; ++k) out.uav_bs[k] = a2g();
    return out;
}

ChannelGains compute_gains(const Scenario& s, const FadingDraws& fading, const Vec3& uav) {
    ChannelGains g{Grid<double>(s.n_ues, s.n_subchannels), Grid<double>(s.n_ues, s.n_subchannels),
                   std::vector<double>(s.n_subchannels)};
    const Vec3 bs = s.bs_position();
    for (std::size_t k = 0; k < s.n_subchannels; ++k) {
        const double f = s.subchannel_freqs[k];
        g.h_uav_bs[k] = a2g_gain(uav, bs, f, s.a2g, fading.uav_bs[k]);
        for (std::size_t n = 0; n < s.n_ues; ++n) {
            g.h_ue_bs(n, k) = rayleigh_gain(s.ue_positions[n], bs, s.pathloss_exp, fading.ue_bs(n, k));
            g.h_ue_uav(n, k) = a2g_gain(uav, s.ue_positions[n], f, s.a2g, fading.ue_uav(n, k));
        }
    }
    return g;
}

double normalized_doppler(const IciConfig& cfg) {
    if (!(cfg.spacing_hz > 0.0)) throw DomainError("ICI: subcarrier spacing must be positive");
    if (!(cfg.speed_m_s >= 0.0)) throw DomainError("ICI: speed must be nonnegative");
    return cfg.speed_m_s * cfg.carrier_hz / kSpeedOfLight / cfg.spacing_hz;
}

double leakage(double eps, long offset, std::size_t n_subcarriers) {
    const double x = eps + static_cast<double>(offset);
    if (x == 0.0) return 1.0;
    if (eps == 0.0) return 0.0;
    const double kk = static_cast<double>(n_subcarriers);
    const double r = std::sin(std::numbers::pi * x) / (kk * std::sin(std::numbers::pi * x / kk));
    return r * r;
}

double ici_power(const IciConfig& cfg, std::span<const IciSource> sources, std::size_t k) {
    if (k >= cfg.n_subcarriers) throw DomainError("ICI: subcarrier index out of range");
    const double eps = normalized_doppler(cfg);
    double total = 0.0;
    for (const auto& src : sources) {
        if (src.subcarrier >= cfg.n_subcarriers) throw DomainError("ICI: source subcarrier out of range");
        if (src.subcarrier == k) continue;
        const long m = static_cast<long>(src.subcarrier) - static_cast<long>(k);
        total += src.power * leakage(eps, m, cfg.n_subcarriers);
    }
    return total;
}

double desired_power(IciMode mode, const IciConfig& cfg, double received) {
    if (mode == IciMode::cellular) return received;
    return received * leakage(normalized_doppler(cfg), 0, cfg.n_subcarriers);
}

IciRatios reference_ratios(const IciConfig& cfg, IciOccupancy occupancy) {
    const std::size_t kk = cfg.n_subcarriers;
    if (kk < 4) throw DomainError("ICI: need at least 4 subcarriers");
    const std::size_t half = kk / 2;
    std::size_t lo = 0, hi = kk, k_cell = 0, k_relay = 0;
    switch (occupancy) {
    case IciOccupancy::full:
        k_cell = k_relay = half;
        break;
    case IciOccupancy::lower_half_edge:
        lo = half;
        k_cell = half - 1;
        k_relay = half;
        break;
    case IciOccupancy::upper_half_edge:
        hi = half;
        k_cell = half;
        k_relay = half - 1;
        break;
    }
    const double eta = db_to_linear(cfg.pathloss_ratio_db);
    std::vector<IciSource> via_uav;
    for (std::size_t j = lo; j < hi; ++j) via_uav.push_back({j, 1.0});
    // Cellular: direct desired signal of unit power, relayed interferers eta stronger.
    std::vector<IciSource> cell_src;
    for (const auto& s : via_uav) cell_src.push_back({s.subcarrier, eta});
    const double cell = ici_power(cfg, cell_src, k_cell) / desired_power(IciMode::cellular, cfg, 1.0);
    // Relay: desired and interferers share the UAV path.
    const double relay = ici_power(cfg, via_uav, k_relay) / desired_power(IciMode::relay, cfg, 1.0);
    return {linear_to_db(cell), linear_to_db(relay)};
}

} // namespace uavrelay::channel
