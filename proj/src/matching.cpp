#include "uavrelay/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uavrelay::matching {

std::vector<std::size_t> Matching::subchannels_of(const McPair& p) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < assign_.size(); ++k)
        if (assign_[k] && *assign_[k] == p) out.push_back(k);
    return out;
}

std::size_t Matching::count_ue(std::size_t n) const {
    return static_cast<std::size_t>(
        std::count_if(assign_.begin(), assign_.end(), [n](const auto& a) { return a && a->ue == n; }));
}

std::size_t Matching::count_relay() const {
    return static_cast<std::size_t>(
        std::count_if(assign_.begin(), assign_.end(), [](const auto& a) { return a && a->mode == Mode::relay; }));
}

bool Matching::mode_consistent() const {
    for (const auto& a : assign_) {
        if (!a) continue;
        for (const auto& b : assign_)
            if (b && b->ue == a->ue && b->mode != a->mode) return false;
    }
    return true;
}

bool Matching::empty() const {
    return std::none_of(assign_.begin(), assign_.end(), [](const auto& a) { return a.has_value(); });
}

std::vector<std::optional<Mode>> Matching::modes(std::size_t n_ues) const {
    std::vector<std::optional<Mode>> out(n_ues);
    for (const auto& a : assign_)
        if (a && a->ue < n_ues) out[a->ue] = a->mode;
    return out;
}

Grid<int> Matching::allocation(std::size_t n_ues) const {
    Grid<int> a(n_ues, assign_.size(), 0);
    for (std::size_t k = 0; k < assign_.size(); ++k)
        if (assign_[k] && assign_[k]->ue < n_ues) a(assign_[k]->ue, k) = 1;
    return a;
}

Matching Matching::swapped(std::size_t k1, std::size_t k2) const {
    Matching m = *this;
    std::swap(m.assign_.at(k1), m.assign_.at(k2));
    return m;
}

link::PowerAllocation equal_split(const Scenario& s, const Matching& m) {
    link::PowerAllocation p(s.n_ues, s.n_subchannels);
    std::vector<std::size_t> per_ue(s.n_ues, 0);
    std::size_t relay = 0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (!m.at(k)) continue;
        ++per_ue[m.at(k)->ue];
        if (m.at(k)->mode == Mode::relay) ++relay;
    }
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (!m.at(k)) continue;
        const auto& a = *m.at(k);
        p.p_ue(a.ue, k) = s.p_ue_max / static_cast<double>(per_ue[a.ue]);
        if (a.mode == Mode::relay) p.p_uav[k] = s.p_uav_max / static_cast<double>(relay);
    }
    return p;
}

double subchannel_rate(std::size_t k, const McPair& pair, const Context& ctx, const link::PowerAllocation& power) {
    const auto& s = ctx.scenario;
    const auto& g = ctx.gains;
    if (pair.mode == Mode::cellular)
        return link::rate_cellular(power.p_ue(pair.ue, k), g.h_ue_bs(pair.ue, k), s.noise_var, s.ici_power);
    return link::rate_relay(link::relay_sinrs(power.p_ue(pair.ue, k), power.p_uav[k], g.h_ue_uav(pair.ue, k),
                                              g.h_uav_bs[k], s.noise_var, s.ici_power));
}

double subchannel_utility(std::size_t k, const McPair& pair, const Context& ctx, const link::PowerAllocation& power) {
    return ctx.weights[pair.ue] * subchannel_rate(k, pair, ctx, power);
}

double mc_pair_utility(const McPair& pair, std::span<const std::size_t> subset, const Context& ctx,
                       const link::PowerAllocation& power) {
    double u = 0.0;
    for (auto k : subset) u += subchannel_utility(k, pair, ctx, power);
    return u;
}

bool qos_ok(std::size_t k, const McPair& pair, const Context& ctx, const link::PowerAllocation& power) {
    const auto& s = ctx.scenario;
    const auto& g = ctx.gains;
    if (pair.mode == Mode::cellular)
        return link::qos_cellular(true, power.p_ue(pair.ue, k), g.h_ue_bs(pair.ue, k), s.noise_var, s.ici_power,
                                  s.snr.cellular);
    return link::qos_relay(true, power.p_ue(pair.ue, k), power.p_uav[k], g.h_ue_uav(pair.ue, k), g.h_uav_bs[k],
                           s.noise_var, s.ici_power, s.snr.ue_uav, s.snr.uav_bs);
}

double system_utility(const Matching& m, const Context& ctx) {
    const auto p = equal_split(ctx.scenario, m);
    double u = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k)
        if (m.at(k)) u += subchannel_utility(k, *m.at(k), ctx, p);
    return u;
}

bool is_feasible(const Matching& m, const Context& ctx) {
    if (m.size() != ctx.scenario.n_subchannels || !m.mode_consistent()) return false;
    const auto p = equal_split(ctx.scenario, m);
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (!m.at(k)) continue;
        if (m.at(k)->ue >= ctx.scenario.n_ues) return false;
        if (m.at(k)->mode == Mode::relay && !ctx.allow_relay) return false;
        if (!qos_ok(k, *m.at(k), ctx, p)) return false;
    }
    return true;
}

Matching sanitize(Matching m, const Context& ctx) {
    const auto& s = ctx.scenario;
    if (m.size() != s.n_subchannels) return Matching(s.n_subchannels);
    for (std::size_t k = 0; k < m.size(); ++k) {
        const auto& a = m.at(k);
        if (a && (a->ue >= s.n_ues || (a->mode == Mode::relay && !ctx.allow_relay))) m.set(k, std::nullopt);
    }
    for (std::size_t n = 0; n < s.n_ues; ++n) {
        const auto cell = m.subchannels_of({n, Mode::cellular});
        const auto relay = m.subchannels_of({n, Mode::relay});
        if (cell.empty() || relay.empty()) continue;
        for (auto k : cell.size() >= relay.size() ? relay : cell) m.set(k, std::nullopt);
    }
    while (!is_feasible(m, ctx)) {
        const auto p = equal_split(s, m);
        std::optional<std::size_t> drop;
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < m.size(); ++k) {
            if (!m.at(k) || qos_ok(k, *m.at(k), ctx, p)) continue;
            const double u = subchannel_utility(k, *m.at(k), ctx, p);
            if (u < worst) {
                worst = u;
                drop = k;
            }
        }
        if (!drop) break;
        m.set(*drop, std::nullopt);
    }
    return m;
}

std::vector<std::optional<Mode>> screen_modes(const Context& ctx) {
    const auto& s = ctx.scenario;
    std::vector<std::optional<Mode>> out(s.n_ues);
    link::PowerAllocation full(s.n_ues, s.n_subchannels);
    for (std::size_t n = 0; n < s.n_ues; ++n)
        for (std::size_t k = 0; k < s.n_subchannels; ++k) full.p_ue(n, k) = s.p_ue_max;
    std::fill(full.p_uav.begin(), full.p_uav.end(), s.p_uav_max);
    for (std::size_t n = 0; n < s.n_ues; ++n) {
        double best = -1.0;
        for (Mode mode : {Mode::cellular, Mode::relay}) {
            if (mode == Mode::relay && !ctx.allow_relay) continue;
            double score = 0.0;
            bool feasible = false;
            for (std::size_t k = 0; k < s.n_subchannels; ++k) {
                if (!qos_ok(k, {n, mode}, ctx, full)) continue;
                feasible = true;
                score += subchannel_rate(k, {n, mode}, ctx, full);
            }
            if (feasible && score > best) {
                best = score;
                out[n] = mode;
            }
        }
    }
    return out;
}

Matching init_matching(const Context& ctx) {
    const auto& s = ctx.scenario;
    const auto modes = screen_modes(ctx);
    Matching m(s.n_subchannels);
    for (std::size_t k = 0; k < s.n_subchannels; ++k) {
        const double base = system_utility(m, ctx);
        std::optional<McPair> best;
        double best_u = -1.0;
        for (std::size_t n = 0; n < s.n_ues; ++n) {
            if (!modes[n]) continue;
            const McPair pair{n, *modes[n]};
            Matching cand = m;
            cand.set(k, pair);
            if (!is_feasible(cand, ctx)) continue;
            const double gain = system_utility(cand, ctx) - base;
            if (!(gain > 1e-12 * std::max(1.0, std::abs(base)))) continue;
            const double u = subchannel_utility(k, pair, ctx, equal_split(s, cand));
            if (u > best_u) {
                best_u = u;
                best = pair;
            }
        }
        if (best) m.set(k, best);
    }
    return m;
}

SwapOutcome swap_blocking(const Matching& psi, std::size_t k1, std::size_t k2, const Context& ctx) {
    SwapOutcome out;
    if (k1 == k2 || k1 >= psi.size() || k2 >= psi.size()) return out;
    const auto& p1 = psi.at(k1);
    const auto& p2 = psi.at(k2);
    if (p1 == p2) return out;
    // Swaps keep every pair's subchannel count, so each side keeps its power level.
    Matching m = psi.swapped(k1, k2);
    const auto before = equal_split(ctx.scenario, psi);
    const auto after = equal_split(ctx.scenario, m);
    auto util = [&](std::size_t k, const std::optional<McPair>& p, const link::PowerAllocation& pw) {
        return p ? subchannel_utility(k, *p, ctx, pw) : 0.0;
    };
    const double u11 = util(k1, p1, before), u12 = util(k2, p1, after);  // p1 on k1 before, on k2 after
    const double u22 = util(k2, p2, before), u21 = util(k1, p2, after);  // p2 on k2 before, on k1 after
    // Real pairs must not lose utility; only the swapped subchannel changes under the split.
    if (p1 && u12 < u11) return out;
    if (p2 && u21 < u22) return out;
    // Subchannels must not prefer their old match, unless they become vacant.
    if (p2 && u21 < u11) return out;
    if (p1 && u12 < u22) return out;
    auto strictly = [](double a, double b) { return a - b > 1e-12 * std::max(std::abs(b), std::abs(a)); };
    if (!((p1 && strictly(u12, u11)) || (p2 && strictly(u21, u22)))) return out;
    if (!m.mode_consistent()) return out;
    if (p2 && !qos_ok(k1, *p2, ctx, after)) return out;
    if (p1 && !qos_ok(k2, *p1, ctx, after)) return out;
    out.blocking = true;
    out.swapped = std::move(m);
    return out;
}

MsmaResult msma(Matching init, const Context& ctx) {
    MsmaResult r{std::move(init), {}};
    const std::size_t kk = r.matching.size();
    r.stats.utility_trace.push_back(system_utility(r.matching, ctx));
    for (;;) {
        ++r.stats.rounds;
        bool any = false;
        std::size_t examined = 0;
        for (std::size_t k1 = 0; k1 < kk; ++k1) {
            for (std::size_t k2 = k1 + 1; k2 < kk; ++k2) {
                if (!r.matching.at(k1) && !r.matching.at(k2)) continue;
                ++examined;
                auto s = swap_blocking(r.matching, k1, k2, ctx);
                if (!s.blocking) continue;
                r.matching = std::move(s.swapped);
                r.stats.utility_trace.push_back(system_utility(r.matching, ctx));
                ++r.stats.swaps;
                any = true;
            }
        }
        r.stats.examined_per_round.push_back(examined);
        if (!any) break;
    }
    return r;
}

bool is_pairwise_stable(const Matching& m, const Context& ctx) {
    for (std::size_t k1 = 0; k1 < m.size(); ++k1)
        for (std::size_t k2 = k1 + 1; k2 < m.size(); ++k2)
            if (swap_blocking(m, k1, k2, ctx).blocking) return false;
    return true;
}

std::vector<Matching> brute_force_stable(const Context& ctx) {
    const auto& s = ctx.scenario;
    const std::size_t modes = ctx.allow_relay ? 2 : 1;
    const std::size_t options = s.n_ues * modes + 1;
    double total = 1.0;
    for (std::size_t k = 0; k < s.n_subchannels; ++k) total *= static_cast<double>(options);
    if (total > 1e5) throw DomainError("brute_force_stable: instance too large");
    std::vector<std::size_t> digit(s.n_subchannels, 0);
    std::vector<Matching> out;
    for (;;) {
        Matching m(s.n_subchannels);
        for (std::size_t k = 0; k < s.n_subchannels; ++k) {
            if (digit[k] == 0) continue;
            const std::size_t j = digit[k] - 1;
            m.set(k, McPair{j / modes, j % modes == 0 ? Mode::cellular : Mode::relay});
        }
        if (is_feasible(m, ctx) && is_pairwise_stable(m, ctx)) out.push_back(m);
        std::size_t k = 0;
        while (k < digit.size() && ++digit[k] == options) digit[k++] = 0;
        if (k == digit.size()) break;
    }
    return out;
}

Matching random_matching(const Context& ctx, std::mt19937_64& rng) {
    const auto& s = ctx.scenario;
    link::PowerAllocation full(s.n_ues, s.n_subchannels);
    for (std::size_t n = 0; n < s.n_ues; ++n)
        for (std::size_t k = 0; k < s.n_subchannels; ++k) full.p_ue(n, k) = s.p_ue_max;
    std::fill(full.p_uav.begin(), full.p_uav.end(), s.p_uav_max);
    std::vector<std::optional<Mode>> mode(s.n_ues);
    for (std::size_t n = 0; n < s.n_ues; ++n) {
        std::vector<Mode> feasible;
        for (Mode md : {Mode::cellular, Mode::relay}) {
            if (md == Mode::relay && !ctx.allow_relay) continue;
            for (std::size_t k = 0; k < s.n_subchannels; ++k) {
                if (qos_ok(k, {n, md}, ctx, full)) {
                    feasible.push_back(md);
                    break;
                }
            }
        }
        if (!feasible.empty())
            mode[n] = feasible[std::uniform_int_distribution<std::size_t>(0, feasible.size() - 1)(rng)];
    }
    std::vector<std::size_t> order(s.n_subchannels);
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    Matching m(s.n_subchannels);
    for (auto k : order) {
        std::vector<McPair> cands;
        for (std::size_t n = 0; n < s.n_ues; ++n) {
            if (!mode[n]) continue;
            Matching c = m;
            c.set(k, McPair{n, *mode[n]});
            if (is_feasible(c, ctx)) cands.push_back({n, *mode[n]});
        }
        if (!cands.empty()) m.set(k, cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)]);
    }
    return m;
}

} // namespace uavrelay::matching
