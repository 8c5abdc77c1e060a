#include "uavrelay/power_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uavrelay::power {

namespace {
constexpr double kHalfLog2e = 0.5 / std::numbers::ln2;
}

Problem Problem::build(const Scenario& s, const channel::ChannelGains& g, std::span<const double> weights,
                       const matching::Matching& m) {
    Problem p;
    p.weights.assign(weights.begin(), weights.end());
    p.sigma2 = s.noise_var;
    p.ici = s.ici_power;
    std::vector<std::vector<std::size_t>> ue_vars(s.n_ues);
    std::vector<std::size_t> uav_vars;
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (!m.at(k)) continue;
        Term t;
        t.ue = m.at(k)->ue;
        t.k = k;
        t.mode = m.at(k)->mode;
        t.h_direct = g.h_ue_bs(t.ue, k);
        t.h_ue_uav = g.h_ue_uav(t.ue, k);
        t.h_uav_bs = g.h_uav_bs[k];
        t.ue_var = p.n_vars++;
        ue_vars[t.ue].push_back(t.ue_var);
        if (t.mode == Mode::cellular) {
            p.lower.push_back(s.snr.cellular * (s.noise_var + s.ici_power) / t.h_direct);
        } else {
            p.lower.push_back(s.snr.ue_uav * s.noise_var / t.h_ue_uav);
            t.uav_var = p.n_vars++;
            uav_vars.push_back(t.uav_var);
            p.lower.push_back(s.snr.uav_bs * (s.noise_var + s.ici_power) / t.h_uav_bs);
        }
        p.terms.push_back(t);
    }
    auto cap = [&](const std::vector<std::size_t>& vars, double limit) {
        if (vars.empty()) return;
        convex::Halfspace h{convex::Vector(p.n_vars, 0.0), limit};
        for (auto v : vars) h.normal[v] = 1.0;
        p.caps.push_back(std::move(h));
    };
    for (const auto& vars : ue_vars) cap(vars, s.p_ue_max);
    cap(uav_vars, s.p_uav_max);
    return p;
}

double Problem::term_rate(const Term& t, std::span<const double> x) const {
    if (t.mode == Mode::cellular) return link::rate_cellular(x[t.ue_var], t.h_direct, sigma2, ici);
    return link::rate_relay(link::relay_sinrs(x[t.ue_var], x[t.uav_var], t.h_ue_uav, t.h_uav_bs, sigma2, ici));
}

double Problem::objective(std::span<const double> x) const {
    double f = 0.0;
    for (const auto& t : terms) f += weights[t.ue] * term_rate(t, x);
    return f;
}

convex::Vector Problem::objective_gradient(std::span<const double> x) const {
    convex::Vector grad(n_vars, 0.0);
    for (std::size_t n = 0; n < weights.size(); ++n) {
        const auto parts = dc_split(n, *this, x);
        for (std::size_t i = 0; i < n_vars; ++i) grad[i] += weights[n] * (parts.k_grad[i] - parts.m_grad[i]);
    }
    return grad;
}

convex::Vector Problem::from_allocation(const link::PowerAllocation& p) const {
    convex::Vector x(n_vars, 0.0);
    for (const auto& t : terms) {
        x[t.ue_var] = p.p_ue(t.ue, t.k);
        if (t.uav_var != kNone) x[t.uav_var] = p.p_uav[t.k];
    }
    return x;
}

link::PowerAllocation Problem::to_allocation(std::span<const double> x, std::size_t n_ues, std::size_t n_sub) const {
    link::PowerAllocation p(n_ues, n_sub);
    for (const auto& t : terms) {
        p.p_ue(t.ue, t.k) = x[t.ue_var];
        if (t.uav_var != kNone) p.p_uav[t.k] = x[t.uav_var];
    }
    return p;
}

bool Problem::feasible(std::span<const double> x, double rel_tol) const {
    for (std::size_t i = 0; i < n_vars; ++i)
        if (x[i] < lower[i] * (1.0 - rel_tol)) return false;
    for (const auto& h : caps) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n_vars; ++i) sum += h.normal[i] * x[i];
        if (sum > h.offset * (1.0 + rel_tol)) return false;
    }
    return true;
}

DcParts dc_split(std::size_t n, const Problem& prob, std::span<const double> x) {
    DcParts d;
    d.k_grad.assign(prob.n_vars, 0.0);
    d.m_grad.assign(prob.n_vars, 0.0);
    d.expansion_point.assign(x.begin(), x.end());
    const double s2 = prob.sigma2;
    const double c = 1.0 + prob.ici / s2;
    for (const auto& t : prob.terms) {
        if (t.ue != n) continue;
        if (t.mode == Mode::cellular) {
            const double p = x[t.ue_var];
            d.k_part += link::rate_cellular(p, t.h_direct, s2, prob.ici);
            d.k_grad[t.ue_var] +=
                kHalfLog2e * (t.h_direct / (s2 + p * t.h_direct) + t.h_direct / (s2 + prob.ici + p * t.h_direct));
            continue;
        }
        const double a = x[t.ue_var] * t.h_ue_uav;
        const double b = x[t.uav_var] * t.h_uav_bs;
        const double inner = b + c * a + c * s2;
        d.k_part += 0.5 * (std::log2(a + s2) + std::log2(b + c * s2));
        d.m_part += 0.5 * std::log2(s2 * inner);
        d.k_grad[t.ue_var] += kHalfLog2e * t.h_ue_uav / (a + s2);
        d.k_grad[t.uav_var] += kHalfLog2e * t.h_uav_bs / (b + c * s2);
        d.m_grad[t.ue_var] += kHalfLog2e * c * t.h_ue_uav / inner;
        d.m_grad[t.uav_var] += kHalfLog2e * t.h_uav_bs / inner;
    }
    return d;
}

namespace {

// Releases the cheapest subchannel of each over-committed budget until the
// QoS floors fit under every cap.
matching::Matching restore(const Scenario& s, const channel::ChannelGains& g, std::span<const double> weights,
                           matching::Matching m, std::vector<std::size_t>& released) {
    for (;;) {
        const auto prob = Problem::build(s, g, weights, m);
        bool changed = false;
        for (const auto& h : prob.caps) {
            double need = 0.0;
            for (std::size_t i = 0; i < prob.n_vars; ++i) need += h.normal[i] * prob.lower[i];
            if (need <= h.offset) continue;
            const Term* drop = nullptr;
            double worst_u = 0.0, worst_lb = 0.0;
            for (const auto& t : prob.terms) {
                const std::size_t v = h.normal[t.ue_var] != 0.0 ? t.ue_var
                                      : (t.uav_var != kNone && h.normal[t.uav_var] != 0.0) ? t.uav_var
                                                                                            : kNone;
                if (v == kNone) continue;
                const double u = weights[t.ue] * prob.term_rate(t, prob.lower);
                if (!drop || u < worst_u || (u == worst_u && prob.lower[v] > worst_lb)) {
                    drop = &t;
                    worst_u = u;
                    worst_lb = prob.lower[v];
                }
            }
            m.set(drop->k, std::nullopt);
            released.push_back(drop->k);
            changed = true;
            break;
        }
        if (!changed) return m;
    }
}

convex::Vector restoration_start(const Problem& prob) {
    convex::Vector x = prob.lower;
    const auto grad = prob.objective_gradient(prob.lower);
    for (const auto& h : prob.caps) {
        double need = 0.0, gsum = 0.0;
        for (std::size_t i = 0; i < prob.n_vars; ++i) {
            if (h.normal[i] == 0.0) continue;
            need += prob.lower[i];
            gsum += std::max(grad[i], 0.0);
        }
        const double spare = std::max(0.0, h.offset - need);
        // Keep a sliver of the budget unused so the start is strictly inside.
        const double spread = spare * (1.0 - 1e-9);
        std::size_t members = 0;
        for (std::size_t i = 0; i < prob.n_vars; ++i) members += h.normal[i] != 0.0;
        for (std::size_t i = 0; i < prob.n_vars; ++i) {
            if (h.normal[i] == 0.0) continue;
            const double share = gsum > 0.0 ? std::max(grad[i], 0.0) / gsum : 1.0 / static_cast<double>(members);
            x[i] += spread * share;
        }
    }
    return x;
}

} // namespace

Result scp_power(const Scenario& s, const channel::ChannelGains& g, std::span<const double> weights,
                 const matching::Matching& m, const link::PowerAllocation& init) {
    Result r;
    r.matching = restore(s, g, weights, m, r.released_subchannels);
    for (std::size_t n = 0; n < s.n_ues; ++n) {
        if (m.count_ue(n) > 0 && r.matching.count_ue(n) == 0) r.dropped_ues.push_back(n);
    }
    const auto prob = Problem::build(s, g, weights, r.matching);
    if (prob.n_vars == 0) {
        r.power = link::PowerAllocation(s.n_ues, s.n_subchannels);
        r.objective_trace.push_back(0.0);
        return r;
    }
    convex::Vector x = prob.from_allocation(init);
    if (!r.released_subchannels.empty() || !prob.feasible(x, 1e-12)) {
        x = restoration_start(prob);
        r.restored = true;
    }
    convex::FeasibleSet set;
    set.lower = prob.lower;
    set.halfspaces = prob.caps;
    x = set.project(x);
    double obj = prob.objective(x);
    r.objective_trace.push_back(obj);

    double gmax = 0.0;
    for (double gi : prob.objective_gradient(x)) gmax = std::max(gmax, std::abs(gi));
    convex::Options opt;
    opt.initial_step = gmax > 0.0 ? 1e-3 * std::min(s.p_uav_max, s.p_ue_max) / gmax : 1.0;

    for (int it = 0; it < 50; ++it) {
        ++r.iterations;
        std::vector<DcParts> parts;
        for (std::size_t n = 0; n < s.n_ues; ++n) parts.push_back(dc_split(n, prob, x));
        const convex::Vector x0 = x;
        convex::Function surrogate = [&](std::span<const double> v) {
            convex::Evaluation e{0.0, convex::Vector(prob.n_vars, 0.0)};
            for (std::size_t n = 0; n < s.n_ues; ++n) {
                const auto kp = dc_split(n, prob, v);
                double lin = parts[n].m_part;
                for (std::size_t i = 0; i < prob.n_vars; ++i) lin += parts[n].m_grad[i] * (v[i] - x0[i]);
                e.value += prob.weights[n] * (kp.k_part - lin);
                for (std::size_t i = 0; i < prob.n_vars; ++i)
                    e.gradient[i] += prob.weights[n] * (kp.k_grad[i] - parts[n].m_grad[i]);
            }
            return e;
        };
        const auto res = convex::maximize_concave(surrogate, set, x, opt);
        const double cand = prob.objective(res.x);
        if (!(cand >= obj)) break;
        const double frac = obj > 0.0 ? (cand - obj) / obj : cand - obj;
        x = res.x;
        obj = cand;
        r.objective_trace.push_back(obj);
        if (frac < s.tol.eps / 10.0) break;
    }
    r.power = prob.to_allocation(x, s.n_ues, s.n_subchannels);
    return r;
}

} // namespace uavrelay::power
