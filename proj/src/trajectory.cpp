#include "uavrelay/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "uavrelay/convex_core.hpp"

namespace uavrelay::trajectory {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kHalfLog2e = 0.5 / std::numbers::ln2;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

LinkBound make_bound(const Vec3& peer, const Vec2& expansion, double z, const A2GParams& p) {
    LinkBound b;
    b.peer = peer;
    b.dz = z - peer.z;
    if (!(b.dz > 0.0)) throw DomainError("surrogate: UAV must be above its peer");
    Vec2 off{expansion.x - peer.x, expansion.y - peer.y};
    double r = std::hypot(off.x, off.y);
    if (r < kNudge) {
        off = r > 0.0 ? Vec2{off.x / r * kNudge, off.y / r * kNudge} : Vec2{kNudge, 0.0};
        r = kNudge;
    }
    b.expansion = {peer.x + off.x, peer.y + off.y};
    const double d0 = std::hypot(r, b.dz);
    b.c = d0 / b.dz;
    b.asin_inv_c = std::asin(b.dz / d0);
    b.slope = 1.0 / (b.c * (r / b.dz));
    const double theta0 = kDeg * b.asin_inv_c;
    b.d_factor = 1.0 + p.a * std::exp(-p.b * (theta0 - p.a));
    b.lambda0 = d0 * d0 * (p.eta_nlos - (p.eta_nlos - p.eta_los) / b.d_factor);
    return b;
}

// Frequency- and fading-free concave bound on 1 / (d^2 (eta_N - deta PR)).
GainBound unit_bound(const LinkBound& lb, const Vec2& pos, const A2GParams& p) {
    const double dx = pos.x - lb.peer.x;
    const double dy = pos.y - lb.peer.y;
    const double d = std::sqrt(dx * dx + dy * dy + lb.dz * lb.dz);
    const double u = d / lb.dz;
    const double tb = kDeg * (lb.asin_inv_c - lb.slope * (u - lb.c));
    const double e = p.a * std::exp(-p.b * (tb - p.a));
    const double d0sq = lb.d_factor * lb.d_factor;
    const double prb = 2.0 / lb.d_factor - (1.0 + e) / d0sq;
    const double deta = p.eta_nlos - p.eta_los;
    const double mix = p.eta_nlos - deta * prb;
    const double lam = d * d * mix;
    const double l0sq = lb.lambda0 * lb.lambda0;
    GainBound g;
    g.value = 2.0 / lb.lambda0 - lam / l0sq;
    // d(lam)/d(pos) through d and the bounded LoS probability.
    const double dtb_dd = -kDeg * lb.slope / lb.dz;
    const double dprb_dd = p.b * e / d0sq * dtb_dd;
    const double dlam_dd = 2.0 * d * mix - d * d * deta * dprb_dd;
    const double s = -dlam_dd / l0sq / d;
    g.gradient = {s * dx, s * dy};
    return g;
}

const LinkBound& pick(LinkKind link, std::size_t ue, const SurrogateContext& ctx) {
    return link == LinkKind::uav_bs ? ctx.uav_bs : ctx.ue_uav.at(ue);
}

// Horizontal-stage surrogate with the Taylor data of every relay term cached.
struct HorizontalModel {
    const Scenario& s;
    SurrogateContext ctx;
    std::vector<RelayTerm> terms;
    struct Tangent {
        double value;
        Vec2 grad;
    };
    std::vector<Tangent> taylor;
    std::vector<double> inv_l;
    std::vector<char> ue_used;

    HorizontalModel(const Scenario& sc, const Vec3& expansion, std::vector<RelayTerm> t)
        : s(sc), ctx(build_context(sc, expansion)), terms(std::move(t)), ue_used(sc.n_ues, 0) {
        const double s2 = s.noise_var;
        const double c = 1.0 + s.ici_power / s2;
        const auto gb = unit_bound(ctx.uav_bs, ctx.expansion, ctx.a2g);
        for (const auto& term : terms) {
            ue_used[term.ue] = 1;
            inv_l.push_back(1.0 / channel::free_space_pathloss(term.freq));
            const auto gu = unit_bound(ctx.ue_uav[term.ue], ctx.expansion, ctx.a2g);
            const double s1 = term.fading_ue_uav * inv_l.back();
            const double s2b = term.fading_uav_bs * inv_l.back();
            const double x = term.p_ue * gu.value * s1;
            const double y = term.p_uav * gb.value * s2b;
            const double inner = y + c * x + c * s2;
            const double k = kHalfLog2e / inner;
            taylor.push_back({0.5 * std::log2(s2 * inner),
                              {k * (term.p_uav * s2b * gb.gradient.x + c * term.p_ue * s1 * gu.gradient.x),
                               k * (term.p_uav * s2b * gb.gradient.y + c * term.p_ue * s1 * gu.gradient.y)}});
        }
    }

    convex::Evaluation objective(std::span<const double> v) const {
        const Vec2 pos{v[0], v[1]};
        const double s2 = s.noise_var;
        const double c = 1.0 + s.ici_power / s2;
        const auto gb = unit_bound(ctx.uav_bs, pos, ctx.a2g);
        std::vector<GainBound> gu(s.n_ues);
        for (std::size_t n = 0; n < s.n_ues; ++n)
            if (ue_used[n]) gu[n] = unit_bound(ctx.ue_uav[n], pos, ctx.a2g);
        convex::Evaluation e{0.0, {0.0, 0.0}};
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto& t = terms[i];
            const double s1 = t.fading_ue_uav * inv_l[i];
            const double s2b = t.fading_uav_bs * inv_l[i];
            const double x = t.p_ue * gu[t.ue].value * s1;
            const double y = t.p_uav * gb.value * s2b;
            if (!(x + s2 > 0.0) || !(y + c * s2 > 0.0)) return {kNegInf, {0.0, 0.0}};
            const double ta = taylor[i].value + taylor[i].grad.x * (pos.x - ctx.expansion.x) +
                              taylor[i].grad.y * (pos.y - ctx.expansion.y);
            e.value += t.weight * (0.5 * (std::log2(x + s2) + std::log2(y + c * s2)) - ta);
            const double a1 = kHalfLog2e * t.p_ue * s1 / (x + s2);
            const double a2 = kHalfLog2e * t.p_uav * s2b / (y + c * s2);
            e.gradient[0] += t.weight * (a1 * gu[t.ue].gradient.x + a2 * gb.gradient.x - taylor[i].grad.x);
            e.gradient[1] += t.weight * (a1 * gu[t.ue].gradient.y + a2 * gb.gradient.y - taylor[i].grad.y);
        }
        return e;
    }

    // Normalized QoS margins P H / (gamma sigma^2) - 1 on bound gains.
    std::vector<convex::Function> constraints() const {
        std::vector<convex::Function> out;
        const double floor1 = s.snr.ue_uav * s.noise_var;
        const double floor2 = s.snr.uav_bs * (s.noise_var + s.ici_power);
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto t = terms[i];
            const double k1 = t.p_ue * t.fading_ue_uav * inv_l[i] / floor1;
            const double k2 = t.p_uav * t.fading_uav_bs * inv_l[i] / floor2;
            const LinkBound* ue = &ctx.ue_uav[t.ue];
            const LinkBound* bs = &ctx.uav_bs;
            const A2GParams p = ctx.a2g;
            out.push_back([ue, p, k1](std::span<const double> v) {
                const auto g = unit_bound(*ue, {v[0], v[1]}, p);
                return convex::Evaluation{k1 * g.value - 1.0, {k1 * g.gradient.x, k1 * g.gradient.y}};
            });
            out.push_back([bs, p, k2](std::span<const double> v) {
                const auto g = unit_bound(*bs, {v[0], v[1]}, p);
                return convex::Evaluation{k2 * g.value - 1.0, {k2 * g.gradient.x, k2 * g.gradient.y}};
            });
        }
        return out;
    }
};

double relative_gain(double before, double after) {
    const double scale = std::abs(before);
    return scale > 0.0 ? (after - before) / scale : after - before;
}

double min_slack(const Vec3& pos, const SlotInputs& in) {
    const auto& s = in.scenario;
    double m = std::numeric_limits<double>::infinity();
    const auto g = channel::compute_gains(s, in.fading, pos);
    for (const auto& t : relay_terms(in)) {
        m = std::min(m, t.p_ue * g.h_ue_uav(t.ue, t.k) / (s.snr.ue_uav * s.noise_var) - 1.0);
        m = std::min(m, t.p_uav * g.h_uav_bs[t.k] / (s.snr.uav_bs * (s.noise_var + s.ici_power)) - 1.0);
    }
    return m;
}

void emit(const SlotInputs& in, const char* stage, int iter, const Vec3& pos, double obj) {
    if (!in.trace) return;
    *in.trace << stage << ',' << iter << ',' << pos.x << ',' << pos.y << ',' << pos.z << ',' << obj << ','
              << min_slack(pos, in) << '\n';
}

// Accepts `cand` or the first point halfway back toward `from` whose true
// objective does not drop and whose true constraints hold.
bool guarded(const Vec3& from, double from_obj, Vec3 cand, const SlotInputs& in, Vec3& out, double& out_obj) {
    for (int i = 0; i < 12; ++i) {
        if (position_feasible(cand, in)) {
            const double v = true_objective(cand, in);
            if (v >= from_obj) {
                out = cand;
                out_obj = v;
                return true;
            }
        }
        cand = {0.5 * (cand.x + from.x), 0.5 * (cand.y + from.y), 0.5 * (cand.z + from.z)};
    }
    return false;
}

} // namespace

SurrogateContext build_context(const Scenario& s, const Vec3& expansion) {
    SurrogateContext ctx;
    ctx.expansion = expansion.xy();
    ctx.z = expansion.z;
    ctx.a2g = s.a2g;
    ctx.uav_bs = make_bound(s.bs_position(), ctx.expansion, expansion.z, s.a2g);
    for (const auto& ue : s.ue_positions) ctx.ue_uav.push_back(make_bound(ue, ctx.expansion, expansion.z, s.a2g));
    return ctx;
}

GainBound gain_lower_bound(LinkKind link, std::size_t ue, const Vec2& pos, const SurrogateContext& ctx,
                           double freq_hz, double fading) {
    auto g = unit_bound(pick(link, ue, ctx), pos, ctx.a2g);
    const double scale = fading / channel::free_space_pathloss(freq_hz);
    return {g.value * scale, {g.gradient.x * scale, g.gradient.y * scale}};
}

RateBound surrogate_relay_rate(const Vec2& pos, const SurrogateContext& ctx, const RelayTerm& term,
                               const Scenario& s) {
    RelayTerm t = term;
    t.weight = 1.0;
    HorizontalModel model(s, {ctx.expansion.x, ctx.expansion.y, ctx.z}, {t});
    const auto e = model.objective(std::vector<double>{pos.x, pos.y});
    return {e.value, {e.gradient[0], e.gradient[1]}};
}

std::vector<RelayTerm> relay_terms(const SlotInputs& in) {
    std::vector<RelayTerm> out;
    for (std::size_t k = 0; k < in.matching.size(); ++k) {
        const auto& a = in.matching.at(k);
        if (!a || a->mode != Mode::relay) continue;
        out.push_back({a->ue, k, in.power.p_ue(a->ue, k), in.power.p_uav[k], in.weights[a->ue],
                       in.scenario.subchannel_freqs[k], in.fading.ue_uav(a->ue, k), in.fading.uav_bs[k]});
    }
    return out;
}

double true_objective(const Vec3& pos, const SlotInputs& in) {
    const auto& s = in.scenario;
    const auto g = channel::compute_gains(s, in.fading, pos);
    double f = 0.0;
    for (std::size_t k = 0; k < in.matching.size(); ++k) {
        const auto& a = in.matching.at(k);
        if (!a) continue;
        const double p = in.power.p_ue(a->ue, k);
        const double r = a->mode == Mode::cellular
                             ? link::rate_cellular(p, g.h_ue_bs(a->ue, k), s.noise_var, s.ici_power)
                             : link::rate_relay(link::relay_sinrs(p, in.power.p_uav[k], g.h_ue_uav(a->ue, k),
                                                                  g.h_uav_bs[k], s.noise_var, s.ici_power));
        f += in.weights[a->ue] * r;
    }
    return f;
}

bool position_feasible(const Vec3& pos, const SlotInputs& in) {
    const auto& s = in.scenario;
    if (pos.z < s.bs_height + s.min_clearance - 1e-9) return false;
    if (distance(pos, in.origin) > in.move_radius + 1e-9) return false;
    const auto g = channel::compute_gains(s, in.fading, pos);
    for (const auto& t : relay_terms(in)) {
        if (!link::qos_relay(true, t.p_ue, t.p_uav, g.h_ue_uav(t.ue, t.k), g.h_uav_bs[t.k], s.noise_var,
                             s.ici_power, s.snr.ue_uav, s.snr.uav_bs))
            return false;
    }
    return true;
}

Vec2 solve_horizontal(const Vec3& current, const SlotInputs& in) {
    const auto& s = in.scenario;
    auto terms = relay_terms(in);
    const double dz = current.z - in.origin.z;
    const double rad2 = in.move_radius * in.move_radius - dz * dz;
    if (terms.empty() || !(rad2 > 0.0)) return current.xy();
    convex::FeasibleSet base;
    base.ball = convex::Ball{{in.origin.x, in.origin.y}, std::sqrt(rad2)};

    Vec3 x = current;
    double obj = true_objective(x, in);
    emit(in, "horizontal", 0, x, obj);
    for (int j = 1; j <= 50; ++j) {
        HorizontalModel model(s, x, terms);
        convex::FeasibleSet set = base;
        set.barrier_terms = model.constraints();
        const auto res = convex::maximize_concave(
            [&model](std::span<const double> v) { return model.objective(v); }, set, std::vector<double>{x.x, x.y});
        if (res.diagnostics.status == convex::Status::infeasible) break;
        Vec3 next;
        double next_obj = 0.0;
        if (!guarded(x, obj, {res.x[0], res.x[1], x.z}, in, next, next_obj)) break;
        const double frac = relative_gain(obj, next_obj);
        x = next;
        obj = next_obj;
        emit(in, "horizontal", j, x, obj);
        if (frac < s.tol.eps_to) break;
    }
    return x.xy();
}

LinearizedLos linearize_los(const Vec3& uav, const Vec3& peer, const A2GParams& params) {
    const double dz = uav.z - peer.z;
    if (!(dz > 0.0)) throw DomainError("linearize_los: UAV must be above its peer");
    const double r = std::max(std::hypot(uav.x - peer.x, uav.y - peer.y), kNudge);
    LinearizedLos l;
    l.d0 = std::hypot(r, dz);
    l.z0 = uav.z;
    const double theta = kDeg * std::asin(dz / l.d0);
    l.e = channel::los_probability(theta, params.a, params.b);
    const double cos_theta = r / l.d0;
    l.f = (1.0 - l.e) * l.e * kDeg * params.b / cos_theta;
    return l;
}

namespace {

// Affine-gain surrogate of the altitude stage at q, with the interval of
// altitudes where the affine QoS margins stay nonnegative.
struct AltitudeStage {
    convex::Function objective;
    double lo = 0.0;
    double hi = 0.0;
};

AltitudeStage altitude_stage(const Vec3& q, const SlotInputs& in, double lo, double hi) {
    const auto& s = in.scenario;
    const auto terms = relay_terms(in);
    const double s2 = s.noise_var;
    const double c = 1.0 + s.ici_power / s2;
    const double deta = s.a2g.eta_nlos - s.a2g.eta_los;
    // Affine gain model h(z') = h0 (1 + slope (z' - z)) per link.
    struct Affine {
        double h0 = 0.0, slope = 0.0;
    };
    auto affine = [&](const Vec3& peer) {
        const auto lin = linearize_los(q, peer, s.a2g);
        const double mix = s.a2g.eta_nlos - deta * lin.e;
        return Affine{1.0 / (lin.d0 * lin.d0 * mix), deta * lin.f / (lin.d0 * mix)};
    };
    const Affine bs = affine(s.bs_position());
    auto bound = [&](double k, double slope, double floor) {
        // k (1 + slope dz) >= floor
        const double need = floor / k - 1.0;
        if (slope > 0.0) lo = std::max(lo, q.z + need / slope);
        else if (slope < 0.0) hi = std::min(hi, q.z + need / slope);
        else if (need > 0.0) lo = std::numeric_limits<double>::infinity();
    };
    struct Term {
        double weight, k1, s1, k2, ta, ta_slope;
    };
    std::vector<Term> cache;
    for (const auto& t : terms) {
        const Affine ue = affine(s.ue_positions[t.ue]);
        const double il = 1.0 / channel::free_space_pathloss(t.freq);
        const double k1 = t.p_ue * t.fading_ue_uav * il * ue.h0;
        const double k2 = t.p_uav * t.fading_uav_bs * il * bs.h0;
        bound(k1, ue.slope, s.snr.ue_uav * s2);
        bound(k2, bs.slope, s.snr.uav_bs * (s2 + s.ici_power));
        const double inner = k2 + c * k1 + c * s2;
        cache.push_back({t.weight, k1, ue.slope, k2, 0.5 * std::log2(s2 * inner),
                         kHalfLog2e * (k2 * bs.slope + c * k1 * ue.slope) / inner});
    }
    const double z0 = q.z, bs_slope = bs.slope;
    AltitudeStage st;
    st.lo = lo;
    st.hi = hi;
    st.objective = [cache, z0, bs_slope, s2, c](std::span<const double> v) {
        const double dzv = v[0] - z0;
        convex::Evaluation e{0.0, {0.0}};
        for (const auto& cc : cache) {
            const double x = cc.k1 * (1.0 + cc.s1 * dzv);
            const double y = cc.k2 * (1.0 + bs_slope * dzv);
            if (!(x + s2 > 0.0) || !(y + c * s2 > 0.0)) return convex::Evaluation{kNegInf, {0.0}};
            e.value += cc.weight * (0.5 * (std::log2(x + s2) + std::log2(y + c * s2)) - cc.ta - cc.ta_slope * dzv);
            e.gradient[0] += cc.weight * (kHalfLog2e * (cc.k1 * cc.s1 / (x + s2) + cc.k2 * bs_slope / (y + c * s2)) -
                                          cc.ta_slope);
        }
        return e;
    };
    return st;
}

} // namespace

convex::Function altitude_surrogate(const Vec3& current, const SlotInputs& in) {
    return altitude_stage(current, in, -std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity())
        .objective;
}

double solve_altitude(const Vec3& current, const SlotInputs& in) {
    const auto& s = in.scenario;
    if (relay_terms(in).empty()) return current.z;
    const double rxy = distance(current.xy(), in.origin.xy());
    const double b = std::sqrt(std::max(0.0, in.move_radius * in.move_radius - rxy * rxy));
    const double lo0 = std::max(in.origin.z - b, s.bs_height + s.min_clearance);
    const double hi0 = in.origin.z + b;
    if (!(hi0 > lo0)) return current.z;

    Vec3 q = current;
    double obj = true_objective(q, in);
    emit(in, "altitude", 0, q, obj);
    for (int l = 1; l <= 50; ++l) {
        const auto st = altitude_stage(q, in, lo0, hi0);
        if (!(st.hi >= st.lo)) break;
        convex::FeasibleSet set;
        set.lower = {st.lo};
        set.upper = {st.hi};
        const auto res = convex::maximize_concave(st.objective, set, std::vector<double>{q.z});
        Vec3 next;
        double next_obj = 0.0;
        if (!guarded(q, obj, {q.x, q.y, res.x[0]}, in, next, next_obj)) break;
        const double frac = relative_gain(obj, next_obj);
        q = next;
        obj = next_obj;
        emit(in, "altitude", l, q, obj);
        if (frac < s.tol.eps_to) break;
    }
    return q.z;
}

ToResult to_algorithm(const Vec3& start, const SlotInputs& in) {
    ToResult r;
    r.position = start;
    if (in.scenario.d_max > 0.2 * start.z)
        r.warnings.push_back("d_max exceeds 20% of the altitude; LoS linearization may be inaccurate");
    double obj = true_objective(start, in);
    r.objective_trace.push_back(obj);
    if (relay_terms(in).empty()) return r;
    for (int pass = 0; pass < 50; ++pass) {
        const Vec2 xy = solve_horizontal(r.position, in);
        const Vec3 mid{xy.x, xy.y, r.position.z};
        const Vec3 next{xy.x, xy.y, solve_altitude(mid, in)};
        const double v = true_objective(next, in);
        ++r.passes;
        r.objective_trace.push_back(v);
        const double frac = relative_gain(obj, v);
        r.position = next;
        obj = v;
        if (frac < in.scenario.tol.eps_to) break;
    }
    return r;
}

} // namespace uavrelay::trajectory
