#include "uavrelay/convex_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace uavrelay::convex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Vector project_ball(std::span<const double> x, const Ball& b) {
    Vector d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - b.center[i];
    const double r = norm(d);
    Vector out(x.begin(), x.end());
    if (r <= b.radius) return out;
    const double s = r > 0.0 ? b.radius / r : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = b.center[i] + s * d[i];
    return out;
}

Vector project_halfspace(std::span<const double> x, const Halfspace& h) {
    Vector out(x.begin(), x.end());
    const double excess = dot(h.normal, x) - h.offset;
    const double nn = dot(h.normal, h.normal);
    if (excess <= 0.0 || nn == 0.0) return out;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] -= excess / nn * h.normal[i];
    return out;
}

double lower_of(const FeasibleSet& s, std::size_t i) { return s.lower.empty() ? -kInf : s.lower[i]; }
double upper_of(const FeasibleSet& s, std::size_t i) { return s.upper.empty() ? kInf : s.upper[i]; }

Vector project_box(std::span<const double> x, const FeasibleSet& s) {
    Vector out(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(out[i], lower_of(s, i), upper_of(s, i));
    return out;
}

// Halfspaces whose normals are 0/1 indicators over disjoint index groups.
bool disjoint_unit_groups(const FeasibleSet& s, std::size_t n) {
    std::vector<char> used(n, 0);
    for (const auto& h : s.halfspaces) {
        for (std::size_t i = 0; i < n; ++i) {
            if (h.normal[i] == 0.0) continue;
            if (h.normal[i] != 1.0 || used[i]) return false;
            used[i] = 1;
        }
    }
    return true;
}

// Projection onto {lo <= y <= hi, sum y <= cap} over the indices in `idx`.
void project_group(Vector& y, std::span<const double> x, const std::vector<std::size_t>& idx, double cap,
                   const FeasibleSet& s) {
    auto at = [&](double tau) {
        double sum = 0.0;
        for (auto i : idx) sum += std::clamp(x[i] - tau, lower_of(s, i), upper_of(s, i));
        return sum;
    };
    if (at(0.0) <= cap) {
        for (auto i : idx) y[i] = std::clamp(x[i], lower_of(s, i), upper_of(s, i));
        return;
    }
    std::vector<double> bps{0.0};
    for (auto i : idx) {
        for (double b : {x[i] - upper_of(s, i), x[i] - lower_of(s, i)}) {
            if (std::isfinite(b) && b > 0.0) bps.push_back(b);
        }
    }
    std::sort(bps.begin(), bps.end());
    double tau = bps.back();
    for (std::size_t j = 1; j < bps.size(); ++j) {
        const double s1 = at(bps[j]);
        if (s1 <= cap) {
            const double s0 = at(bps[j - 1]);
            tau = s0 == s1 ? bps[j] : bps[j - 1] + (s0 - cap) / (s0 - s1) * (bps[j] - bps[j - 1]);
            break;
        }
    }
    for (auto i : idx) y[i] = std::clamp(x[i] - tau, lower_of(s, i), upper_of(s, i));
}

Vector project_groups(std::span<const double> x, const FeasibleSet& s) {
    Vector y = project_box(x, s);
    for (const auto& h : s.halfspaces) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (h.normal[i] != 0.0) idx.push_back(i);
        project_group(y, x, idx, h.offset, s);
    }
    return y;
}

Vector project_interval(std::span<const double> x, const FeasibleSet& s) {
    double lo = lower_of(s, 0), hi = upper_of(s, 0);
    for (const auto& h : s.halfspaces) {
        const double a = h.normal[0];
        if (a > 0.0) hi = std::min(hi, h.offset / a);
        else if (a < 0.0) lo = std::max(lo, h.offset / a);
    }
    if (lo > hi) return {0.5 * (lo + hi)};
    return {std::clamp(x[0], lo, hi)};
}

Vector dykstra(std::span<const double> x, const FeasibleSet& s) {
    const std::size_t n = x.size();
    std::vector<std::function<Vector(std::span<const double>)>> sets;
    if (s.ball) sets.push_back([&](std::span<const double> v) { return project_ball(v, *s.ball); });
    for (const auto& h : s.halfspaces)
        sets.push_back([&h](std::span<const double> v) { return project_halfspace(v, h); });
    if (!s.lower.empty() || !s.upper.empty())
        sets.push_back([&s](std::span<const double> v) { return project_box(v, s); });
    Vector y(x.begin(), x.end());
    std::vector<Vector> p(sets.size(), Vector(n, 0.0));
    Vector tmp(n);
    for (int it = 0; it < 5000; ++it) {
        const Vector prev = y;
        for (std::size_t j = 0; j < sets.size(); ++j) {
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + p[j][i];
            Vector z = sets[j](tmp);
            for (std::size_t i = 0; i < n; ++i) p[j][i] = tmp[i] - z[i];
            y = std::move(z);
        }
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(y[i] - prev[i]));
        if (change <= 1e-15 * (1.0 + norm(y)) && s.linear_violation(y) <= 1e-12) break;
    }
    return y;
}

struct Ascent {
    const FeasibleSet& set;
    const Options& opt;
    Diagnostics& diag;
};

// Projected gradient ascent with Armijo backtracking and Barzilai-Borwein steps.
// `done` allows an early exit once the iterate is good enough.
Status ascend(const Ascent& a, const Function& f, Vector& x, double& step,
              const std::function<bool(std::span<const double>)>& done = {}) {
    Evaluation e = f(x);
    if (!std::isfinite(e.value)) return Status::infeasible;
    std::vector<double> trace{e.value};
    Status status = Status::iteration_cap;
    int flat = 0;
    for (int it = 0; it < a.opt.max_iterations; ++it) {
        if (done && done(x)) {
            status = Status::converged;
            break;
        }
        bool accepted = false;
        Vector xn, d(x.size());
        Evaluation en;
        double dn = 0.0;
        for (int bt = 0; bt < 100; ++bt) {
            Vector trial(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + step * e.gradient[i];
            xn = a.set.project(trial);
            for (std::size_t i = 0; i < x.size(); ++i) d[i] = xn[i] - x[i];
            dn = norm(d);
            if (dn == 0.0) break;
            en = f(xn);
            if (std::isfinite(en.value) && en.value >= e.value + a.opt.armijo * dot(e.gradient, d)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++a.diag.iterations;
        if (dn == 0.0) {
            a.diag.gradient_norm = 0.0;
            status = Status::converged;
            break;
        }
        if (!accepted) {
            status = Status::stalled;
            break;
        }
        a.diag.gradient_norm = dn / step;
        Vector yv(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) yv[i] = en.gradient[i] - e.gradient[i];
        const double sy = dot(d, yv);
        const double gain = en.value - e.value;
        const double next = sy < 0.0 ? dot(d, d) / -sy : step * 2.0;
        x = std::move(xn);
        e = std::move(en);
        trace.push_back(e.value);
        if (a.diag.gradient_norm < a.opt.gradient_tolerance) {
            status = Status::converged;
            break;
        }
        flat = gain <= 1e-15 * std::max(1.0, std::abs(e.value)) ? flat + 1 : 0;
        if (flat >= 3) {
            status = Status::converged;
            break;
        }
        step = std::clamp(next, 1e-30, 1e30);
    }
    a.diag.trace.push_back(std::move(trace));
    return status;
}

double min_barrier(const FeasibleSet& s, std::span<const double> x) {
    double m = kInf;
    for (const auto& g : s.barrier_terms) {
        const double v = g(x).value;
        m = std::min(m, std::isnan(v) ? -kInf : v);
    }
    return m;
}

} // namespace

std::string to_string(Status s) {
    switch (s) {
    case Status::converged: return "converged";
    case Status::stalled: return "stalled";
    case Status::iteration_cap: return "iteration_cap";
    case Status::infeasible: return "infeasible";
    }
    return "unknown";
}

Vector FeasibleSet::project(std::span<const double> x) const {
    const bool box = !lower.empty() || !upper.empty();
    if (!ball && halfspaces.empty()) return project_box(x, *this);
    if (ball && halfspaces.empty() && !box) return project_ball(x, *ball);
    if (!ball && x.size() == 1) return project_interval(x, *this);
    if (!ball && disjoint_unit_groups(*this, x.size())) return project_groups(x, *this);
    return dykstra(x, *this);
}

double FeasibleSet::linear_violation(std::span<const double> x) const {
    double v = 0.0;
    if (ball) {
        Vector d(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - ball->center[i];
        v = std::max(v, norm(d) - ball->radius);
    }
    for (const auto& h : halfspaces) v = std::max(v, dot(h.normal, x) - h.offset);
    for (std::size_t i = 0; i < x.size(); ++i) {
        v = std::max(v, lower_of(*this, i) - x[i]);
        v = std::max(v, x[i] - upper_of(*this, i));
    }
    return v;
}

std::size_t FeasibleSet::count_active(std::span<const double> x, double tol) const {
    std::size_t c = 0;
    if (ball) {
        Vector d(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - ball->center[i];
        if (std::abs(norm(d) - ball->radius) <= tol * (1.0 + ball->radius)) ++c;
    }
    for (const auto& h : halfspaces)
        if (std::abs(dot(h.normal, x) - h.offset) <= tol * (1.0 + std::abs(h.offset))) ++c;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i] - lower_of(*this, i)) <= tol * (1.0 + std::abs(x[i]))) ++c;
        if (std::abs(x[i] - upper_of(*this, i)) <= tol * (1.0 + std::abs(x[i]))) ++c;
    }
    for (const auto& g : barrier_terms)
        if (g(x).value <= 1e-6) ++c;
    return c;
}

Result maximize_concave(const Function& objective, const FeasibleSet& set, std::span<const double> x0,
                        const Options& options) {
    Result res;
    Vector x = set.project(x0);
    Ascent a{set, options, res.diagnostics};
    double step = options.initial_step;

    if (!set.barrier_terms.empty() && !(min_barrier(set, x) > 0.0)) {
        // Phase 1: raise a smooth lower envelope of the constraint values.
        constexpr double tau = 1e-3;
        Function softmin = [&set](std::span<const double> v) {
            std::vector<Evaluation> gs;
            double m = kInf;
            for (const auto& g : set.barrier_terms) {
                gs.push_back(g(v));
                if (!std::isfinite(gs.back().value)) return Evaluation{-kInf, Vector(v.size(), 0.0)};
                m = std::min(m, gs.back().value);
            }
            double z = 0.0;
            Vector grad(v.size(), 0.0);
            for (const auto& g : gs) {
                const double w = std::exp(-(g.value - m) / tau);
                z += w;
                for (std::size_t i = 0; i < v.size(); ++i) grad[i] += w * g.gradient[i];
            }
            for (auto& gi : grad) gi /= z;
            return Evaluation{m - tau * std::log(z), grad};
        };
        double step1 = options.initial_step;
        ascend(a, softmin, x, step1, [&set](std::span<const double> v) { return min_barrier(set, v) >= 1e-4; });
        if (!(min_barrier(set, x) > 0.0)) {
            res.x = set.project(x0);
            res.value = objective(res.x).value;
            res.diagnostics.status = Status::infeasible;
            return res;
        }
    }

    const std::vector<double> phases =
        set.barrier_terms.empty() ? std::vector<double>{0.0} : options.barrier_weights;
    Status status = Status::converged;
    for (double mu : phases) {
        Function composite = [&, mu](std::span<const double> v) {
            Evaluation e = objective(v);
            if (mu == 0.0) return e;
            for (const auto& g : set.barrier_terms) {
                const Evaluation ge = g(v);
                if (!(ge.value > 0.0)) return Evaluation{-kInf, e.gradient};
                e.value += mu * std::log(ge.value);
                for (std::size_t i = 0; i < v.size(); ++i) e.gradient[i] += mu * ge.gradient[i] / ge.value;
            }
            return e;
        };
        status = ascend(a, composite, x, step);
        if (status == Status::infeasible) break;
    }
    res.x = x;
    res.value = objective(x).value;
    res.diagnostics.status = status;
    res.diagnostics.active_constraints = set.count_active(x, 1e-9);
    return res;
}

double grad_check(const Function& objective, std::span<const double> point, double step) {
    const Evaluation e = objective(point);
    double gmax = 0.0;
    for (double g : e.gradient) gmax = std::max(gmax, std::abs(g));
    double worst = 0.0;
    Vector xp(point.begin(), point.end()), xm(point.begin(), point.end());
    for (std::size_t i = 0; i < point.size(); ++i) {
        xp[i] = point[i] + step;
        xm[i] = point[i] - step;
        const double fd = (objective(xp).value - objective(xm).value) / (2.0 * step);
        xp[i] = xm[i] = point[i];
        const double denom = std::max({std::abs(e.gradient[i]), std::abs(fd), 1e-6 * gmax, 1e-300});
        worst = std::max(worst, std::abs(fd - e.gradient[i]) / denom);
    }
    return worst;
}

} // namespace uavrelay::convex
