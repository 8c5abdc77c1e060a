#include "uavrelay/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "uavrelay/power_alloc.hpp"
#include "uavrelay/trajectory.hpp"
#include "uavrelay/uav_power.hpp"

namespace uavrelay {

using nlohmann::json;

std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::jmstp: return "jmstp";
    case Algorithm::random: return "random";
    case Algorithm::cellular: return "cellular";
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
    if (name == "jmstp") return Algorithm::jmstp;
    if (name == "random") return Algorithm::random;
    if (name == "cellular") return Algorithm::cellular;
    return std::nullopt;
}

link::RateReport evaluate(const Scenario& s, const channel::ChannelGains& g, std::span<const double> weights,
                          const matching::Matching& m, const link::PowerAllocation& p) {
    link::RateReport r;
    r.per_ue_rate.assign(s.n_ues, 0.0);
    r.per_subchannel_rate.assign(s.n_subchannels, 0.0);
    matching::Context ctx{s, g, weights, true};
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (!m.at(k)) continue;
        const double rate = matching::subchannel_rate(k, *m.at(k), ctx, p);
        r.per_subchannel_rate[k] = rate;
        r.per_ue_rate[m.at(k)->ue] += rate;
    }
    for (std::size_t n = 0; n < s.n_ues; ++n) r.objective += weights[n] * r.per_ue_rate[n];
    return r;
}

SlotSolution jmstp_slot(const Scenario& s, const UavState& uav, std::span<const double> weights, std::size_t slot,
                        const std::optional<matching::Matching>& init, const SlotOptions& opt) {
    SlotSolution sol;
    sol.slot = slot;
    sol.prev_position = uav.prev_pos;
    sol.weights.assign(weights.begin(), weights.end());
    const auto fading = channel::draw_fading(s, slot);
    const double radius = propulsion::effective_move_radius(s);
    Vec3 pos = uav.pos;
    auto gains = channel::compute_gains(s, fading, pos);
    const bool relay = opt.allow_relay;

    matching::Matching psi(s.n_subchannels);
    {
        matching::Context ctx{s, gains, weights, relay};
        if (opt.random_matching) {
            std::mt19937_64 rng(mix_seed(s.rng_seed, 5000 + slot));
            psi = matching::random_matching(ctx, rng);
        } else {
            psi = matching::init_matching(ctx);
            if (init) {
                auto warm = matching::sanitize(*init, ctx);
                if (matching::system_utility(warm, ctx) > matching::system_utility(psi, ctx)) psi = warm;
            }
        }
    }
    link::PowerAllocation power = matching::equal_split(s, psi);
    double g = evaluate(s, gains, weights, psi, power).objective;
    sol.stage_trace.push_back(g);

    for (int it = 1; it <= 100; ++it) {
        sol.iterations = it;
        const double g_start = g;
        if (opt.rematch) {
            matching::Context ctx{s, gains, weights, relay};
            auto a = matching::msma(matching::init_matching(ctx), ctx).matching;
            auto b = matching::msma(matching::sanitize(psi, ctx), ctx).matching;
            auto& best = matching::system_utility(a, ctx) > matching::system_utility(b, ctx) ? a : b;
            if (!(best == psi)) {
                auto pr = power::scp_power(s, gains, weights, best, matching::equal_split(s, best));
                const double gc = evaluate(s, gains, weights, pr.matching, pr.power).objective;
                if (gc >= g) {
                    psi = pr.matching;
                    power = pr.power;
                    g = gc;
                }
            }
        }
        sol.stage_trace.push_back(g);
        if (opt.move) {
            trajectory::SlotInputs in{s, psi, power, weights, fading, uav.prev_pos, radius, opt.trace};
            auto to = trajectory::to_algorithm(pos, in);
            for (auto& w : to.warnings)
                if (std::find(sol.warnings.begin(), sol.warnings.end(), w) == sol.warnings.end())
                    sol.warnings.push_back(std::move(w));
            const auto new_gains = channel::compute_gains(s, fading, to.position);
            const double gt = evaluate(s, new_gains, weights, psi, power).objective;
            if (gt >= g) {
                pos = to.position;
                gains = new_gains;
                g = gt;
            }
        }
        sol.stage_trace.push_back(g);
        {
            auto pr = power::scp_power(s, gains, weights, psi, power);
            const double gp = evaluate(s, gains, weights, pr.matching, pr.power).objective;
            if (gp >= g) {
                psi = pr.matching;
                power = pr.power;
                g = gp;
            }
        }
        sol.stage_trace.push_back(g);
        if (g - g_start < s.tol.eps) break;
    }

    const auto report = evaluate(s, gains, weights, psi, power);
    sol.matching = psi;
    sol.modes = psi.modes(s.n_ues);
    sol.allocation = psi.allocation(s.n_ues);
    sol.power = power;
    sol.position = pos;
    sol.rates = report.per_ue_rate;
    sol.objective = report.objective;
    sol.speed = distance(pos, uav.prev_pos) / s.slot_len;
    sol.flying_power = propulsion::flying_power(sol.speed, s.propulsion);
    sol.flying_power_bound = propulsion::flying_power_upper(sol.speed, s.propulsion);
    return sol;
}

namespace {

EpisodeMetrics metrics_of(const Scenario& s, const EpisodeLog& log) {
    EpisodeMetrics m;
    for (double r : log.avg_rates) {
        m.sum_rate += r;
        if (r > 0.0) m.scheduled_ues += 1.0;
    }
    if (m.sum_rate > 0.0) m.jain = link::jain_index(log.avg_rates);
    double relay = 0.0, speed = 0.0;
    m.dwell_time.assign(s.regions.size(), 0.0);
    for (const auto& sol : log.slots) {
        speed += sol.speed;
        for (std::size_t n = 0; n < s.n_ues; ++n)
            if (sol.modes[n] == Mode::relay && sol.rates[n] > 0.0) relay += 1.0;
        if (!s.regions.empty()) {
            std::size_t best = 0;
            for (std::size_t r = 1; r < s.regions.size(); ++r)
                if (distance(sol.position.xy(), s.regions[r]) < distance(sol.position.xy(), s.regions[best])) best = r;
            m.dwell_time[best] += s.slot_len;
        }
    }
    const double t = static_cast<double>(std::max<std::size_t>(1, log.slots.size()));
    m.relay_ues = relay / t;
    m.avg_speed = speed / t;
    return m;
}

} // namespace

EpisodeLog run_episode(const Scenario& s, Algorithm algorithm, std::ostream* trace) {
    EpisodeLog log;
    log.algorithm = algorithm;
    log.move_radius = propulsion::effective_move_radius(s);
    SlotOptions opt;
    opt.trace = trace;
    if (algorithm == Algorithm::random) {
        opt.rematch = false;
        opt.random_matching = true;
    } else if (algorithm == Algorithm::cellular) {
        opt.allow_relay = false;
        opt.move = false;
    }
    UavState uav{s.uav_start, s.uav_start};
    std::vector<double> avg(s.n_ues, 0.0);
    std::optional<matching::Matching> prev;
    for (std::size_t t = 0; t < s.n_slots; ++t) {
        const auto w = link::update_weights(avg);
        log.weights_history.push_back(w);
        auto sol = jmstp_slot(s, uav, w, t, prev, opt);
        for (std::size_t n = 0; n < s.n_ues; ++n)
            avg[n] = (avg[n] * static_cast<double>(t) + sol.rates[n]) / static_cast<double>(t + 1);
        log.average_history.push_back(avg);
        uav = {sol.position, sol.position};
        prev = sol.matching;
        for (const auto& wmsg : sol.warnings)
            if (std::find(log.warnings.begin(), log.warnings.end(), wmsg) == log.warnings.end())
                log.warnings.push_back(wmsg);
        log.slots.push_back(std::move(sol));
    }
    log.avg_rates = avg;
    log.metrics = metrics_of(s, log);
    return log;
}

EpisodeLog baseline_random(const Scenario& s) { return run_episode(s, Algorithm::random); }
EpisodeLog baseline_cellular(const Scenario& s) { return run_episode(s, Algorithm::cellular); }

std::vector<std::string> validate_solution(const Scenario& s, const SlotSolution& sol) {
    std::vector<std::string> v;
    // Gains are undefined at or below the BS height.
    if (!(sol.position.z > s.bs_height)) return {"UAV not above the BS"};
    const auto fading = channel::draw_fading(s, sol.slot);
    const auto gains = channel::compute_gains(s, fading, sol.position);
    const auto& m = sol.matching;
    if (m.size() != s.n_subchannels) v.push_back("matching size differs from n_subchannels");
    if (!m.mode_consistent()) v.push_back("a UE uses both modes");
    const auto& p = sol.power;
    std::vector<double> ue_sum(s.n_ues, 0.0);
    double uav_sum = 0.0;
    for (std::size_t k = 0; k < s.n_subchannels; ++k) {
        const auto& a = m.at(k);
        for (std::size_t n = 0; n < s.n_ues; ++n) {
            if (p.p_ue(n, k) < 0.0) v.push_back("negative UE power");
            if (p.p_ue(n, k) != 0.0 && !(a && a->ue == n)) v.push_back("power on an unassigned subchannel");
            ue_sum[n] += p.p_ue(n, k);
        }
        if (p.p_uav[k] < 0.0) v.push_back("negative UAV power");
        if (p.p_uav[k] != 0.0 && !(a && a->mode == Mode::relay)) v.push_back("UAV power on a non-relay subchannel");
        uav_sum += p.p_uav[k];
        if (!a) continue;
        const bool ok =
            a->mode == Mode::cellular
                ? link::qos_cellular(true, p.p_ue(a->ue, k), gains.h_ue_bs(a->ue, k), s.noise_var, s.ici_power,
                                     s.snr.cellular)
                : link::qos_relay(true, p.p_ue(a->ue, k), p.p_uav[k], gains.h_ue_uav(a->ue, k), gains.h_uav_bs[k],
                                  s.noise_var, s.ici_power, s.snr.ue_uav, s.snr.uav_bs);
        if (!ok) v.push_back("QoS violated on subchannel " + std::to_string(k));
    }
    for (std::size_t n = 0; n < s.n_ues; ++n)
        if (ue_sum[n] > s.p_ue_max + 1e-9) v.push_back("UE " + std::to_string(n) + " exceeds its power budget");
    if (uav_sum > s.p_uav_max + 1e-9) v.push_back("UAV exceeds its power budget");
    const double radius = propulsion::effective_move_radius(s);
    const double moved = distance(sol.position, sol.prev_position);
    if (moved > radius + 1e-6) v.push_back("displacement exceeds the per-slot bound");
    const double v_slot = moved / s.slot_len;
    if (propulsion::flying_power_upper(v_slot, s.propulsion) * s.slot_len > s.e_max + 1e-9)
        v.push_back("propulsion energy exceeds e_max");
    const auto report = evaluate(s, gains, sol.weights, m, p);
    if (std::abs(report.objective - sol.objective) > 1e-9 * std::max(1.0, std::abs(sol.objective)))
        v.push_back("objective does not match recomputed rates");
    for (std::size_t n = 0; n < s.n_ues; ++n)
        if (std::abs(report.per_ue_rate[n] - sol.rates[n]) > 1e-9 * std::max(1.0, sol.rates[n]))
            v.push_back("rate of UE " + std::to_string(n) + " does not match");
    return v;
}

std::string episode_csv(const EpisodeLog& log) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "slot,ue,mode,subchannels,rate,weight,objective,uav_x,uav_y,uav_z,speed,flying_power\n";
    for (const auto& sol : log.slots) {
        for (std::size_t n = 0; n < sol.rates.size(); ++n) {
            std::string subs;
            for (std::size_t k = 0; k < sol.allocation.cols(); ++k) {
                if (!sol.allocation(n, k)) continue;
                if (!subs.empty()) subs += ';';
                subs += std::to_string(k);
            }
            const char* mode = !sol.modes[n] ? "none" : *sol.modes[n] == Mode::relay ? "relay" : "cellular";
            out << sol.slot + 1 << ',' << n << ',' << mode << ',' << subs << ',' << sol.rates[n] << ','
                << sol.weights[n] << ',' << sol.objective << ',' << sol.position.x << ',' << sol.position.y << ','
                << sol.position.z << ',' << sol.speed << ',' << sol.flying_power << '\n';
        }
    }
    return out.str();
}

std::string summary_json(const Scenario& s, const EpisodeLog& log) {
    json j;
    j["algorithm"] = to_string(log.algorithm);
    j["n_ues"] = s.n_ues;
    j["n_subchannels"] = s.n_subchannels;
    j["n_slots"] = s.n_slots;
    j["move_radius_m"] = log.move_radius;
    j["sum_rate"] = log.metrics.sum_rate;
    j["jain"] = log.metrics.jain ? json(*log.metrics.jain) : json(nullptr);
    j["avg_speed_m_s"] = log.metrics.avg_speed;
    j["scheduled_ues"] = log.metrics.scheduled_ues;
    j["relay_ues_per_slot"] = log.metrics.relay_ues;
    j["avg_rates"] = log.avg_rates;
    j["dwell_time_s"] = log.metrics.dwell_time;
    json slots = json::array();
    for (const auto& sol : log.slots) {
        slots.push_back({{"slot", sol.slot + 1},
                         {"objective", sol.objective},
                         {"bcd_iterations", sol.iterations},
                         {"position_m", {sol.position.x, sol.position.y, sol.position.z}},
                         {"speed_m_s", sol.speed},
                         {"flying_power_w", sol.flying_power}});
    }
    j["slots"] = slots;
    j["warnings"] = log.warnings;
    return j.dump(2);
}

std::optional<SweepAxis> parse_axis(std::string_view name) {
    if (name == "p_ue_max") return SweepAxis::p_ue_max;
    if (name == "d_max") return SweepAxis::d_max;
    if (name == "p_uav_max") return SweepAxis::p_uav_max;
    if (name == "e_max") return SweepAxis::e_max;
    return std::nullopt;
}

std::string to_string(SweepAxis a) {
    switch (a) {
    case SweepAxis::p_ue_max: return "p_ue_max";
    case SweepAxis::d_max: return "d_max";
    case SweepAxis::p_uav_max: return "p_uav_max";
    case SweepAxis::e_max: return "e_max";
    }
    return "unknown";
}

namespace {

// Config key set by each axis and the alternate spellings it replaces.
std::pair<std::string, std::vector<std::string>> axis_key(SweepAxis a) {
    switch (a) {
    case SweepAxis::p_ue_max: return {"p_ue_max_dbm", {"p_ue_max_w"}};
    case SweepAxis::d_max: return {"d_max_m", {}};
    case SweepAxis::p_uav_max: return {"p_uav_max_w", {"p_uav_max_dbm"}};
    case SweepAxis::e_max: return {"e_max_j", {}};
    }
    return {"", {}};
}

} // namespace

SweepResult sweep(std::string_view config_text, std::string_view axis, std::span<const double> values,
                  std::size_t seeds, std::span<const Algorithm> algorithms, std::size_t threads) {
    const auto ax = parse_axis(axis);
    if (!ax) throw DomainError("sweep: unknown axis '" + std::string(axis) + "'");
    if (seeds == 0) throw DomainError("sweep: need at least one seed");
    json base;
    try {
        base = json::parse(config_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(ScenarioError::Kind::parse, {e.what()});
    }
    if (!base.is_object()) throw ScenarioError(ScenarioError::Kind::parse, {"config must be a JSON object"});
    const std::uint64_t base_seed = load_scenario(config_text).rng_seed;
    const auto [key, alternates] = axis_key(*ax);

    SweepResult out;
    out.axis = *ax;
    std::vector<Scenario> scenarios;
    for (double v : values) {
        for (Algorithm a : algorithms) {
            for (std::size_t i = 0; i < seeds; ++i) {
                json doc = base;
                for (const auto& alt : alternates) doc.erase(alt);
                doc[key] = v;
                doc["rng_seed"] = base_seed + i;
                scenarios.push_back(load_scenario(doc.dump()));
                out.runs.push_back({v, a, i, base_seed + i, {}});
            }
        }
    }
    const std::size_t workers =
        std::max<std::size_t>(1, std::min(out.runs.size(), threads ? threads : std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](std::size_t w) {
        try {
            for (std::size_t i = next++; i < out.runs.size(); i = next++)
                out.runs[i].metrics = run_episode(scenarios[i], out.runs[i].algorithm).metrics;
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (std::size_t i = 0; i < out.runs.size(); i += seeds) {
        SweepRow row;
        row.value = out.runs[i].value;
        row.algorithm = out.runs[i].algorithm;
        row.seeds = seeds;
        double jain = 0.0;
        std::size_t jain_n = 0;
        for (std::size_t j = i; j < i + seeds; ++j) {
            const auto& m = out.runs[j].metrics;
            row.sum_rate += m.sum_rate;
            row.relay_ues += m.relay_ues;
            row.scheduled_ues += m.scheduled_ues;
            row.avg_speed += m.avg_speed;
            if (m.jain) {
                jain += *m.jain;
                ++jain_n;
            }
        }
        const double n = static_cast<double>(seeds);
        row.sum_rate /= n;
        row.relay_ues /= n;
        row.scheduled_ues /= n;
        row.avg_speed /= n;
        if (jain_n) row.jain = jain / static_cast<double>(jain_n);
        out.rows.push_back(row);
    }
    return out;
}

std::string sweep_csv(const SweepResult& r) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "axis,value,algorithm,seeds,sum_rate,jain,relay_ues,scheduled_ues,avg_speed\n";
    for (const auto& row : r.rows) {
        out << to_string(r.axis) << ',' << row.value << ',' << to_string(row.algorithm) << ',' << row.seeds << ','
            << row.sum_rate << ',';
        if (row.jain) out << *row.jain;
        out << ',' << row.relay_ues << ',' << row.scheduled_ues << ',' << row.avg_speed << '\n';
    }
    return out.str();
}

} // namespace uavrelay
